"""Regenerate the trig fixture treebank from its gold terms."""
import sys
from pathlib import Path

from formalparse.signature import load_signature
from formalparse.terms import parse_term
from formalparse.treebank import format_entry, label_with_types

DATA = Path(__file__).resolve().parents[1] / "src" / "formalparse" / "data"

def main(terms_file: str) -> None:
    sig = load_signature(DATA / "trig.sig")
    lines = []
    for raw in Path(terms_file).read_text().splitlines():
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        entry_id, text = raw.split(None, 1)
        term = parse_term(text, sig.consts)
        lines.append(format_entry(entry_id, label_with_types(term, sig)))
    (DATA / "trig.treebank").write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(sys.argv[1])
