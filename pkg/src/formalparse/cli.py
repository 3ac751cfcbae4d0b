"""Command-line entry point: ``formalparse <subcommand> [options]``.

Every option may also come from a flat JSON object given with ``--config``;
the command line wins. Relative paths inside a config file are resolved
against the file's directory. Exit codes: 0 success, 1 domain failure,
2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .baselines import (
    FALLBACKS,
    PatternConfig,
    load_sense_tsv,
    load_sentences,
    pattern_stats,
    wsd_evaluate,
    wsd_train,
)
from .chart import PARSED, cyk_kbest
from .errors import ConfigError, FormalParseError, ValidationError
from .experiment import AmbiguationSpec, ExperimentConfig, ambiguate, canonical_json, run_experiment
from .pcfg import DEFAULT_MAX_UNARY_CHAIN, binarize_tree, induce, load_grammar
from .pruning import typed_pruning_hook
from .sexpr import render_sexpr
from .signature import load_signature
from .treebank import format_entry, load_treebank

PATH_KEYS = {"signature", "treebank", "grammar", "output_dir", "output", "input", "train", "test"}

DEFAULTS: dict[str, Any] = {
    "k": 1,
    "seed": 0,
    "test_ratio": 0.2,
    "hook": "typed",
    "require_gold_root": True,
    "max_unary_chain": DEFAULT_MAX_UNARY_CHAIN,
    "oov_policy": "fail",
    "beam": None,
    "cell_depth": 4,
    "cast_set": [],
    "merge_map": {},
    "fallback": "global",
    "output_dir": ".",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def atomic_write(path: str | Path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    base = p.resolve().parent
    out = {}
    for key, value in cfg.items():
        key = key.replace("-", "_")
        if key in PATH_KEYS and isinstance(value, str) and not os.path.isabs(value):
            value = str(base / value)
        out[key] = value
    return out


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _beam(text: str):
    return None if text.lower() == "off" else int(text)


def _json_obj(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON file with option values")
    common.add_argument("--jobs", type=int, default=None,
                        help="concurrent workers (default: available processors)")

    p = _Parser(prog="formalparse", description="Typed PCFG parsing of formal expressions.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="{induce,parse,ambiguate,evaluate,wsd,patterns}",
                           parser_class=_Parser)

    s = sub.add_parser("induce", parents=[common], help="treebank -> grammar dump")
    s.add_argument("--treebank")
    s.add_argument("--signature")
    s.add_argument("--max-unary-chain", type=int, dest="max_unary_chain")
    s.add_argument("--output", help="grammar file (default: stdout)")

    s = sub.add_parser("parse", parents=[common], help="grammar + tokens -> k-best trees")
    s.add_argument("--grammar")
    s.add_argument("--tokens", help="one space-separated sentence")
    s.add_argument("--input", help="file with one sentence per line")
    s.add_argument("--k", type=int)
    s.add_argument("--hook", choices=("typed", "none"))
    s.add_argument("--signature")
    s.add_argument("--merge-map", type=_json_obj, dest="merge_map")
    s.add_argument("--root", help="required root label")
    s.add_argument("--beam", type=_beam)
    s.add_argument("--cell-depth", type=int, dest="cell_depth")
    s.add_argument("--max-unary-chain", type=int, dest="max_unary_chain")
    s.add_argument("--output")

    s = sub.add_parser("ambiguate", parents=[common], help="treebank + spec -> ambiguated treebank")
    s.add_argument("--treebank")
    s.add_argument("--signature")
    s.add_argument("--cast-set", type=_json_obj, dest="cast_set", help='JSON list, e.g. ["&","Cx"]')
    s.add_argument("--merge-map", type=_json_obj, dest="merge_map", help='JSON object')
    s.add_argument("--output")

    s = sub.add_parser("evaluate", parents=[common], help="full recovery experiment -> report")
    s.add_argument("--treebank")
    s.add_argument("--signature")
    s.add_argument("--output-dir", dest="output_dir")
    s.add_argument("--cast-set", type=_json_obj, dest="cast_set")
    s.add_argument("--merge-map", type=_json_obj, dest="merge_map")
    s.add_argument("--k", type=int)
    s.add_argument("--hook", choices=("typed", "none"))
    s.add_argument("--require-gold-root", type=_bool, dest="require_gold_root")
    s.add_argument("--max-unary-chain", type=int, dest="max_unary_chain")
    s.add_argument("--oov-policy", choices=("fail", "open_class"), dest="oov_policy")
    s.add_argument("--beam", type=_beam)
    s.add_argument("--cell-depth", type=int, dest="cell_depth")
    s.add_argument("--test-ratio", type=float, dest="test_ratio")
    s.add_argument("--seed", type=int)

    s = sub.add_parser("wsd", parents=[common], help="most-frequent-sense baseline")
    s.add_argument("--train")
    s.add_argument("--test")
    s.add_argument("--fallback", choices=FALLBACKS)
    s.add_argument("--output")

    s = sub.add_parser("patterns", parents=[common], help="sentence corpus -> pattern statistics")
    s.add_argument("--input")
    s.add_argument("--output-dir", dest="output_dir")
    s.add_argument("--math-delims", type=_json_obj, dest="math_delims")
    s.add_argument("--ref-keywords", type=_json_obj, dest="ref_keywords")
    return p


class Options:
    """Command line over config file over built-in defaults."""

    def __init__(self, args: argparse.Namespace, cfg: dict[str, Any]):
        self.args = args
        self.cfg = cfg

    def get(self, key: str, required: bool = False):
        value = getattr(self.args, key, None)
        if value is None:
            value = self.cfg.get(key)
        if value is None:
            value = DEFAULTS.get(key)
        if value is None and required:
            raise ConfigError(f"missing required option {key!r}")
        return value

    def path(self, key: str, required: bool = True, must_exist: bool = True):
        value = self.get(key, required)
        if value is None:
            return None
        if must_exist and not Path(value).exists():
            raise ConfigError(f"{key} not found: {value}")
        return value

    def jobs(self) -> int:
        jobs = self.get("jobs")
        if jobs is None:
            jobs = os.cpu_count() or 1
        if int(jobs) < 1:
            raise ConfigError("jobs must be >= 1")
        return int(jobs)


def _emit(text: str, output: str | None) -> None:
    if output:
        atomic_write(output, text)
    else:
        sys.stdout.write(text)


def cmd_induce(o: Options) -> int:
    sig = load_signature(o.path("signature")) if o.get("signature") else None
    entries = load_treebank(o.path("treebank"), sig)
    grammar = induce([binarize_tree(e.gold_tree) for e in entries], int(o.get("max_unary_chain")))
    _emit(grammar.dumps(), o.get("output"))
    return 0


def cmd_parse(o: Options) -> int:
    grammar = load_grammar(o.path("grammar"), int(o.get("max_unary_chain")))
    if o.get("tokens"):
        sentences = [o.get("tokens")]
    elif o.get("input"):
        sentences = load_sentences(o.path("input"))
    else:
        raise ConfigError("give --tokens or --input")
    hook = None
    if o.get("hook") == "typed" and o.get("signature"):
        hook = typed_pruning_hook(load_signature(o.path("signature")), o.get("merge_map"))
    elif o.get("hook") == "typed" and getattr(o.args, "hook", None) == "typed":
        raise ConfigError("--hook typed needs --signature")
    k = int(o.get("k"))
    out, failures = [], 0
    for sent in sentences:
        res = cyk_kbest(grammar, sent.split(), k, hook=hook, root=o.get("root"),
                        beam=o.get("beam"), depth=o.get("cell_depth") if hook else None)
        out.append(f"# {sent}\t{res.status}")
        for rank, (tree, lp) in enumerate(res.trees, 1):
            out.append(f"{rank}\t{lp:.6f}\t{render_sexpr(tree)}")
        failures += res.status != PARSED
    _emit("\n".join(out) + "\n", o.get("output"))
    return 1 if failures * 2 > len(sentences) else 0


def _spec(o: Options) -> AmbiguationSpec:
    cast_set = o.get("cast_set")
    merge_map = o.get("merge_map")
    if not isinstance(cast_set, list) or not all(isinstance(c, str) for c in cast_set):
        raise ConfigError("cast_set must be a list of names")
    if not isinstance(merge_map, dict):
        raise ConfigError("merge_map must be an object")
    return AmbiguationSpec(frozenset(cast_set), dict(merge_map))


def cmd_ambiguate(o: Options) -> int:
    sig = load_signature(o.path("signature"))
    entries = load_treebank(o.path("treebank"), sig)
    spec = _spec(o)
    spec.validate(sig)
    lines = []
    for e in entries:
        a = ambiguate(e, spec, sig)
        lines.append(format_entry(a.id, a.tree, a.tokens))
    _emit("\n".join(lines) + ("\n" if lines else ""), o.get("output"))
    return 0


def cmd_evaluate(o: Options) -> int:
    sig = load_signature(o.path("signature"))
    entries = load_treebank(o.path("treebank"), sig)
    spec = _spec(o)
    config = ExperimentConfig(
        k=int(o.get("k")), seed=int(o.get("seed")), test_ratio=float(o.get("test_ratio")),
        hook=o.get("hook"), require_gold_root=bool(o.get("require_gold_root")),
        max_unary_chain=int(o.get("max_unary_chain")), oov_policy=o.get("oov_policy"),
        beam=o.get("beam"), cell_depth=o.get("cell_depth"), jobs=o.jobs())
    report = run_experiment(entries, spec, sig, config)
    out_dir = Path(o.get("output_dir"))
    atomic_write(out_dir / "report.json", report.to_json())
    atomic_write(out_dir / "report.txt", report.table())
    atomic_write(out_dir / "timings.json", report.timings_json())
    sys.stdout.write(report.table())
    counts = report.data["counts"]
    failed = counts["no_parse"] + counts["oov_failure"]
    return 1 if failed * 2 > report.data["test_size"] else 0


def cmd_wsd(o: Options) -> int:
    table = wsd_train(load_sense_tsv(o.path("train")))
    result = wsd_evaluate(table, load_sense_tsv(o.path("test")), o.get("fallback"))
    result["fallback"] = o.get("fallback")
    result["global_sense"] = table.global_sense
    _emit(canonical_json(result), o.get("output"))
    return 0


def cmd_patterns(o: Options) -> int:
    delims = o.get("math_delims")
    keywords = o.get("ref_keywords")
    config = PatternConfig(
        tuple(tuple(d) for d in delims) if delims is not None else PatternConfig.math_delims,
        tuple(keywords) if keywords is not None else PatternConfig.ref_keywords)
    stats = pattern_stats(load_sentences(o.path("input")), config, jobs=o.jobs())
    out_dir = Path(o.get("output_dir"))
    atomic_write(out_dir / "patterns.tsv", stats.to_tsv())
    atomic_write(out_dir / "patterns.json", canonical_json(stats.summary()))
    return 0


COMMANDS = {
    "induce": cmd_induce,
    "parse": cmd_parse,
    "ambiguate": cmd_ambiguate,
    "evaluate": cmd_evaluate,
    "wsd": cmd_wsd,
    "patterns": cmd_patterns,
}


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"formalparse: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        options = Options(args, load_config(args.config))
        return COMMANDS[args.command](options)
    except ConfigError as exc:
        print(f"formalparse: config error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"formalparse: validation error: {exc}", file=sys.stderr)
        return 1
    except (FormalParseError, OSError) as exc:
        print(f"formalparse: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
