"""Most-frequent-sense disambiguation and proof-sentence pattern statistics."""
from __future__ import annotations

import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyCorpus, FormalParseError


class _Abstained:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "Abstained"

    def __reduce__(self):
        return (_Abstained, ())


ABSTAINED = _Abstained()
FALLBACKS = ("global", "abstain")


@dataclass(frozen=True)
class SenseTable:
    senses: dict[str, tuple[tuple[str, int], ...]]
    global_sense: str

    def top(self, token: str) -> str | None:
        ranked = self.senses.get(token)
        return ranked[0][0] if ranked else None


def _rank(counter: Counter) -> tuple[tuple[str, int], ...]:
    return tuple(sorted(counter.items(), key=lambda kv: (-kv[1], kv[0])))


def wsd_train(pairs: Iterable[tuple[str, str]]) -> SenseTable:
    by_token: dict[str, Counter] = {}
    overall: Counter = Counter()
    for token, sense in pairs:
        by_token.setdefault(token, Counter())[sense] += 1
        overall[sense] += 1
    if not overall:
        raise EmptyCorpus("cannot train on an empty sense corpus")
    return SenseTable({t: _rank(c) for t, c in sorted(by_token.items())}, _rank(overall)[0][0])


def wsd_predict(table: SenseTable, token: str, fallback: str = "global"):
    """Majority sense of ``token``; unseen tokens get the global sense or ABSTAINED."""
    if fallback not in FALLBACKS:
        raise ValueError(f"fallback must be one of {FALLBACKS}")
    sense = table.top(token)
    if sense is not None:
        return sense
    return table.global_sense if fallback == "global" else ABSTAINED


def wsd_evaluate(table: SenseTable, test: Sequence[tuple[str, str]], fallback: str = "global"
                 ) -> dict:
    """Accuracy over attempted predictions and coverage over all test items.

    Accuracy is ``None`` when nothing was attempted.
    """
    if not test:
        raise EmptyCorpus("cannot evaluate on an empty test set")
    attempted = correct = 0
    for token, gold in test:
        pred = wsd_predict(table, token, fallback)
        if pred is ABSTAINED:
            continue
        attempted += 1
        correct += pred == gold
    return {
        "total": len(test),
        "attempted": attempted,
        "correct": correct,
        "accuracy": correct / attempted if attempted else None,
        "coverage": attempted / len(test),
    }


def load_sense_tsv(path: str | Path) -> list[tuple[str, str]]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2 or not cols[0] or not cols[1]:
                raise FormalParseError(f"{path}:{lineno}: expected 'token<TAB>senseId'")
            pairs.append((cols[0], cols[1]))
    return pairs


# --- sentence patterns -------------------------------------------------------

MATH, REF = "<M>", "<R>"
DEFAULT_MATH_DELIMS: tuple[tuple[str, str], ...] = (("$", "$"), ("\\(", "\\)"))
DEFAULT_REF_KEYWORDS: tuple[str, ...] = ("Theorem", "Lemma", "Definition", "Corollary", "Axiom")
_TOKEN_RE = re.compile(r"<[MR]>|\w+|[^\w\s]")


@dataclass(frozen=True)
class PatternConfig:
    math_delims: tuple[tuple[str, str], ...] = DEFAULT_MATH_DELIMS
    ref_keywords: tuple[str, ...] = DEFAULT_REF_KEYWORDS

    def ref_regex(self) -> re.Pattern:
        words = "|".join(re.escape(w) for w in self.ref_keywords)
        # label word: no whitespace, trailing punctuation stays outside
        return re.compile(rf"\b(?:{words})\s+[^\s.,;:!?]+(?:[.,:][^\s.,;:!?]+)*")


def _mask_math(sentence: str, delims, warnings: Counter | None) -> str:
    out: list[str] = []
    pos = 0
    while True:
        best = None
        for opener, closer in delims:
            i = sentence.find(opener, pos)
            if i >= 0 and (best is None or i < best[0] or (i == best[0] and len(opener) > len(best[1]))):
                best = (i, opener, closer)
        if best is None:
            out.append(sentence[pos:])
            break
        i, opener, closer = best
        out.append(sentence[pos:i])
        out.append(f" {MATH} ")
        j = sentence.find(closer, i + len(opener))
        if j < 0:
            if warnings is not None:
                warnings["unterminated_math"] += 1
            break
        pos = j + len(closer)
    return "".join(out)


def normalize_sentence(sentence: str, config: PatternConfig | None = None,
                       warnings: Counter | None = None) -> str:
    """Map a proof sentence to its surface pattern.

    Math spans become ``<M>``, reference phrases ``<R>``; the rest is
    lowercased with punctuation split off and whitespace collapsed. An
    unterminated math span runs to the end of the sentence.
    """
    config = config or PatternConfig()
    text = _mask_math(sentence, config.math_delims, warnings)
    if config.ref_keywords:
        text = config.ref_regex().sub(f" {REF} ", text)
    tokens = []
    for tok in _TOKEN_RE.findall(text):
        tokens.append(tok if tok in (MATH, REF) else tok.lower())
    return " ".join(tokens)


@dataclass
class PatternStats:
    patterns: list[tuple[str, int]]
    total_sentences: int
    coverage: list[float] = field(default_factory=list)
    warnings: dict = field(default_factory=dict)

    def to_tsv(self) -> str:
        return "".join(f"{c}\t{p}\n" for p, c in self.patterns)

    def summary(self) -> dict:
        return {
            "total_sentences": self.total_sentences,
            "distinct_patterns": len(self.patterns),
            "coverage": list(self.coverage),
            "top": [{"pattern": p, "count": c} for p, c in self.patterns[:10]],
            "warnings": dict(sorted(self.warnings.items())),
        }


def _normalize_one(sentence: str, config: PatternConfig) -> tuple[str, int]:
    w: Counter = Counter()
    return normalize_sentence(sentence, config, w), w["unterminated_math"]


def pattern_stats(sentences: Sequence[str], config: PatternConfig | None = None,
                  jobs: int = 1) -> PatternStats:
    """Rank normalized patterns by (count desc, pattern asc) with cumulative coverage."""
    config = config or PatternConfig()
    work = partial(_normalize_one, config=config)
    if jobs > 1 and len(sentences) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, sentences, chunksize=max(1, len(sentences) // (4 * jobs))))
    else:
        results = [work(s) for s in sentences]
    counts = Counter(p for p, _ in results)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    total = len(sentences)
    coverage, run = [], 0
    for _, c in ranked:
        run += c
        coverage.append(run / total)
    warnings = {"unterminated_math": sum(w for _, w in results)}
    return PatternStats(ranked, total, coverage, warnings)


def load_sentences(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]
