"""Cast-erasure ambiguation, seeded corpus splits and the recovery experiment."""
from __future__ import annotations

import json
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .chart import NO_PARSE, OOV_FAILURE, cyk_kbest
from .errors import (
    AmbiguousRepair,
    ConfigError,
    FormalParseError,
    MissingGoldTerm,
    TooSmall,
    ValidationError,
)
from .pcfg import DEFAULT_MAX_UNARY_CHAIN, binarize_tree, induce
from .pruning import invert_merge, repair_tree, typed_pruning_hook
from .sexpr import RawTree, tree_yield
from .signature import Signature
from .terms import Term, alpha_equal, render_term
from .treebank import LEX_SEP, TreebankEntry, lex_suffix, strip_lex

# Knuth's MMIX linear congruential generator
LCG_A = 6364136223846793005
LCG_C = 1442695040888963407
LCG_MASK = (1 << 64) - 1

OUTCOMES = ("correct", "wrong", "oov_failure", "no_parse", "repair_ambiguous", "repair_failed")


@dataclass(frozen=True)
class AmbiguationSpec:
    cast_set: frozenset = frozenset()
    merge_map: Mapping[str, str] = field(default_factory=dict)

    def validate(self, sig: Signature) -> None:
        extra = set(self.cast_set) - set(sig.coercions)
        if extra:
            raise ConfigError(f"cast set contains non-coercions: {sorted(extra)}")
        declared = set(sig.consts) | set(sig.vars)
        for src, dst in self.merge_map.items():
            if dst in declared and dst not in self.merge_map and dst != src:
                raise ConfigError(f"merge target {dst!r} collides with a declared symbol")


@dataclass(frozen=True)
class AmbiguatedEntry:
    id: str
    tokens: tuple[str, ...]
    tree: RawTree
    gold_term: Term


def ambiguate(entry: TreebankEntry, spec: AmbiguationSpec, sig: Signature | None = None
              ) -> AmbiguatedEntry:
    """Erase cast applications from the gold tree and merge surface symbols.

    A node ``(T (C c) child)`` with ``c`` in the cast set is replaced by
    ``child`` relabeled with ``T``; under lexicalization the child keeps its
    own head suffix. Leaves and head suffixes are renamed through the merge map.
    """
    if entry.gold_term is None:
        raise MissingGoldTerm(f"entry {entry.id!r} has no gold term")
    casts = set(spec.cast_set)
    merge = dict(spec.merge_map)

    def relabel(label: str) -> str:
        suffix = lex_suffix(label)
        if not suffix:
            return label
        head = suffix[len(LEX_SEP):]
        return strip_lex(label) + LEX_SEP + merge.get(head, head)

    def go(node: RawTree) -> RawTree:
        if node.is_leaf:
            return RawTree(merge.get(node.label, node.label))
        if node.is_preterminal:
            return RawTree(node.label, (go(node.children[0]),))
        if (len(node.children) == 2 and node.children[0].is_preterminal
                and node.children[0].children[0].label in casts):
            child = go(node.children[1])
            label = strip_lex(node.label)
            if not child.is_preterminal:
                label += lex_suffix(child.label)
            return RawTree(label, child.children)
        return RawTree(relabel(node.label), tuple(go(c) for c in node.children))

    tree = go(entry.gold_tree)
    return AmbiguatedEntry(entry.id, tuple(tree_yield(tree)), tree, entry.gold_term)


def lcg_stream(seed: int):
    state = seed & LCG_MASK
    while True:
        state = (LCG_A * state + LCG_C) & LCG_MASK
        yield state >> 33


def split_corpus(entries: Sequence, test_ratio: float, seed: int) -> tuple[list, list]:
    """Seeded held-out split; both halves keep the input order.

    The test size is ``floor(test_ratio * n + 0.5)`` clamped to ``[1, n-1]``;
    membership comes from a Fisher-Yates shuffle driven by :func:`lcg_stream`.
    """
    n = len(entries)
    if n < 2:
        raise TooSmall(f"need at least 2 entries to split, got {n}")
    if not 0 < test_ratio < 1:
        raise ConfigError(f"test ratio must lie strictly between 0 and 1, got {test_ratio}")
    order = list(range(n))
    rng = lcg_stream(seed)
    for i in range(n - 1, 0, -1):
        j = next(rng) % (i + 1)
        order[i], order[j] = order[j], order[i]
    m = min(max(int(test_ratio * n + 0.5), 1), n - 1)
    test_idx = set(order[:m])
    train = [e for i, e in enumerate(entries) if i not in test_idx]
    test = [e for i, e in enumerate(entries) if i in test_idx]
    return train, test


@dataclass
class ExperimentConfig:
    k: int = 1
    seed: int = 0
    test_ratio: float = 0.2
    hook: str = "typed"
    require_gold_root: bool = True
    max_unary_chain: int = DEFAULT_MAX_UNARY_CHAIN
    oov_policy: str = "fail"
    beam: int | None = None
    cell_depth: int | None = 4
    jobs: int = 1

    def validate(self) -> None:
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.hook not in ("typed", "none"):
            raise ConfigError(f"hook must be 'typed' or 'none', got {self.hook!r}")
        if self.oov_policy not in ("fail", "open_class"):
            raise ConfigError(f"oov_policy must be 'fail' or 'open_class', got {self.oov_policy!r}")
        if not 0 <= self.test_ratio < 1:
            raise ConfigError("test_ratio must lie in [0, 1)")
        if self.max_unary_chain < 1:
            raise ConfigError("max_unary_chain must be >= 1")
        if self.beam is not None and self.beam < 1:
            raise ConfigError("beam must be >= 1")
        if self.cell_depth is not None and self.cell_depth < 1:
            raise ConfigError("cell_depth must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


@dataclass
class EntryResult:
    id: str
    outcome: str
    rank: int | None
    predicted: str | None
    items: int
    hook_invocations: int
    hook_rejections: int
    elapsed: float = 0.0


@dataclass
class Report:
    data: dict
    timings: dict

    def to_json(self) -> str:
        return canonical_json(self.data)

    def timings_json(self) -> str:
        return canonical_json(self.timings)

    def table(self) -> str:
        return format_table(self.data)

    @property
    def top1(self) -> float:
        return self.data["top1"]

    @property
    def topk(self) -> dict[str, float]:
        return self.data["topk"]


def canonical_json(obj, indent: int = 2) -> str:
    """JSON with sorted keys and every float printed with six decimals."""
    return _dump(obj, 0, indent) + "\n"


def _dump(obj, level: int, indent: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return f"{obj:.6f}"
    if isinstance(obj, (int, str)):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_dump(obj[k], level + 1, indent)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _dump(v, level + 1, indent) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def format_table(data: dict) -> str:
    rows = [("train size", str(data["train_size"])), ("test size", str(data["test_size"])),
            ("top-1", f"{data['top1']:.6f}")]
    for k in sorted(data["topk"], key=int):
        if k == "1":
            continue
        rows.append((f"top-{k}", f"{data['topk'][k]:.6f}"))
    for name in OUTCOMES:
        rows.append((name, str(data["counts"][name])))
    for name, value in sorted(data["chart"].items()):
        rows.append((name, f"{value:.6f}"))
    width = max(len(r[0]) for r in rows)
    return "\n".join(f"{a.ljust(width)}  {b}" for a, b in rows) + "\n"


# worker state for process-pool evaluation
_STATE: dict = {}


def _init_worker(grammar, sig, spec, config):
    _STATE.update(grammar=grammar, sig=sig, spec=spec, config=config,
                  inverse=invert_merge(spec.merge_map))


def _evaluate_one(entry: AmbiguatedEntry) -> EntryResult:
    g, sig, spec, cfg = _STATE["grammar"], _STATE["sig"], _STATE["spec"], _STATE["config"]
    inverse = _STATE["inverse"]
    t0 = time.perf_counter()
    hook = typed_pruning_hook(sig, spec.merge_map) if cfg.hook == "typed" else None
    root = entry.tree.label if cfg.require_gold_root else None
    res = cyk_kbest(g, entry.tokens, cfg.k, hook=hook, root=root, beam=cfg.beam,
                    depth=cfg.cell_depth)
    stats = res.stats
    inv = stats.get("hook_invocations", 0)
    rej = stats.get("items_pruned", 0)
    items = stats.get("items", 0)
    if res.status == OOV_FAILURE:
        return EntryResult(entry.id, "oov_failure", None, None, items, inv, rej,
                           time.perf_counter() - t0)
    if res.status == NO_PARSE:
        return EntryResult(entry.id, "no_parse", None, None, items, inv, rej,
                           time.perf_counter() - t0)
    rank = None
    first_outcome = None
    predicted = None
    for pos, (tree, _) in enumerate(res.trees, 1):
        try:
            term = repair_tree(tree, sig, inverse)
        except AmbiguousRepair:
            outcome = "repair_ambiguous"
            term = None
        except FormalParseError:
            outcome = "repair_failed"
            term = None
        else:
            outcome = "correct" if alpha_equal(term, entry.gold_term) else "wrong"
        if pos == 1:
            first_outcome = outcome
            predicted = _render(term)
        if outcome == "correct":
            rank = pos
            break
    outcome = "correct" if rank == 1 else first_outcome
    return EntryResult(entry.id, outcome, rank, predicted, items, inv, rej,
                       time.perf_counter() - t0)


def _render(term: Term | None) -> str | None:
    if term is None:
        return None
    try:
        return render_term(term)
    except FormalParseError:
        return repr(term)


def run_experiment(corpus: Sequence[TreebankEntry], spec: AmbiguationSpec, sig: Signature,
                   config: ExperimentConfig | None = None) -> Report:
    """Ambiguate, split, induce, re-parse and score formal-meaning recovery.

    A test entry counts as a top-k hit when one of its first k parses,
    reconstructed and coercion-repaired against the parse's root label, is
    alpha-equal to the gold term. ``test_ratio = 0`` evaluates on the
    training entries themselves.
    """
    config = config or ExperimentConfig()
    config.validate()
    spec.validate(sig)
    timings: dict[str, float] = {}
    t0 = time.perf_counter()

    ambiguated, ledger = [], []
    for e in corpus:
        try:
            ambiguated.append(ambiguate(e, spec, sig))
        except MissingGoldTerm as exc:
            ledger.append((e.id, str(exc)))
    if corpus and len(ledger) * 2 > len(corpus):
        detail = "; ".join(f"{i}: {m}" for i, m in ledger)
        raise ValidationError(f"{len(ledger)} of {len(corpus)} entries failed validation: {detail}",
                              ledger[0][0], tuple(ledger))
    if not ambiguated:
        raise TooSmall("no usable entries")
    if config.test_ratio == 0:
        train, test = ambiguated, ambiguated
    else:
        train, test = split_corpus(ambiguated, config.test_ratio, config.seed)
    timings["ambiguate_split"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    grammar = induce([binarize_tree(a.tree) for a in train], config.max_unary_chain)
    if config.oov_policy == "open_class":
        grammar = grammar.with_open_class()
    timings["induce"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    ordered = sorted(test, key=lambda a: a.id)
    if config.jobs > 1 and len(ordered) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs, initializer=_init_worker,
                                 initargs=(grammar, sig, spec, config)) as pool:
            chunk = max(1, len(ordered) // (4 * config.jobs))
            results = list(pool.map(_evaluate_one, ordered, chunksize=chunk))
    else:
        _init_worker(grammar, sig, spec, config)
        results = [_evaluate_one(a) for a in ordered]
    timings["parse_evaluate"] = time.perf_counter() - t2
    timings["total"] = time.perf_counter() - t0

    n = len(results)
    counts = Counter(r.outcome for r in results)
    topk = {str(j): sum(1 for r in results if r.rank is not None and r.rank <= j) / n
            for j in range(1, config.k + 1)}
    data = {
        "train_size": len(train),
        "test_size": n,
        "top1": topk["1"],
        "topk": topk,
        "counts": {name: counts.get(name, 0) for name in OUTCOMES},
        "chart": {
            "mean_items": sum(r.items for r in results) / n,
            "mean_hook_invocations": sum(r.hook_invocations for r in results) / n,
            "mean_hook_rejections": sum(r.hook_rejections for r in results) / n,
        },
        "grammar": {"rules": len(grammar.rules), "nonterminals": len(grammar.nonterminals),
                    "terminals": len(grammar.terminals)},
        "config": {
            "k": config.k, "seed": config.seed, "test_ratio": float(config.test_ratio),
            "hook": config.hook, "require_gold_root": config.require_gold_root,
            "max_unary_chain": config.max_unary_chain, "oov_policy": config.oov_policy,
            "beam": config.beam, "cell_depth": config.cell_depth,
            "cast_set": sorted(spec.cast_set), "merge_map": dict(spec.merge_map),
        },
        "skipped": [{"id": i, "reason": m} for i, m in ledger],
        "entries": [{"id": r.id, "outcome": r.outcome, "rank": r.rank, "predicted": r.predicted}
                    for r in results],
    }
    timings["per_entry"] = {r.id: r.elapsed for r in results}
    return Report(data, timings)


def default_jobs() -> int:
    return os.cpu_count() or 1
