"""Probabilistic CYK: Viterbi, exact k-best and hook-based pruning.

Tie order (scores within ``TIE_EPS``): a candidate with the larger split
point comes first, then the smaller rule identity, then better-ranked
children; within a cell a label's own binary/lexical item precedes items
reached through the unary closure, which are ordered by their bottom label.
Among complete parses ties go to the smaller root label.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from . import _kernels
from .errors import EmptyInput, InvalidK
from .pcfg import TIE_EPS, UNK, ClosureEntry, Grammar, Rule, debinarize_tree, is_intermediate
from .sexpr import RawTree, render_sexpr

PARSED, NO_PARSE, OOV_FAILURE = "parsed", "no_parse", "oov_failure"


class PruningHook:
    """Accept/reject predicate over candidate constituents.

    Subclasses implement :meth:`accept`; calling the hook updates the
    ``invocations`` and ``rejections`` counters. The candidate is the
    debinarized subtree and its ``(start, end)`` span.
    """

    def __init__(self):
        self.invocations = 0
        self.rejections = 0

    def accept(self, tree: RawTree, span: tuple[int, int]) -> bool:  # pragma: no cover
        raise NotImplementedError

    def __call__(self, tree: RawTree, span: tuple[int, int]) -> bool:
        self.invocations += 1
        ok = bool(self.accept(tree, span))
        if not ok:
            self.rejections += 1
        return ok

    def reset_counters(self) -> None:
        self.invocations = 0
        self.rejections = 0


class FunctionHook(PruningHook):
    def __init__(self, fn: Callable[[RawTree, tuple[int, int]], bool]):
        super().__init__()
        self.fn = fn

    def accept(self, tree, span):
        return self.fn(tree, span)


@dataclass
class ParseResult:
    status: str
    trees: list[tuple[RawTree, float]] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def best(self) -> RawTree | None:
        return self.trees[0][0] if self.trees else None


class CompiledGrammar:
    """Integer-coded view of a grammar for the chart kernels."""

    def __init__(self, grammar: Grammar):
        self.grammar = grammar
        self.labels = tuple(grammar.nonterminals)
        self.label_id = {lab: i for i, lab in enumerate(self.labels)}
        self.n_labels = len(self.labels)
        lid = self.label_id

        self.binary = grammar.binary_rules()
        b = self.binary
        self.bin_lhs = np.array([lid[r.lhs] for r in b], dtype=np.int64)
        self.bin_left = np.array([lid[r.rhs[0]] for r in b], dtype=np.int64)
        self.bin_right = np.array([lid[r.rhs[1]] for r in b], dtype=np.int64)
        self.bin_lp = np.array([r.logprob for r in b], dtype=np.float64)
        self.bin_index = {r.key: i for i, r in enumerate(b)}

        order = sorted(range(len(b)), key=lambda q: (self.bin_left[q], q))
        counts = np.bincount(self.bin_left, minlength=self.n_labels) if len(b) else \
            np.zeros(self.n_labels, dtype=np.int64)
        self.left_start = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.left_rules = np.array(order, dtype=np.int64)

        if len(b):
            starts = [0] + [q for q in range(1, len(b)) if self.bin_lhs[q] != self.bin_lhs[q - 1]]
        else:
            starts = []
        self.lhs_seg_start = np.array(starts, dtype=np.int64)
        self.lhs_seg_label = self.bin_lhs[self.lhs_seg_start] if len(b) else np.zeros(0, np.int64)

        entries = [e for es in grammar.closure.values() for e in es]
        entries.sort(key=lambda e: (lid[e.top], lid[e.bottom]))
        self.closure_entries: list[ClosureEntry] = entries
        self.cl_top = np.array([lid[e.top] for e in entries], dtype=np.int64)
        self.cl_bottom = np.array([lid[e.bottom] for e in entries], dtype=np.int64)
        self.cl_lp = np.array([e.logprob for e in entries], dtype=np.float64)

        self.lexicon: dict[str, list[tuple[int, float, Rule]]] = {}
        for r in grammar.lexical_rules():
            self.lexicon.setdefault(r.rhs[0], []).append((lid[r.lhs], r.logprob, r))
        self.original = np.array([not is_intermediate(lab) for lab in self.labels], dtype=bool)

        # python k-best indexes
        self.bin_by_left: dict[int, list[int]] = {}
        for q in order:
            self.bin_by_left.setdefault(int(self.bin_left[q]), []).append(q)
        self.closure_by_bottom: dict[int, list[int]] = {}
        for e_i, e in enumerate(entries):
            self.closure_by_bottom.setdefault(lid[e.bottom], []).append(e_i)

    def lex_arrays(self, symbols: Sequence[str]):
        start = [0]
        labels, lps, rules = [], [], []
        for tok in symbols:
            for x, lp, r in self.lexicon.get(tok, ()):
                labels.append(x)
                lps.append(lp)
                rules.append(self.grammar.rule_index[r.key])
            start.append(len(labels))
        return (np.array(start, dtype=np.int64), np.array(labels, dtype=np.int64),
                np.array(lps, dtype=np.float64), np.array(rules, dtype=np.int64))


def compiled(grammar: Grammar) -> CompiledGrammar:
    cg = grammar.__dict__.get("_compiled")
    if cg is None:
        cg = CompiledGrammar(grammar)
        grammar.__dict__["_compiled"] = cg
    return cg


def _map_tokens(grammar: Grammar, tokens: Sequence[str]) -> tuple[list[str] | None, list[str]]:
    symbols, unknown = [], []
    has_unk = grammar.is_terminal(UNK)
    for tok in tokens:
        if grammar.is_terminal(tok):
            symbols.append(tok)
        elif has_unk:
            symbols.append(UNK)
        else:
            unknown.append(tok)
    return (None if unknown else symbols), unknown


def _root_ok(cg: CompiledGrammar, x: int, root: str | None) -> bool:
    if not cg.original[x]:
        return False
    return root is None or cg.labels[x] == root


def cyk_viterbi(grammar: Grammar, tokens: Sequence[str], hook: PruningHook | None = None,
                root: str | None = None, beam: int | None = None,
                backend: str | None = None, depth: int | None = None) -> ParseResult:
    """Best parse of ``tokens``; any original label over the whole input counts.

    ``root`` restricts the label of complete parses. Without a hook or beam
    the chart is filled by the compiled kernel, otherwise this is
    :func:`cyk_kbest` with ``k = 1``.
    """
    tokens = list(tokens)
    if not tokens:
        raise EmptyInput("cannot parse an empty token sequence")
    if hook is not None or beam is not None:
        return cyk_kbest(grammar, tokens, 1, hook=hook, root=root, beam=beam, depth=depth)
    t0 = time.perf_counter()
    symbols, unknown = _map_tokens(grammar, tokens)
    if symbols is None:
        return ParseResult(OOV_FAILURE, stats={"unknown_tokens": unknown},
                           elapsed=time.perf_counter() - t0)
    cg = compiled(grammar)
    n = len(tokens)
    lex = cg.lex_arrays(symbols)
    base_score, base_key, fin_score, fin_src = _kernels.fill_chart(cg, *lex, n=n, backend=backend)
    top = fin_score[0, n]
    cands = [x for x in range(cg.n_labels) if np.isfinite(top[x]) and _root_ok(cg, x, root)]
    stats = {"items": int(np.isfinite(fin_score).sum()), "items_pruned": 0, "hook_invocations": 0}
    if not cands:
        return ParseResult(NO_PARSE, stats=stats, elapsed=time.perf_counter() - t0)
    best = max(top[x] for x in cands)
    x = min(x for x in cands if top[x] >= best - TIE_EPS)
    tree = _backtrack(cg, tokens, base_key, fin_src, 0, n, x)
    return ParseResult(PARSED, [(debinarize_tree(tree), float(top[x]))], stats,
                       time.perf_counter() - t0)


def _backtrack(cg, tokens, base_key, fin_src, i, j, x) -> RawTree:
    src = fin_src[i, j, x]
    if src >= 0:
        entry = cg.closure_entries[src]
        below = _base_tree(cg, tokens, base_key, fin_src, i, j, cg.label_id[entry.bottom])
        return _wrap_chain(entry, below)
    return _base_tree(cg, tokens, base_key, fin_src, i, j, x)


def _base_tree(cg, tokens, base_key, fin_src, i, j, x) -> RawTree:
    label = cg.labels[x]
    if j - i == 1:
        return RawTree(label, (RawTree(tokens[i]),))
    key = int(base_key[i, j, x])
    n_rules = max(1, len(cg.binary))
    rank, r = divmod(key, n_rules)
    k = j - 1 - rank
    left = _backtrack(cg, tokens, base_key, fin_src, i, k, int(cg.bin_left[r]))
    right = _backtrack(cg, tokens, base_key, fin_src, k, j, int(cg.bin_right[r]))
    return RawTree(label, (left, right))


def _wrap_chain(entry: ClosureEntry, below: RawTree) -> RawTree:
    node = below
    for rule in reversed(entry.chain):
        node = RawTree(rule.lhs, (node,))
    return node


# --- k-best ----------------------------------------------------------------

class _Deriv:
    __slots__ = ("score", "label", "key", "children", "entry", "token", "_tree")

    def __init__(self, score, label, key, children=(), entry=None, token=None):
        self.score = score
        self.label = label
        self.key = key
        self.children = children
        self.entry = entry
        self.token = token
        self._tree = None

    def tree(self, labels) -> RawTree:
        if self._tree is None:
            if self.entry is not None:
                self._tree = _wrap_chain(self.entry, self.children[0].tree(labels))
            elif self.token is not None:
                self._tree = RawTree(labels[self.label], (RawTree(self.token),))
            else:
                self._tree = RawTree(labels[self.label],
                                     tuple(c.tree(labels) for c in self.children))
        return self._tree


def ranked(cands: list) -> Iterator:
    """Yield candidates best-first under the tolerance tie rule.

    At each step the winner is the smallest ``key`` among remaining
    candidates whose score is within ``TIE_EPS`` of the remaining maximum.
    """
    rest = sorted(cands, key=lambda d: -d.score)
    while rest:
        top = rest[0].score
        end = 1
        while end < len(rest) and rest[end].score >= top - TIE_EPS:
            end += 1
        w = min(range(end), key=lambda q: rest[q].key)
        yield rest.pop(w)


def cyk_kbest(grammar: Grammar, tokens: Sequence[str], k: int, hook: PruningHook | None = None,
              root: str | None = None, beam: int | None = None,
              depth: int | None = None) -> ParseResult:
    """The ``k`` best distinct parses, best first.

    Every cell keeps up to ``depth`` (default ``k``) accepted derivations per
    label. ``hook`` is consulted once per distinct candidate constituent with
    an original label (binarization intermediates are never judged). A hook
    that rejects for reasons outside the candidate's span can discard an
    alternative a larger constituent needed; raising ``depth`` keeps more
    alternatives alive. ``beam`` keeps only the ``beam`` best labels per cell
    and voids any exactness guarantee.
    """
    tokens = list(tokens)
    if not tokens:
        raise EmptyInput("cannot parse an empty token sequence")
    if k < 1:
        raise InvalidK(f"k must be >= 1, got {k}")
    depth = max(k, depth or k)
    t0 = time.perf_counter()
    symbols, unknown = _map_tokens(grammar, tokens)
    if symbols is None:
        return ParseResult(OOV_FAILURE, stats={"unknown_tokens": unknown},
                           elapsed=time.perf_counter() - t0)
    cg = compiled(grammar)
    labels = cg.labels
    n = len(tokens)
    stats = {"items": 0, "items_pruned": 0, "hook_invocations": 0}
    memo: dict[tuple[int, int, str], bool] = {}
    chart: dict[tuple[int, int], dict[int, list[_Deriv]]] = {}

    def judge(d: _Deriv, i: int, j: int) -> bool:
        if hook is None or not cg.original[d.label]:
            return True
        tree = debinarize_tree(d.tree(labels))
        key = (i, j, render_sexpr(tree))
        ok = memo.get(key)
        if ok is None:
            stats["hook_invocations"] += 1
            ok = hook(tree, (i, j))
            memo[key] = ok
        if not ok:
            stats["items_pruned"] += 1
        return ok

    def select(cands: list[_Deriv], i: int, j: int) -> list[_Deriv]:
        kept: list[_Deriv] = []
        seen: set[RawTree] = set()
        for d in ranked(cands):
            t = d.tree(labels)
            if t in seen or not judge(d, i, j):
                continue
            seen.add(t)
            kept.append(d)
            if len(kept) == depth:
                break
        return kept

    for length in range(1, n + 1):
        for i in range(n - length + 1):
            j = i + length
            base: dict[int, list[_Deriv]] = {}
            if length == 1:
                for x, lp, rule in cg.lexicon.get(symbols[i], ()):
                    base.setdefault(x, []).append(
                        _Deriv(lp, x, (grammar.rule_index[rule.key],), token=tokens[i]))
            else:
                for split in range(j - 1, i, -1):
                    rank = j - 1 - split
                    lcell, rcell = chart[(i, split)], chart[(split, j)]
                    for lx, llist in lcell.items():
                        for q in cg.bin_by_left.get(lx, ()):
                            rlist = rcell.get(int(cg.bin_right[q]))
                            if not rlist:
                                continue
                            lp = float(cg.bin_lp[q])
                            x = int(cg.bin_lhs[q])
                            bucket = base.setdefault(x, [])
                            for a, ld in enumerate(llist):
                                for b, rd in enumerate(rlist):
                                    if (a + 1) * (b + 1) > depth and hook is None:
                                        break
                                    bucket.append(_Deriv(lp + ld.score + rd.score, x,
                                                         (rank, q, a, b), (ld, rd)))
            # a label's own items are judged first; only accepted ones feed the closure
            accepted: dict[int, list[_Deriv]] = {}
            for x in sorted(base):
                kept = select(base[x], i, j)
                if kept:
                    accepted[x] = kept
            finals: dict[int, list[_Deriv]] = {}
            for x, cands in accepted.items():
                finals.setdefault(x, []).extend(
                    _Deriv(d.score, x, (0,) + d.key, d.children, token=d.token) for d in cands)
            for y, cands in accepted.items():
                for e_i in cg.closure_by_bottom.get(y, ()):
                    entry = cg.closure_entries[e_i]
                    top = int(cg.cl_top[e_i])
                    bucket = finals.setdefault(top, [])
                    for d in cands:
                        bucket.append(_Deriv(entry.logprob + d.score, top, (1, y) + d.key,
                                             (d,), entry=entry))
            cell: dict[int, list[_Deriv]] = {}
            for x in sorted(finals):
                kept = select(finals[x], i, j)
                if kept:
                    cell[x] = kept
                    stats["items"] += len(kept)
            if beam is not None and len(cell) > beam:
                heads = [_Deriv(cell[x][0].score, x, (x,)) for x in cell]
                order = [d.label for d in ranked(heads)][:beam]
                cell = {x: cell[x] for x in sorted(order)}
            chart[(i, j)] = cell

    roots = []
    for x, lst in chart[(0, n)].items():
        if _root_ok(cg, x, root):
            roots.extend(_Deriv(d.score, x, (x, pos), (d,)) for pos, d in enumerate(lst))
    out: list[tuple[RawTree, float]] = []
    for r in ranked(roots):
        out.append((debinarize_tree(r.children[0].tree(labels)), r.score))
        if len(out) == k:
            break
    status = PARSED if out else NO_PARSE
    return ParseResult(status, out, stats, time.perf_counter() - t0)
