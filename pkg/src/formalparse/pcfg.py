"""Relative-frequency PCFG induction, exact binarization and unary closure."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyTreebank, GrammarFormatError, LabelClash, MalformedIntermediate
from .sexpr import RawTree

INTERMEDIATE = "|"
CHILD_SEP = "."
UNK = "<UNK>"
DEFAULT_MAX_UNARY_CHAIN = 3
TIE_EPS = 1e-12


def is_intermediate(label: str) -> bool:
    return INTERMEDIATE in label


def binarize_tree(tree: RawTree) -> RawTree:
    """Right-branching binarization with full-context intermediate labels.

    ``(A a b c)`` becomes ``(A a (A|b.c b c))``.
    """
    if tree.is_leaf:
        return tree
    kids = [binarize_tree(c) for c in tree.children]
    if len(kids) <= 2:
        return RawTree(tree.label, tuple(kids))
    base = tree.label

    def chain(rest: list[RawTree]) -> RawTree:
        if len(rest) == 2:
            node_kids = rest
        else:
            node_kids = [rest[0], chain(rest[1:])]
        label = base + INTERMEDIATE + CHILD_SEP.join(k.label for k in rest)
        return RawTree(label, tuple(node_kids))

    return RawTree(base, (kids[0], chain(kids[1:])))


def debinarize_tree(tree: RawTree) -> RawTree:
    """Inverse of :func:`binarize_tree`; splices out every intermediate node."""
    if is_intermediate(tree.label) and not tree.is_leaf:
        raise MalformedIntermediate(f"intermediate label {tree.label!r} at root")
    return _debin(tree)


def _debin(node: RawTree) -> RawTree:
    if node.is_leaf:
        return node
    kids: list[RawTree] = []
    for pos, child in enumerate(node.children):
        if not child.is_leaf and is_intermediate(child.label):
            base = node.label.split(INTERMEDIATE, 1)[0]
            if len(node.children) != 2 or pos != 1 or child.label.split(INTERMEDIATE, 1)[0] != base:
                raise MalformedIntermediate(
                    f"intermediate {child.label!r} outside chain position under {node.label!r}")
            if len(child.children) != 2:
                raise MalformedIntermediate(f"intermediate {child.label!r} is not binary")
            spliced = _debin(child)
            kids.extend(spliced.children)
        else:
            kids.append(_debin(child))
    return RawTree(node.label, tuple(kids))


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[str, ...]
    count: int
    logprob: float

    @property
    def key(self) -> tuple[str, tuple[str, ...]]:
        return (self.lhs, self.rhs)

    def __str__(self) -> str:
        return f"{self.lhs} -> {' '.join(self.rhs)}"


@dataclass(frozen=True)
class ClosureEntry:
    top: str
    bottom: str
    logprob: float
    chain: tuple[Rule, ...]


@dataclass
class Grammar:
    rules: tuple[Rule, ...]
    nonterminals: tuple[str, ...]
    terminals: tuple[str, ...]
    lexicalized: bool = False
    max_unary_chain: int = DEFAULT_MAX_UNARY_CHAIN
    closure: dict[str, list[ClosureEntry]] = field(default_factory=dict)

    def __post_init__(self):
        self.rules = tuple(sorted(self.rules, key=lambda r: r.key))
        self._nt = frozenset(self.nonterminals)
        self._t = frozenset(self.terminals)
        if not self.closure:
            self.closure = unary_closure(self, self.max_unary_chain)

    def is_terminal(self, sym: str) -> bool:
        return sym in self._t

    @cached_property
    def by_lhs(self) -> dict[str, list[Rule]]:
        out: dict[str, list[Rule]] = {}
        for r in self.rules:
            out.setdefault(r.lhs, []).append(r)
        return out

    @cached_property
    def by_rhs(self) -> dict[tuple[str, ...], list[Rule]]:
        out: dict[tuple[str, ...], list[Rule]] = {}
        for r in self.rules:
            out.setdefault(r.rhs, []).append(r)
        return out

    @cached_property
    def rule_index(self) -> dict[tuple[str, tuple[str, ...]], int]:
        return {r.key: i for i, r in enumerate(self.rules)}

    @cached_property
    def closure_by_bottom(self) -> dict[str, list[ClosureEntry]]:
        out: dict[str, list[ClosureEntry]] = {}
        for entries in self.closure.values():
            for e in entries:
                out.setdefault(e.bottom, []).append(e)
        for v in out.values():
            v.sort(key=lambda e: e.top)
        return out

    def lexical_rules(self) -> list[Rule]:
        return [r for r in self.rules if len(r.rhs) == 1 and r.rhs[0] in self._t]

    def unary_rules(self) -> list[Rule]:
        return [r for r in self.rules if len(r.rhs) == 1 and r.rhs[0] in self._nt]

    def binary_rules(self) -> list[Rule]:
        return [r for r in self.rules if len(r.rhs) == 2]

    def tree_logprob(self, tree: RawTree) -> float:
        """Sum of rule log-probabilities over a (binarized) tree."""
        index = self.rule_index
        total = 0.0
        for node in tree.subtrees():
            if node.is_leaf:
                continue
            key = (node.label, tuple(c.label for c in node.children))
            if key not in index:
                return -math.inf
            total += self.rules[index[key]].logprob
        return total

    def with_open_class(self, mass: float = 1e-6) -> Grammar:
        """Copy in which preterminals that emitted a hapax also emit ``<UNK>``.

        Each such preterminal gives ``mass`` to ``<UNK>``, taken
        proportionally from its seen emissions.
        """
        emit_mass: Counter = Counter()
        hapax = set()
        lhs_total: Counter = Counter()
        for r in self.rules:
            lhs_total[r.lhs] += r.count
        for r in self.lexical_rules():
            emit_mass[r.lhs] += r.count / lhs_total[r.lhs]
            if r.count == 1:
                hapax.add(r.lhs)
        rules = []
        for r in self.rules:
            if r.lhs in hapax and len(r.rhs) == 1 and r.rhs[0] in self._t:
                p = math.exp(r.logprob)
                scale = (emit_mass[r.lhs] - mass) / emit_mass[r.lhs]
                rules.append(Rule(r.lhs, r.rhs, r.count, math.log(p * scale)))
            else:
                rules.append(r)
        for lhs in sorted(hapax):
            rules.append(Rule(lhs, (UNK,), 0, math.log(mass)))
        terminals = tuple(sorted(set(self.terminals) | ({UNK} if hapax else set())))
        return Grammar(tuple(rules), self.nonterminals, terminals, self.lexicalized,
                       self.max_unary_chain)

    def dumps(self) -> str:
        lines = [f"{r.lhs} -> {' '.join(r.rhs)}\t{r.count}\t{r.logprob!r}" for r in self.rules]
        return "\n".join(lines) + ("\n" if lines else "")

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


def _label_sets(trees: Sequence[RawTree]) -> tuple[set[str], set[str]]:
    internal, leaves = set(), set()
    for t in trees:
        for node in t.subtrees():
            (leaves if node.is_leaf else internal).add(node.label)
    return internal, leaves


def induce(trees: Iterable[RawTree], max_unary_chain: int = DEFAULT_MAX_UNARY_CHAIN) -> Grammar:
    """Relative-frequency grammar from binarized trees."""
    trees = list(trees)
    if not trees:
        raise EmptyTreebank("cannot induce a grammar from zero trees")
    internal, leaves = _label_sets(trees)
    clash = internal & leaves
    if clash:
        raise LabelClash(f"symbols used both as leaf and as internal label: {sorted(clash)[:5]}")
    counts: Counter = Counter()
    for t in trees:
        for node in t.subtrees():
            if not node.is_leaf:
                counts[(node.label, tuple(c.label for c in node.children))] += 1
    totals: Counter = Counter()
    for (lhs, _), c in counts.items():
        totals[lhs] += c
    rules = tuple(Rule(lhs, rhs, c, math.log(c / totals[lhs])) for (lhs, rhs), c in counts.items())
    lexicalized = any("@" in lab for lab in internal)
    return Grammar(rules, tuple(sorted(internal)), tuple(sorted(leaves)), lexicalized,
                   max_unary_chain)


def unary_closure(grammar: Grammar, max_unary_chain: int = DEFAULT_MAX_UNARY_CHAIN
                  ) -> dict[str, list[ClosureEntry]]:
    """Best chain of 1..``max_unary_chain`` unary rules for each reachable pair.

    Keyed by the top label. Ties within ``TIE_EPS`` keep the shorter chain,
    then the lexicographically smaller one; chains from a label to itself are
    left out since the empty chain is never beaten.
    """
    if max_unary_chain < 1:
        raise ValueError("max_unary_chain must be >= 1")
    down: dict[str, list[Rule]] = {}
    for r in grammar.unary_rules():
        down.setdefault(r.lhs, []).append(r)
    table: dict[str, list[ClosureEntry]] = {}
    for top in sorted(down):
        best: dict[str, tuple[float, tuple[Rule, ...]]] = {}
        frontier = {top: (0.0, ())}
        for _ in range(max_unary_chain):
            nxt: dict[str, tuple[float, tuple[Rule, ...]]] = {}
            for label in sorted(frontier):
                lp, chain = frontier[label]
                for r in down.get(label, ()):
                    cand = (lp + r.logprob, chain + (r,))
                    cur = nxt.get(r.rhs[0])
                    if cur is None or _better_chain(cand, cur):
                        nxt[r.rhs[0]] = cand
            for label, cand in nxt.items():
                cur = best.get(label)
                if cur is None or cand[0] > cur[0] + TIE_EPS:
                    best[label] = cand
            frontier = nxt
            if not frontier:
                break
        entries = [ClosureEntry(top, b, lp, chain) for b, (lp, chain) in sorted(best.items())
                   if b != top]
        if entries:
            table[top] = entries
    return table


def _better_chain(a, b) -> bool:
    if a[0] > b[0] + TIE_EPS:
        return True
    if b[0] > a[0] + TIE_EPS:
        return False
    return [r.key for r in a[1]] < [r.key for r in b[1]]


def parse_grammar(text: str, max_unary_chain: int = DEFAULT_MAX_UNARY_CHAIN) -> Grammar:
    rules = []
    lhs_set, rhs_syms = set(), set()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3 or " -> " not in cols[0]:
            raise GrammarFormatError(f"line {lineno}: expected 'lhs -> rhs<TAB>count<TAB>logprob'")
        lhs, rhs = cols[0].split(" -> ", 1)
        rhs_t = tuple(rhs.split())
        if not 1 <= len(rhs_t) <= 2:
            raise GrammarFormatError(f"line {lineno}: rhs must have one or two symbols")
        try:
            rules.append(Rule(lhs.strip(), rhs_t, int(cols[1]), float(cols[2])))
        except ValueError as exc:
            raise GrammarFormatError(f"line {lineno}: {exc}") from exc
        lhs_set.add(lhs.strip())
        rhs_syms.update(rhs_t)
    terminals = rhs_syms - lhs_set
    lexicalized = any("@" in lab for lab in lhs_set)
    return Grammar(tuple(rules), tuple(sorted(lhs_set)), tuple(sorted(terminals)), lexicalized,
                   max_unary_chain)


def load_grammar(path: str | Path, max_unary_chain: int = DEFAULT_MAX_UNARY_CHAIN) -> Grammar:
    return parse_grammar(Path(path).read_text(encoding="utf-8"), max_unary_chain)
