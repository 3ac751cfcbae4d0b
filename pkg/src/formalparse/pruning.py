"""Type-driven pruning of chart candidates and term recovery from parse trees."""
from __future__ import annotations

import itertools
from typing import Mapping

from .chart import PruningHook
from .errors import FormalParseError
from .infer import _Fresh, insert_coercions
from .sexpr import RawTree
from .signature import Signature
from .terms import Abs, App, Term, Var
from .treebank import BIND, label_type, term_of_labeled_tree
from .types import TVar, TypeExpr, unify


def invert_merge(merge_map: Mapping[str, str] | None) -> dict[str, list[str]]:
    inv: dict[str, list[str]] = {}
    for src, dst in (merge_map or {}).items():
        inv.setdefault(dst, []).append(src)
    for v in inv.values():
        v.sort()
    return inv


def _symbol_type(name: str, sig: Signature, fresh) -> TypeExpr | None:
    if name in sig.consts:
        return sig.consts[name].instantiate(fresh)
    return sig.vars.get(name)


def _fits(t: TypeExpr | None, target: TypeExpr, sig: Signature, fresh) -> int:
    """0 if ``t`` unifies with ``target``, 1 if one coercion bridges them, 2 otherwise."""
    if t is None:
        return 2
    try:
        unify(t, target)
        return 0
    except FormalParseError:
        pass
    for c in sig.coercion_table:
        try:
            unify(t, c.dom)
            unify(c.cod, target)
            return 1
        except FormalParseError:
            continue
    return 2


def unmerge_tree(tree: RawTree, sig: Signature, inverse: Mapping[str, list[str]]) -> RawTree:
    """Replace merged surface tokens by the original symbol the label fits best.

    A token with several preimages takes the first (sorted) one whose type
    unifies with its preterminal label, else the first one a single coercion
    can bridge, else the first one.
    """
    if not inverse:
        return tree
    fresh = _Fresh("_u")

    def go(node: RawTree) -> RawTree:
        if node.is_leaf:
            return node
        if node.is_preterminal and node.label != BIND:
            tok = node.children[0].label
            pre = inverse.get(tok)
            if not pre:
                return node
            try:
                target = label_type(node.label, sig)
            except FormalParseError:
                return RawTree(node.label, (RawTree(pre[0]),))
            best = min(pre, key=lambda p: (_fits(_symbol_type(p, sig, fresh), target, sig, fresh),
                                           pre.index(p)))
            return RawTree(node.label, (RawTree(best),))
        return RawTree(node.label, tuple(go(c) for c in node.children))

    return go(tree)


def reconstruct(tree: RawTree, sig: Signature, inverse: Mapping[str, list[str]] | None = None
                ) -> tuple[Term, dict[str, TypeExpr]]:
    """Term encoded by a predicted tree, plus types for its undeclared free variables.

    Undeclared names (for instance a bound variable seen outside its binder)
    become free variables with fresh monomorphic types.
    """
    term = term_of_labeled_tree(unmerge_tree(tree, sig, inverse or {}), sig, free_ok=True)
    env: dict[str, TypeExpr] = {}
    counter = itertools.count()
    for name in _free_vars(term):
        if name not in sig.vars and name not in env:
            env[name] = TVar(f"_free{next(counter)}")
    return term, env


def _free_vars(term: Term) -> list[str]:
    out: list[str] = []

    def go(t: Term, bound: frozenset):
        if isinstance(t, Var):
            if t.name not in bound:
                out.append(t.name)
        elif isinstance(t, App):
            go(t.fun, bound)
            go(t.arg, bound)
        elif isinstance(t, Abs):
            go(t.body, bound | {t.var})

    go(term, frozenset())
    return out


def repair_tree(tree: RawTree, sig: Signature, inverse: Mapping[str, list[str]] | None = None
                ) -> Term:
    """Reconstruct and coercion-repair a predicted tree against its root label."""
    term, env = reconstruct(tree, sig, inverse)
    expected = label_type(tree.label, sig)
    return insert_coercions(term, sig, expected=expected, env=env)


class TypedPruningHook(PruningHook):
    """Accepts a constituent iff its term can be repaired to the label's type."""

    def __init__(self, sig: Signature, merge_map: Mapping[str, str] | None = None):
        super().__init__()
        self.sig = sig
        self.inverse = invert_merge(merge_map)

    def accept(self, tree: RawTree, span) -> bool:
        if tree.label == BIND:
            return True
        try:
            repair_tree(tree, self.sig, self.inverse)
        except FormalParseError:
            return False
        return True


def typed_pruning_hook(sig: Signature, merge_map: Mapping[str, str] | None = None) -> TypedPruningHook:
    return TypedPruningHook(sig, merge_map)
