"""Principal-type inference and minimal coercion insertion."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import AmbiguousRepair, NoRepair, TermTypeError, UnificationError, UnknownSymbol
from .signature import Signature
from .terms import Abs, App, Const, Term, Var
from .types import (
    TCon,
    TVar,
    TypeExpr,
    apply_subst,
    canonicalize,
    fun,
    ftv,
    is_fun,
    rename,
    render_type,
    unify_with,
)


class _Fresh:
    def __init__(self, prefix: str = "_t"):
        self._prefix = prefix
        self._n = itertools.count()

    def __call__(self) -> TVar:
        return TVar(f"{self._prefix}{next(self._n)}")


def _lookup(name: str, is_const: bool, sig: Signature, bound: Mapping[str, TypeExpr],
            env: Mapping[str, TypeExpr], fresh: _Fresh) -> TypeExpr:
    if not is_const:
        if name in bound:
            return bound[name]
        if name in env:
            return env[name]
        if name in sig.vars:
            return sig.vars[name]
        raise UnknownSymbol(f"undeclared variable {name!r}")
    if name in bound:
        return bound[name]
    scheme = sig.consts.get(name)
    if scheme is None:
        raise UnknownSymbol(f"undeclared constant {name!r}")
    return scheme.instantiate(fresh)


def _freshen(t: TypeExpr, fresh: _Fresh) -> TypeExpr:
    names = ftv(t)
    return rename(t, {v: fresh() for v in names}) if names else t


def _apply_rule(s: dict, tf: TypeExpr, ta: TypeExpr, fresh: _Fresh) -> TypeExpr:
    tf_now = apply_subst(s, tf)
    if isinstance(tf_now, TCon) and not is_fun(tf_now):
        raise TermTypeError(f"applying a value of non-function type {render_type(tf_now)}")
    r = fresh()
    try:
        unify_with(s, tf, fun(ta, r))
    except UnificationError as exc:
        raise TermTypeError(
            f"argument of type {render_type(apply_subst(s, ta))} does not fit "
            f"function of type {render_type(tf_now)}") from exc
    return r


def infer(term: Term, sig: Signature, env: Mapping[str, TypeExpr] | None = None,
          expected: TypeExpr | None = None) -> TypeExpr:
    """Principal type of ``term`` in canonical form.

    ``env`` declares additional monomorphic free variables. When
    ``expected`` is given the result is additionally unified with it
    (its variables are taken as fresh).
    """
    env = env or {}
    fresh = _Fresh()
    s: dict[str, TypeExpr] = {}

    def w(t: Term, bound: Mapping[str, TypeExpr]) -> TypeExpr:
        if isinstance(t, Const):
            return _lookup(t.name, True, sig, bound, env, fresh)
        if isinstance(t, Var):
            return _lookup(t.name, False, sig, bound, env, fresh)
        if isinstance(t, App):
            tf = w(t.fun, bound)
            ta = w(t.arg, bound)
            return _apply_rule(s, tf, ta, fresh)
        a = fresh()
        tb = w(t.body, {**bound, t.var: a})
        return fun(a, tb)

    ty = w(term, {})
    if expected is not None:
        try:
            unify_with(s, ty, _freshen(expected, fresh))
        except UnificationError as exc:
            raise TermTypeError(
                f"type {render_type(apply_subst(s, ty))} does not match "
                f"expected {render_type(expected)}") from exc
    return canonicalize(apply_subst(s, ty))


def infer_annotated(term: Term, sig: Signature, env: Mapping[str, TypeExpr] | None = None
                    ) -> dict[tuple[str, ...], TypeExpr]:
    """Type of every subterm within the principal typing of ``term``.

    Keys are paths of 'f'/'a'/'b' steps; values are fully resolved but not
    canonicalized, so shared variables stay shared across entries.
    """
    env = env or {}
    fresh = _Fresh()
    s: dict[str, TypeExpr] = {}
    seen: dict[tuple[str, ...], TypeExpr] = {}

    def w(t: Term, path, bound) -> TypeExpr:
        if isinstance(t, Const):
            ty = _lookup(t.name, True, sig, bound, env, fresh)
        elif isinstance(t, Var):
            ty = _lookup(t.name, False, sig, bound, env, fresh)
        elif isinstance(t, App):
            tf = w(t.fun, path + ("f",), bound)
            ta = w(t.arg, path + ("a",), bound)
            ty = _apply_rule(s, tf, ta, fresh)
        else:
            a = fresh()
            ty = fun(a, w(t.body, path + ("b",), {**bound, t.var: a}))
        seen[path] = ty
        return ty

    w(term, (), {})
    return {p: apply_subst(s, ty) for p, ty in seen.items()}


def typechecks(term: Term, sig: Signature, env=None, expected=None) -> bool:
    try:
        infer(term, sig, env, expected)
    except (TermTypeError, UnknownSymbol):
        return False
    return True


# --- coercion repair -------------------------------------------------------

ARG, FUN_SIDE, ROOT = "arg", "fun", "root"
_SIDE_RANK = {ROOT: 0, ARG: 0, FUN_SIDE: 1}


@dataclass(frozen=True)
class Insertion:
    path: tuple[str, ...]   # 'f' / 'a' / 'b' steps from the root to an App node
    side: str
    coercion: int           # index into the signature's coercion list


def _extend(s: dict, *pairs) -> dict | None:
    s = dict(s)
    try:
        for a, b in pairs:
            unify_with(s, a, b)
    except UnificationError:
        return None
    return s


def _search(term: Term, sig: Signature, env, expected, budget: int, fresh: _Fresh
            ) -> Iterator[tuple[int, tuple[Insertion, ...]]]:
    """Yield every insertion set of size exactly ``budget`` that type-checks.

    Depth-first over application nodes in inference order with a shared
    substitution; a branch is cut as soon as its constraints are unsatisfiable.
    """
    coercions = sig.coercion_table

    def go(t: Term, path, bound, s, left):
        # yields (type, substitution, insertions, used)
        if isinstance(t, (Const, Var)):
            yield _lookup(t.name, isinstance(t, Const), sig, bound, env, fresh), s, (), 0
            return
        if isinstance(t, Abs):
            a = fresh()
            for tb, s1, ins, used in go(t.body, path + ("b",), {**bound, t.var: a}, s, left):
                yield fun(a, tb), s1, ins, used
            return
        for tf, s1, ins1, u1 in go(t.fun, path + ("f",), bound, s, left):
            for ta, s2, ins2, u2 in go(t.arg, path + ("a",), bound, s1, left - u1):
                ins = ins1 + ins2
                used = u1 + u2
                r = fresh()
                s3 = _extend(s2, (tf, fun(ta, r)))
                if s3 is not None:
                    yield r, s3, ins, used
                if used >= left:
                    continue
                for ci, c in enumerate(coercions):
                    s3 = _extend(s2, (ta, c.dom), (tf, fun(c.cod, r)))
                    if s3 is not None:
                        yield r, s3, ins + (Insertion(path, ARG, ci),), used + 1
                for ci, c in enumerate(coercions):
                    s3 = _extend(s2, (tf, c.dom), (c.cod, fun(ta, r)))
                    if s3 is not None:
                        yield r, s3, ins + (Insertion(path, FUN_SIDE, ci),), used + 1

    for ty, s, ins, used in go(term, (), {}, {}, budget):
        if expected is None:
            if used == budget:
                yield used, ins
            continue
        exp = _freshen(expected, fresh)
        if used == budget and _extend(s, (ty, exp)) is not None:
            yield used, ins
        if used + 1 == budget:
            for ci, c in enumerate(coercions):
                if _extend(s, (ty, c.dom), (c.cod, exp)) is not None:
                    yield used + 1, ins + (Insertion((), ROOT, ci),)


def count_positions(term: Term) -> int:
    if isinstance(term, App):
        return 1 + count_positions(term.fun) + count_positions(term.arg)
    if isinstance(term, Abs):
        return count_positions(term.body)
    return 0


def apply_insertions(term: Term, insertions, sig: Signature) -> Term:
    names = sig.coercions
    by_path = {ins.path: ins for ins in insertions if ins.side != ROOT}
    root = [ins for ins in insertions if ins.side == ROOT]

    def go(t: Term, path) -> Term:
        if isinstance(t, App):
            f = go(t.fun, path + ("f",))
            a = go(t.arg, path + ("a",))
            ins = by_path.get(path)
            if ins is not None:
                c = Const(names[ins.coercion])
                if ins.side == ARG:
                    a = App(c, a)
                else:
                    f = App(c, f)
            return App(f, a)
        if isinstance(t, Abs):
            return Abs(t.var, go(t.body, path + ("b",)))
        return t

    out = go(term, ())
    for ins in root:
        out = App(Const(names[ins.coercion]), out)
    return out


def _preference(ins: tuple[Insertion, ...]):
    return tuple((i.path, _SIDE_RANK[i.side], i.coercion) for i in sorted(ins, key=lambda i: i.path))


def insert_coercions(term: Term, sig: Signature, expected: TypeExpr | None = None,
                     env: Mapping[str, TypeExpr] | None = None) -> Term:
    """Smallest coercion insertion that makes ``term`` type-check.

    At most one coercion goes on each application edge, either around the
    argument or around the function; with ``expected`` the root may receive
    one more so the result's type unifies with it. Candidates of minimal size
    that touch the same edges are ranked argument-side first, then by
    coercion declaration order; minimal candidates on different edges raise
    AmbiguousRepair. A term that already type-checks is returned as is.
    """
    env = env or {}
    # unknown names surface before any search
    infer_error = None
    try:
        infer(term, sig, env, expected)
        return term
    except TermTypeError as exc:
        infer_error = exc
    if not sig.coercions:
        raise NoRepair(f"no coercions declared: {infer_error}")
    fresh = _Fresh("_r")
    max_budget = count_positions(term) + (expected is not None)
    for budget in range(1, max_budget + 1):
        found = {}
        for _, ins in _search(term, sig, env, expected, budget, fresh):
            key = tuple(sorted(ins, key=lambda i: (i.path, i.side, i.coercion)))
            found.setdefault(key, None)
        if not found:
            continue
        by_edges: dict[frozenset, list] = {}
        for ins in found:
            edges = frozenset((i.path, i.side == ROOT) for i in ins)
            by_edges.setdefault(edges, []).append(ins)
        if len(by_edges) > 1:
            cands = [apply_insertions(term, min(group, key=_preference), sig)
                     for _, group in sorted(by_edges.items(), key=lambda kv: sorted(kv[0]))]
            raise AmbiguousRepair(
                f"{len(cands)} minimal repairs with {budget} insertion(s)", cands)
        (group,) = by_edges.values()
        return apply_insertions(term, min(group, key=_preference), sig)
    raise NoRepair(f"no coercion assignment repairs the term: {infer_error}")
