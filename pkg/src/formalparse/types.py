"""Simple types with variables, substitutions and first-order unification."""
from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from typing import Mapping, Union

from .errors import Mismatch, OccursCheck, SignatureError
from .sexpr import RawTree, parse_sexpr

FUN = "fun"


@dataclass(frozen=True)
class TVar:
    name: str

    def __str__(self) -> str:
        return render_type(self, canonical=False)


@dataclass(frozen=True)
class TCon:
    name: str
    args: tuple[TypeExpr, ...] = ()

    def __str__(self) -> str:
        return render_type(self, canonical=False)


TypeExpr = Union[TVar, TCon]
Substitution = dict  # str -> TypeExpr


def fun(dom: TypeExpr, cod: TypeExpr) -> TCon:
    return TCon(FUN, (dom, cod))


def is_fun(t: TypeExpr) -> bool:
    return isinstance(t, TCon) and t.name == FUN and len(t.args) == 2


def ftv(t: TypeExpr) -> list[str]:
    """Type variables of ``t`` in leftmost-outermost first-occurrence order."""
    seen: dict[str, None] = {}
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, TVar):
            seen.setdefault(node.name)
        else:
            stack.extend(reversed(node.args))
    return list(seen)


def _canonical_names():
    for n in itertools.count():
        for c in string.ascii_lowercase:
            yield "?" + c + (str(n) if n else "")


def canonicalize(t: TypeExpr) -> TypeExpr:
    """Rename variables to ``?a, ?b, ...`` in first-occurrence order."""
    names = _canonical_names()
    ren = {v: TVar(next(names)) for v in ftv(t)}
    return rename(t, ren) if ren else t


def rename(t: TypeExpr, ren: Mapping[str, TypeExpr]) -> TypeExpr:
    """Single-pass substitution (images are not revisited)."""
    if isinstance(t, TVar):
        return ren.get(t.name, t)
    if not t.args:
        return t
    return TCon(t.name, tuple(rename(a, ren) for a in t.args))


def render_type(t: TypeExpr, canonical: bool = True) -> str:
    if canonical:
        t = canonicalize(t)
    if isinstance(t, TVar):
        return t.name
    if not t.args:
        return t.name
    return "(" + " ".join([t.name] + [render_type(a, False) for a in t.args]) + ")"


def types_equal(t1: TypeExpr, t2: TypeExpr) -> bool:
    return render_type(t1) == render_type(t2)


def type_of_tree(tree: RawTree) -> TypeExpr:
    if tree.is_leaf:
        if tree.label.startswith("?"):
            return TVar(tree.label)
        return TCon(tree.label)
    if tree.label.startswith("?"):
        raise SignatureError(f"type variable {tree.label!r} used as constructor")
    return TCon(tree.label, tuple(type_of_tree(c) for c in tree.children))


def parse_type(text: str) -> TypeExpr:
    """Read a type in prefix form, e.g. ``(fun real (fun ?a bool))``."""
    return type_of_tree(parse_sexpr(text))


# Grammar labels must be single tokens, so types are also written in a
# parenthesis-free prefix form joined by '_', e.g. fun_real_fun_real_real.
# Decoding needs constructor arities.

def type_label(t: TypeExpr) -> str:
    t = canonicalize(t)
    parts: list[str] = []
    stack = [t]
    while stack:
        node = stack.pop()
        parts.append(node.name)
        if isinstance(node, TCon):
            stack.extend(reversed(node.args))
    return "_".join(parts)


def parse_type_label(label: str, arities: Mapping[str, int]) -> TypeExpr:
    parts = label.split("_")
    pos = 0

    def read() -> TypeExpr:
        nonlocal pos
        if pos >= len(parts):
            raise SignatureError(f"truncated type label {label!r}")
        name = parts[pos]
        pos += 1
        if name.startswith("?"):
            return TVar(name)
        if name not in arities:
            raise SignatureError(f"unknown type constructor {name!r} in {label!r}")
        return TCon(name, tuple(read() for _ in range(arities[name])))

    t = read()
    if pos != len(parts):
        raise SignatureError(f"trailing parts in type label {label!r}")
    return t


def constructor_arities(t: TypeExpr, into: dict[str, int] | None = None) -> dict[str, int]:
    into = {} if into is None else into
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, TCon):
            known = into.setdefault(node.name, len(node.args))
            if known != len(node.args):
                raise SignatureError(
                    f"constructor {node.name!r} used with arities {known} and {len(node.args)}")
            stack.extend(node.args)
    return into


# substitutions

def apply_subst(s: Mapping[str, TypeExpr], t: TypeExpr) -> TypeExpr:
    """Apply ``s`` to ``t``, chasing bindings until no mapped variable remains."""
    if not s:
        return t
    if isinstance(t, TVar):
        bound = s.get(t.name)
        if bound is None:
            return t
        if bound == t:
            return t
        return apply_subst(s, bound)
    if not t.args:
        return t
    return TCon(t.name, tuple(apply_subst(s, a) for a in t.args))


def occurs(name: str, t: TypeExpr) -> bool:
    if isinstance(t, TVar):
        return t.name == name
    return any(occurs(name, a) for a in t.args)


def compose(s2: Mapping[str, TypeExpr], s1: Mapping[str, TypeExpr]) -> Substitution:
    """``s2 . s1``: apply s1 first, then s2."""
    out = {k: apply_subst(s2, v) for k, v in s1.items()}
    for k, v in s2.items():
        out.setdefault(k, v)
    return {k: v for k, v in out.items() if v != TVar(k)}


def normalize_subst(s: Mapping[str, TypeExpr]) -> Substitution:
    """Fully resolve images so the substitution is idempotent."""
    return {k: apply_subst(s, v) for k, v in s.items()}


def unify(t1: TypeExpr, t2: TypeExpr) -> Substitution:
    """Most general unifier of ``t1`` and ``t2`` as an idempotent substitution.

    Raises Mismatch on a constructor or arity clash and OccursCheck when a
    variable would have to contain itself.
    """
    s: dict[str, TypeExpr] = {}
    _unify_into(t1, t2, s)
    return normalize_subst(s)


def _unify_into(t1: TypeExpr, t2: TypeExpr, s: dict[str, TypeExpr]) -> None:
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a = apply_subst(s, a)
        b = apply_subst(s, b)
        if a == b:
            continue
        if isinstance(a, TVar):
            _bind(a.name, b, s)
        elif isinstance(b, TVar):
            _bind(b.name, a, s)
        elif a.name != b.name or len(a.args) != len(b.args):
            raise Mismatch(f"cannot unify {render_type(a, False)} with {render_type(b, False)}")
        else:
            stack.extend(reversed(list(zip(a.args, b.args))))


def _bind(name: str, t: TypeExpr, s: dict[str, TypeExpr]) -> None:
    if occurs(name, t):
        raise OccursCheck(f"{name} occurs in {render_type(t, False)}")
    s[name] = t


def unify_with(s: dict[str, TypeExpr], t1: TypeExpr, t2: TypeExpr) -> None:
    """Extend ``s`` in place so that it also unifies ``t1`` and ``t2``."""
    _unify_into(t1, t2, s)


@dataclass(frozen=True)
class TypeScheme:
    quantified: frozenset[str]
    body: TypeExpr

    @classmethod
    def close(cls, body: TypeExpr) -> TypeScheme:
        return cls(frozenset(ftv(body)), body)

    def instantiate(self, fresh) -> TypeExpr:
        if not self.quantified:
            return self.body
        ren = {v: fresh() for v in sorted(self.quantified)}
        return rename(self.body, ren)

    def __str__(self) -> str:
        return render_type(self.body)
