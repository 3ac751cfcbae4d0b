"""Application-tree terms: constants, variables, application, abstraction."""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import FormalParseError
from .sexpr import RawTree, parse_sexpr

LAMBDA = "lambda"
_BAD_NAME = re.compile(r"[\s()]")


def _check_name(name: str) -> None:
    if not name or _BAD_NAME.search(name):
        raise FormalParseError(f"invalid symbol name {name!r}")


@dataclass(frozen=True)
class Const:
    name: str

    def __post_init__(self):
        _check_name(self.name)

    def __str__(self) -> str:
        return render_term(self)


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        _check_name(self.name)

    def __str__(self) -> str:
        return render_term(self)


@dataclass(frozen=True)
class App:
    fun: Term
    arg: Term

    def __str__(self) -> str:
        return render_term(self)


@dataclass(frozen=True)
class Abs:
    var: str
    body: Term

    def __post_init__(self):
        _check_name(self.var)

    def __str__(self) -> str:
        return render_term(self)


Term = Union[Const, Var, App, Abs]


def app(f: Term, *args: Term) -> Term:
    for a in args:
        f = App(f, a)
    return f


def leaves(term: Term) -> list[str]:
    """Surface token sequence: prefix order, binders included."""
    out: list[str] = []
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, (Const, Var)):
            out.append(t.name)
        elif isinstance(t, App):
            stack.append(t.arg)
            stack.append(t.fun)
        else:
            out.append(t.var)
            stack.append(t.body)
    return out


def spine(term: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(term, App):
        args.append(term.arg)
        term = term.fun
    return term, args[::-1]


def head_symbol(term: Term) -> str:
    """Name at the head of the function spine (looks through binders)."""
    while True:
        term, _ = spine(term)
        if isinstance(term, Abs):
            term = term.body
            continue
        return term.name


def alpha_equal(t1: Term, t2: Term) -> bool:
    """Equality up to consistent renaming of bound variables."""

    def go(a: Term, b: Term, env_a: dict, env_b: dict, depth: int) -> bool:
        if isinstance(a, App) and isinstance(b, App):
            return go(a.fun, b.fun, env_a, env_b, depth) and go(a.arg, b.arg, env_a, env_b, depth)
        if isinstance(a, Abs) and isinstance(b, Abs):
            return go(a.body, b.body, {**env_a, a.var: depth}, {**env_b, b.var: depth}, depth + 1)
        if isinstance(a, Var) and isinstance(b, Var):
            ia, ib = env_a.get(a.name), env_b.get(b.name)
            if ia is None and ib is None:
                return a.name == b.name
            return ia == ib
        if isinstance(a, Const) and isinstance(b, Const):
            return a.name == b.name
        return False

    return go(t1, t2, {}, {}, 0)


def erase_casts(term: Term, casts: Iterable[str], stats: Counter | None = None) -> Term:
    """Drop every ``App(Const c, t)`` with ``c`` in ``casts``, keeping ``t``.

    A cast constant outside function position is kept and counted under
    ``stats['bare_cast']``.
    """
    casts = frozenset(casts)
    if not casts:
        return term

    def go(t: Term) -> Term:
        if isinstance(t, App):
            if isinstance(t.fun, Const) and t.fun.name in casts:
                return go(t.arg)
            f = go(t.fun)
            if isinstance(f, Const) and f.name in casts:
                # erasing exposed a cast in function position
                return go(t.arg)
            a = go(t.arg)
            return t if (f is t.fun and a is t.arg) else App(f, a)
        if isinstance(t, Abs):
            b = go(t.body)
            return t if b is t.body else Abs(t.var, b)
        if isinstance(t, Const) and t.name in casts and stats is not None:
            stats["bare_cast"] += 1
        return t

    return go(term)


def term_of_sexpr(tree: RawTree, consts: Iterable[str] = (), bound: frozenset = frozenset()) -> Term:
    consts = consts if isinstance(consts, (set, frozenset, dict)) else set(consts)
    if tree.is_leaf:
        name = tree.label
        if name in bound or name not in consts:
            return Var(name)
        return Const(name)
    if tree.label == LAMBDA:
        if len(tree.children) != 2 or not tree.children[0].is_leaf:
            raise FormalParseError(f"malformed abstraction {tree}")
        v = tree.children[0].label
        return Abs(v, term_of_sexpr(tree.children[1], consts, bound | {v}))
    parts = [RawTree(tree.label)] + list(tree.children)
    return app(*[term_of_sexpr(p, consts, bound) for p in parts])


def parse_term(text: str, consts: Iterable[str] = ()) -> Term:
    """Read ``(f a b)`` as curried application, ``(lambda v body)`` as abstraction.

    Atoms naming one of ``consts`` become constants, everything else a variable.
    The function position of a list must be an atom; write ``((f a) b)`` as
    ``(f a b)``.
    """
    text = text.strip()
    if text.startswith("(("):
        raise FormalParseError("function position must be a symbol")
    return term_of_sexpr(parse_sexpr(text), consts)


def render_term(term: Term) -> str:
    if isinstance(term, (Const, Var)):
        return term.name
    if isinstance(term, Abs):
        return f"({LAMBDA} {term.var} {render_term(term.body)})"
    head, args = spine(term)
    if isinstance(head, Abs):
        raise FormalParseError("beta-redexes have no bracketed rendering")
    return "(" + " ".join([head.name] + [render_term(a) for a in args]) + ")"
