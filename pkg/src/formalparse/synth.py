"""Seeded synthetic signatures and typed treebanks for scale tests."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .signature import Signature
from .terms import App, Const, Term, Var, leaves
from .treebank import TreebankEntry, label_with_types
from .types import TCon, TypeExpr, fun


@dataclass
class SynthWorld:
    sig: Signature
    cast_set: frozenset
    merge_map: dict[str, str]
    base: tuple[TypeExpr, ...]


def make_world(n_types: int = 4, n_unary: int = 10, n_binary: int = 10, n_leaves: int = 3,
               seed: int = 0) -> SynthWorld:
    """Signature over base types ``b0..``, with casts ``k_i : b_i -> b_{i+1}``.

    Binary functions sharing an argument/result profile across two types are
    merged pairwise into one surface token ``op<j>``.
    """
    rng = random.Random(seed)
    base = tuple(TCon(f"b{i}") for i in range(n_types))
    consts: dict[str, TypeExpr] = {}
    vars_: dict[str, TypeExpr] = {}
    for i, b in enumerate(base):
        for j in range(n_leaves):
            consts[f"c{i}_{j}"] = b
        vars_[f"v{i}"] = b
    for i in range(n_unary):
        consts[f"f{i}"] = fun(base[i % n_types], base[rng.randrange(n_types)])
    for i in range(n_binary):
        a, c = base[rng.randrange(n_types)], base[i % n_types]
        consts[f"g{i}"] = fun(a, fun(a, c))
    casts = []
    for i in range(n_types - 1):
        consts[f"k{i}"] = fun(base[i], base[i + 1])
        casts.append(f"k{i}")
    sig = Signature.build(consts, vars_, casts)
    merge = {}
    for i in range(0, n_binary - 1, 2):
        merge[f"g{i}"] = f"op{i // 2}"
        merge[f"g{i + 1}"] = f"op{i // 2}"
    return SynthWorld(sig, frozenset(casts), merge, base)


def random_term(world: SynthWorld, rng: random.Random, target: TypeExpr, size: int,
                cast_rate: float = 0.15) -> Term:
    """A well-typed term of type ``target`` with ``size`` leaf tokens (casts included)."""
    sig = world.sig
    by_result: dict[TypeExpr, list[tuple[str, list[TypeExpr]]]] = {}
    for name, scheme in sig.consts.items():
        t = scheme.body
        args = []
        while isinstance(t, TCon) and t.name == "fun":
            args.append(t.args[0])
            t = t.args[1]
        by_result.setdefault(t, []).append((name, args))

    def leaf(ty: TypeExpr) -> Term:
        opts = [Const(n) for n, a in by_result.get(ty, []) if not a]
        opts += [Var(v) for v, t in sorted(sig.vars.items()) if t == ty]
        return rng.choice(opts)

    def gen(ty: TypeExpr, n: int) -> Term:
        if n <= 1:
            return leaf(ty)
        funcs = by_result.get(ty, [])
        casts = [(f, a) for f, a in funcs if f in world.cast_set]
        plain = [(f, a) for f, a in funcs if f not in world.cast_set and 1 <= len(a) <= n - 1]
        if casts and (rng.random() < cast_rate or not plain):
            f, (a,) = rng.choice(casts)
            return App(Const(f), gen(a, n - 1))
        if not plain:
            return leaf(ty)
        f, args = rng.choice(plain)
        rest = n - 1
        if len(args) == 1:
            return App(Const(f), gen(args[0], rest))
        cut = rng.randint(1, rest - 1) if rest >= 2 else 1
        return App(App(Const(f), gen(args[0], cut)), gen(args[1], max(1, rest - cut)))

    return gen(target, size)


def synthetic_treebank(world: SynthWorld, n_entries: int = 500, min_size: int = 3,
                       max_size: int = 12, seed: int = 0, cast_rate: float = 0.15
                       ) -> list[TreebankEntry]:
    rng = random.Random(seed)
    out = []
    for i in range(n_entries):
        target = rng.choice(world.base)
        term = random_term(world, rng, target, rng.randint(min_size, max_size), cast_rate)
        tree = label_with_types(term, world.sig)
        out.append(TreebankEntry(f"s{i:04d}", tuple(leaves(term)), tree, term))
    return out
