"""Reference implementations used to check the package.

Each oracle avoids the package's own algorithm for the property it checks:
type inference solves collected equations with union-find, coercion
repair enumerates every assignment, and parsing enumerates every derivation.
"""
from __future__ import annotations

import itertools
from collections import defaultdict

from formalparse.terms import Abs, App, Const, Var
from formalparse.types import TCon, TVar


# --- types -------------------------------------------------------------------

class UF:
    """Union-find over type nodes; a class may carry one constructor node."""

    def __init__(self):
        self.parent = {}
        self.struct = {}

    def node(self, key):
        self.parent.setdefault(key, key)
        return key

    def find(self, k):
        root = k
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[k] != root:
            self.parent[k], k = root, self.parent[k]
        return root


def solve(equations, shape):
    """Unify ``equations`` (pairs of node ids); ``shape[id]`` is ('var',) or ('con', name, kids).

    Returns a resolver mapping node id -> TypeExpr, or None when unsolvable.
    """
    uf = UF()
    for k in shape:
        uf.node(k)
        if shape[k][0] == "con":
            uf.struct[k] = shape[k]
    work = list(equations)
    while work:
        a, b = work.pop()
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        sa, sb = uf.struct.get(ra), uf.struct.get(rb)
        uf.parent[ra] = rb
        if sa and sb:
            if sa[1] != sb[1] or len(sa[2]) != len(sb[2]):
                return None
            work.extend(zip(sa[2], sb[2]))
        elif sa:
            uf.struct[rb] = sa
    # occurs check: the class graph must be acyclic
    state = {}

    def acyclic(r):
        if state.get(r) == 1:
            return False
        if state.get(r) == 2:
            return True
        state[r] = 1
        s = uf.struct.get(r)
        if s:
            for kid in s[2]:
                if not acyclic(uf.find(kid)):
                    return False
        state[r] = 2
        return True

    for k in shape:
        if not acyclic(uf.find(k)):
            return None

    def resolve(k):
        r = uf.find(k)
        s = uf.struct.get(r)
        if s is None:
            return TVar(f"u{r}")
        return TCon(s[1], tuple(resolve(c) for c in s[2]))

    return resolve


class _Builder:
    def __init__(self):
        self.shape = {}
        self.eqs = []
        self.n = 0

    def fresh(self):
        self.n += 1
        self.shape[self.n] = ("var",)
        return self.n

    def con(self, name, kids):
        self.n += 1
        self.shape[self.n] = ("con", name, tuple(kids))
        return self.n

    def embed(self, t, ren):
        if isinstance(t, TVar):
            if t.name not in ren:
                ren[t.name] = self.fresh()
            return ren[t.name]
        return self.con(t.name, [self.embed(a, ren) for a in t.args])


def oracle_type(term, sig, env=None, expected=None, overrides=None):
    """Principal type via constraint collection + union-find, or None if untypable.

    ``overrides`` maps a path to an extra wrapper type ``(dom, cod)`` applied to
    the subterm at that path (used by the brute-force repair oracle).
    """
    env = env or {}
    overrides = overrides or {}
    b = _Builder()
    env_nodes = {name: b.embed(t, {}) for name, t in env.items()}
    shared_vars = {}

    def leaf(name, is_const, bound):
        if name in bound:
            return bound[name]
        if is_const:
            if name not in sig.consts:
                raise KeyError(name)
            return b.embed(sig.consts[name].body, {})
        if name in env_nodes:
            return env_nodes[name]
        if name not in sig.vars:
            raise KeyError(name)
        if name not in shared_vars:
            shared_vars[name] = b.embed(sig.vars[name], {})
        return shared_vars[name]

    def wrap(node, path):
        if path in overrides:
            dom, cod = overrides[path]
            b.eqs.append((node, b.embed(dom, {})))
            return b.embed(cod, {})
        return node

    def go(t, path, bound):
        if isinstance(t, Const):
            node = leaf(t.name, True, bound)
        elif isinstance(t, Var):
            node = leaf(t.name, False, bound)
        elif isinstance(t, App):
            f = go(t.fun, path + ("f",), bound)
            a = go(t.arg, path + ("a",), bound)
            r = b.fresh()
            b.eqs.append((f, b.con("fun", [a, r])))
            node = r
        else:
            v = b.fresh()
            body = go(t.body, path + ("b",), {**bound, t.var: v})
            node = b.con("fun", [v, body])
        return wrap(node, path)

    root = go(term, (), {})
    if expected is not None:
        b.eqs.append((root, b.embed(expected, {})))
    res = solve(b.eqs, b.shape)
    if res is None:
        return None
    return res(root)


def oracle_unify(t1, t2):
    """Most general unifier as a dict var-name -> TypeExpr, or None."""
    b = _Builder()
    ren = {}
    n1, n2 = b.embed(t1, ren), b.embed(t2, ren)
    res = solve([(n1, n2)], b.shape)
    if res is None:
        return None
    back = {f"u{v}": name for name, v in ren.items()}

    def rename(t):
        if isinstance(t, TVar):
            return TVar(back.get(t.name, t.name))
        return TCon(t.name, tuple(rename(a) for a in t.args))

    out = {}
    for name, node in ren.items():
        img = rename(res(node))
        if img != TVar(name):
            out[name] = img
    return out


# --- coercion repair ---------------------------------------------------------

def app_paths(term, path=()):
    if isinstance(term, App):
        yield path
        yield from app_paths(term.fun, path + ("f",))
        yield from app_paths(term.arg, path + ("a",))
    elif isinstance(term, Abs):
        yield from app_paths(term.body, path + ("b",))


def brute_repairs(term, sig, expected=None, env=None):
    """All minimal-size insertion assignments that type-check.

    An assignment maps each application path to None, ('arg', c) or ('fun', c);
    with ``expected`` a root coercion may be added. Returns (size, list of
    (assignment, root)) or (None, []) when nothing repairs the term.
    """
    coercions = sig.coercion_table
    paths = list(app_paths(term))
    choices = [None] + [("arg", i) for i in range(len(coercions))] + \
        [("fun", i) for i in range(len(coercions))]
    roots = [None] + (list(range(len(coercions))) if expected is not None else [])
    best, found = None, []
    for combo in itertools.product(choices, repeat=len(paths)):
        for root in roots:
            size = sum(c is not None for c in combo) + (root is not None)
            if best is not None and size > best:
                continue
            overrides = {}
            for p, c in zip(paths, combo):
                if c is None:
                    continue
                co = coercions[c[1]]
                overrides[p + (("a",) if c[0] == "arg" else ("f",))] = (co.dom, co.cod)
            if root is not None:
                co = coercions[root]
                overrides[()] = (co.dom, co.cod)
            try:
                ok = oracle_type(term, sig, env, expected, overrides) is not None
            except KeyError:
                return None, []
            if ok:
                if best is None or size < best:
                    best, found = size, []
                found.append((dict(zip(paths, combo)), root))
    return best, found


def oracle_repair(term, sig, expected=None, env=None):
    """('ok', term) | ('ambiguous', n_edge_sets) | ('none', None) by exhaustive search."""
    size, found = brute_repairs(term, sig, expected, env)
    if size is None:
        return "none", None
    if size == 0:
        return "ok", term
    groups = defaultdict(list)
    for assign, root in found:
        edges = frozenset(p for p, c in assign.items() if c is not None)
        groups[(edges, root is not None)].append((assign, root))
    if len(groups) > 1:
        return "ambiguous", len(groups)
    (cands,) = groups.values()

    def pref(item):
        # argument side before function side, then declaration order, walking
        # edges by path; the root coercion sorts with the root edge
        assign, root = item
        keys = [(p, 0 if c[0] == "arg" else 1, c[1]) for p, c in assign.items() if c is not None]
        if root is not None:
            keys.append(((), 0, root))
        return tuple(sorted(keys, key=lambda k: k[0]))

    assign, root = min(cands, key=pref)
    names = sig.coercions

    def build(t, path):
        if isinstance(t, App):
            f, a = build(t.fun, path + ("f",)), build(t.arg, path + ("a",))
            c = assign.get(path)
            if c is not None:
                if c[0] == "arg":
                    a = App(Const(names[c[1]]), a)
                else:
                    f = App(Const(names[c[1]]), f)
            return App(f, a)
        if isinstance(t, Abs):
            return Abs(t.var, build(t.body, path + ("b",)))
        return t

    out = build(term, ())
    if root is not None:
        out = App(Const(names[root]), out)
    return "ok", out


# --- parsing -----------------------------------------------------------------

def enumerate_parses(rules, tokens, cap):
    """Every derivation as (tree, logprob); unary chains of length <= cap on each node.

    ``rules`` is a list of (lhs, rhs tuple, logprob). Trees are nested tuples
    ``(label, children...)`` with terminal strings at the leaves.
    """
    lexical = defaultdict(list)
    binary = []
    unary_up = defaultdict(list)  # child -> [(parent, lp)]
    terminals = set()
    nts = {r[0] for r in rules}
    for lhs, rhs, lp in rules:
        if len(rhs) == 2:
            binary.append((lhs, rhs, lp))
        elif rhs[0] in nts:
            unary_up[rhs[0]].append((lhs, lp))
        else:
            lexical[rhs[0]].append((lhs, lp))
            terminals.add(rhs[0])

    def chains(item):
        out = [item]
        frontier = [item]
        for _ in range(cap):
            nxt = []
            for tree, lp in frontier:
                for parent, ulp in unary_up.get(tree[0], ()):
                    nxt.append(((parent, tree), lp + ulp))
            out.extend(nxt)
            frontier = nxt
        return out

    memo = {}

    def span(i, j):
        if (i, j) in memo:
            return memo[(i, j)]
        base = []
        if j - i == 1:
            for lhs, lp in lexical.get(tokens[i], ()):
                base.append(((lhs, tokens[i]), lp))
        else:
            for k in range(i + 1, j):
                left, right = span(i, k), span(k, j)
                for lhs, (b1, b2), lp in binary:
                    for lt, llp in left:
                        if lt[0] != b1:
                            continue
                        for rt, rlp in right:
                            if rt[0] == b2:
                                base.append(((lhs, lt, rt), lp + llp + rlp))
        out = []
        for item in base:
            out.extend(chains(item))
        memo[(i, j)] = out
        return out

    return span(0, len(tokens))


def tuple_of_tree(tree):
    if tree.is_leaf:
        return tree.label
    return (tree.label,) + tuple(tuple_of_tree(c) for c in tree.children)


def count_parses(rules, tokens, cap):
    """Number of derivations ``enumerate_parses`` would return, by a counting DP."""
    nts = {r[0] for r in rules}
    unary_up = defaultdict(list)
    lexical = defaultdict(list)
    binary = []
    for lhs, rhs, _ in rules:
        if len(rhs) == 2:
            binary.append((lhs, rhs))
        elif rhs[0] in nts:
            unary_up[rhs[0]].append(lhs)
        else:
            lexical[rhs[0]].append(lhs)
    n = len(tokens)
    table = {}
    for length in range(1, n + 1):
        for i in range(n - length + 1):
            j = i + length
            base = defaultdict(int)
            if length == 1:
                for lhs in lexical.get(tokens[i], ()):
                    base[lhs] += 1
            else:
                for k in range(i + 1, j):
                    left, right = table[(i, k)], table[(k, j)]
                    for lhs, (b1, b2) in binary:
                        base[lhs] += left.get(b1, 0) * right.get(b2, 0)
            total = defaultdict(int, base)
            frontier = dict(base)
            for _ in range(cap):
                nxt = defaultdict(int)
                for lab, c in frontier.items():
                    for parent in unary_up.get(lab, ()):
                        nxt[parent] += c
                for lab, c in nxt.items():
                    total[lab] += c
                frontier = nxt
            table[(i, j)] = total
    return sum(table[(0, n)].values())
