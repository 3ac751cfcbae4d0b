import itertools
import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formalparse.errors import EmptyTreebank, LabelClash, MalformedIntermediate
from formalparse.pcfg import (
    Rule,
    Grammar,
    binarize_tree,
    debinarize_tree,
    induce,
    parse_grammar,
    unary_closure,
)
from formalparse.sexpr import RawTree, parse_sexpr, render_sexpr, tree_yield

P = parse_sexpr


def rule_prob(g, lhs, rhs):
    return math.exp(g.rules[g.rule_index[(lhs, tuple(rhs))]].logprob)


def test_binarize_examples():
    assert render_sexpr(binarize_tree(P("(A a b c)"))) == "(A a (A|b.c b c))"
    assert binarize_tree(P("(A a b)")) == P("(A a b)")
    assert render_sexpr(binarize_tree(P("(A a b c d)"))) == "(A a (A|b.c.d b (A|c.d c d)))"


def test_debinarize_examples():
    assert debinarize_tree(P("(A a (A|b.c b c))")) == P("(A a b c)")
    assert debinarize_tree(P("(A (B x) y)")) == P("(A (B x) y)")
    with pytest.raises(MalformedIntermediate):
        debinarize_tree(P("(X (A|b.c a b))"))
    with pytest.raises(MalformedIntermediate):
        debinarize_tree(P("(A|b.c a b)"))


leaf_label = st.sampled_from(["a", "b", "c", "d"])
node_label = st.sampled_from(["S", "NP", "VP", "X"])


def random_tree(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return RawTree(rng.choice("abcd"))
    n = rng.randint(1, 5)
    return RawTree(rng.choice(["S", "NP", "VP", "X"]), tuple(random_tree(rng, depth - 1) for _ in range(n)))


def test_binarize_round_trip_random():
    rng = random.Random(0)
    for _ in range(2000):
        t = random_tree(rng, 5)
        b = binarize_tree(t)
        assert all(len(n.children) <= 2 for n in b.subtrees())
        assert tree_yield(b) == tree_yield(t)
        assert debinarize_tree(b) == t


@settings(max_examples=200, deadline=None)
@given(st.recursive(leaf_label.map(RawTree),
                    lambda kids: st.builds(lambda l, cs: RawTree(l, tuple(cs)), node_label,
                                           st.lists(kids, min_size=1, max_size=5)),
                    max_leaves=25))
def test_binarize_round_trip_hypothesis(t):
    assert debinarize_tree(binarize_tree(t)) == t


def test_induce_examples():
    g = induce([P("(S a b)"), P("(S a b)"), P("(S c)")])
    assert rule_prob(g, "S", ["a", "b"]) == pytest.approx(2 / 3, abs=1e-12)
    assert rule_prob(g, "S", ["c"]) == pytest.approx(1 / 3, abs=1e-12)
    assert rule_prob(induce([P("(S a)")]), "S", ["a"]) == 1.0
    with pytest.raises(LabelClash):
        induce([P("(S a b)"), P("(a x)")])
    with pytest.raises(EmptyTreebank):
        induce([])


def test_alphabets_disjoint_and_normalized():
    rng = random.Random(1)
    for _ in range(50):
        trees = [binarize_tree(random_tree(rng, 4)) for _ in range(rng.randint(1, 8))]
        trees = [t for t in trees if not t.is_leaf]
        if not trees:
            continue
        g = induce(trees)
        assert not set(g.nonterminals) & set(g.terminals)
        mass = Counter()
        for r in g.rules:
            mass[r.lhs] += math.exp(r.logprob)
        assert all(abs(v - 1) <= 1e-9 for v in mass.values())


def _count_rules(trees):
    # independent counting pass
    c = Counter()

    def walk(n):
        if n.children:
            c[(n.label, tuple(k.label for k in n.children))] += 1
            for k in n.children:
                walk(k)

    for t in trees:
        walk(t)
    return c


def test_tree_probability_consistency(data_dir):
    from formalparse.signature import load_signature
    from formalparse.treebank import load_treebank
    sig = load_signature(data_dir / "trig.sig")
    trees = [binarize_tree(e.gold_tree) for e in load_treebank(data_dir / "trig.treebank", sig)]
    g = induce(trees)
    counts = _count_rules(trees)
    totals = Counter()
    for (lhs, _), n in counts.items():
        totals[lhs] += n
    for t in trees:
        expected = 1.0
        for node in t.subtrees():
            if node.children:
                key = (node.label, tuple(k.label for k in node.children))
                expected *= counts[key] / totals[key[0]]
        assert math.exp(g.tree_logprob(t)) == pytest.approx(expected, rel=1e-9)


def _grammar(rules):
    lhs = {r[0] for r in rules}
    syms = {s for r in rules for s in r[1]}
    return Grammar(tuple(Rule(a, tuple(b), 1, math.log(p)) for a, b, p in rules),
                   tuple(sorted(lhs)), tuple(sorted(syms - lhs)))


def test_closure_examples():
    g = _grammar([("A", ["B"], 0.5), ("B", ["C"], 0.4), ("A", ["x"], 0.5), ("B", ["y"], 0.6),
                  ("C", ["z"], 1.0)])
    (ac,) = [e for e in g.closure["A"] if e.bottom == "C"]
    assert ac.logprob == pytest.approx(math.log(0.2), abs=1e-12)
    assert [str(r) for r in ac.chain] == ["A -> B", "B -> C"]
    assert unary_closure(_grammar([("S", ["a"], 1.0)])) == {}
    loop = _grammar([("A", ["A"], 0.3), ("A", ["a"], 0.7)])
    assert "A" not in loop.closure or all(e.bottom != "A" for e in loop.closure["A"])


def _enumerate_chains(unary, cap):
    best = {}
    labels = {r[0] for r in unary} | {r[1] for r in unary}
    for n in range(1, cap + 1):
        for chain in itertools.product(unary, repeat=n):
            if any(chain[i][1] != chain[i + 1][0] for i in range(n - 1)):
                continue
            top, bottom = chain[0][0], chain[-1][1]
            if top == bottom:
                continue
            lp = sum(r[2] for r in chain)
            if (top, bottom) not in best or lp > best[(top, bottom)]:
                best[(top, bottom)] = lp
    return best, labels


def test_closure_matches_enumeration():
    rng = random.Random(11)
    for _ in range(150):
        labels = [f"N{i}" for i in range(rng.randint(2, 6))]
        rules = {}
        for _ in range(rng.randint(1, 8)):
            a, b = rng.choice(labels), rng.choice(labels)
            rules[(a, b)] = rng.uniform(0.05, 0.95)
        spec = [(a, [b], p) for (a, b), p in rules.items()]
        spec += [(lab, ["t" + lab.lower()], 0.5) for lab in labels]
        g = _grammar(spec)
        cap = rng.randint(1, 4)
        table = unary_closure(g, cap)
        got = {(e.top, e.bottom): e.logprob for es in table.values() for e in es}
        unary = [(a, b, math.log(p)) for (a, b), p in rules.items()]
        want, _ = _enumerate_chains(unary, cap)
        assert got.keys() == want.keys()
        for key, lp in want.items():
            assert got[key] == pytest.approx(lp, abs=1e-9)
        for es in table.values():
            for e in es:
                assert 1 <= len(e.chain) <= cap
                assert sum(r.logprob for r in e.chain) == pytest.approx(e.logprob, abs=1e-12)


def test_grammar_dump_round_trip():
    rng = random.Random(4)
    trees = [binarize_tree(random_tree(rng, 4)) for _ in range(30)]
    g = induce([t for t in trees if not t.is_leaf])
    text = g.dumps()
    lines = text.splitlines()
    assert lines == sorted(lines, key=lambda s: (s.split(" -> ")[0], s.split(" -> ")[1].split("\t")[0].split()))
    again = parse_grammar(text)
    assert again.rules == g.rules
    assert again.dumps() == text


def test_open_class_mass():
    g = induce([P("(S (A a) (B b))"), P("(S (A a) (B c))"), P("(S (A d) (B b))")]).with_open_class()
    mass = Counter()
    for r in g.rules:
        mass[r.lhs] += math.exp(r.logprob)
    assert all(abs(v - 1) <= 1e-9 for v in mass.values())
    assert rule_prob(g, "A", ["<UNK>"]) == pytest.approx(1e-6)
    assert rule_prob(g, "B", ["<UNK>"]) == pytest.approx(1e-6)
