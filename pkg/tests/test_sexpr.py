import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formalparse.errors import EmptyChildren, EmptyExpression, StrayToken, UnbalancedParens
from formalparse.sexpr import RawTree, parse_sexpr, render_sexpr, tree_yield

label = st.text(alphabet="abcxyz_019&+|.@?", min_size=1, max_size=5)


def trees(depth=6):
    return st.recursive(
        label.map(RawTree),
        lambda kids: st.builds(lambda l, cs: RawTree(l, tuple(cs)), label,
                               st.lists(kids, min_size=1, max_size=3)),
        max_leaves=20,
    )


def test_reads_spec_example():
    t = parse_sexpr("(real (fun_real_real sin) (real x))")
    assert t.label == "real" and len(t.children) == 2
    assert t.children[0] == RawTree("fun_real_real", (RawTree("sin"),))


@pytest.mark.parametrize("text,exc", [
    ("(a)", EmptyChildren),
    ("((a b)", UnbalancedParens),
    ("(a b))", UnbalancedParens),
    ("", EmptyExpression),
    ("   ", EmptyExpression),
    ("()", EmptyExpression),
    ("(a b) c", StrayToken),
    ("a b", StrayToken),
    ("((a b) c)", StrayToken),
])
def test_malformed_inputs(text, exc):
    with pytest.raises(exc):
        parse_sexpr(text)


def test_render_cases():
    assert render_sexpr(RawTree("x")) == "x"
    assert render_sexpr(RawTree("S", (RawTree("a"), RawTree("b")))) == "(S a b)"


def test_whitespace_insensitive_and_normalizing():
    t = parse_sexpr("  ( S\n (A  a)\t b )  ")
    assert render_sexpr(t) == "(S (A a) b)"
    assert render_sexpr(parse_sexpr(render_sexpr(t))) == render_sexpr(t)


def test_yield():
    assert tree_yield(parse_sexpr("(S a b)")) == ["a", "b"]
    assert tree_yield(parse_sexpr("x")) == ["x"]
    assert tree_yield(parse_sexpr("(S (S a b) c)")) == ["a", "b", "c"]


@settings(max_examples=300)
@given(trees())
def test_round_trip(t):
    text = render_sexpr(t)
    assert parse_sexpr(text) == t
    assert "  " not in text and text == text.strip()
