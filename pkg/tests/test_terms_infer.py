import random
from collections import Counter

import pytest

from formalparse.errors import AmbiguousRepair, NoRepair, TermTypeError, UnknownSymbol
from formalparse.infer import infer, infer_annotated, insert_coercions, typechecks
from formalparse.signature import parse_signature
from formalparse.terms import Abs, App, Const, Var, alpha_equal, app, erase_casts, leaves
from formalparse.types import TCon, render_type
from oracles import oracle_repair, oracle_type

SIN, COS, PLUS, AMP, ZERO, X = (Const("sin"), Const("cos"), Const("plus_r"), Const("amp"),
                                Const("zero"), Var("x"))


def test_infer_spec_examples(sig):
    assert render_type(infer(SIN, sig)) == "(fun real real)"
    assert render_type(infer(App(SIN, X), sig)) == "real"
    with pytest.raises(TermTypeError):
        infer(App(SIN, ZERO), sig)
    lam = Abs("y", App(SIN, Var("y")))
    assert render_type(infer(lam, sig)) == "(fun real real)"
    assert render_type(oracle_type(lam, sig)) == "(fun real real)"


def test_infer_errors(sig):
    with pytest.raises(UnknownSymbol):
        infer(Const("nope"), sig)
    with pytest.raises(UnknownSymbol):
        infer(Var("free"), sig)
    with pytest.raises(TermTypeError):
        infer(App(ZERO, X), sig)  # applying a non-function


def test_polymorphic_instances_are_independent(sig):
    t = app(Const("pair"), App(Const("id"), X), App(Const("id"), ZERO))
    assert render_type(infer(t, sig)) == "(prod real num)"
    assert render_type(infer(Abs("v", Var("v")), sig)) == "(fun ?a ?a)"
    # binders are monomorphic
    with pytest.raises(TermTypeError):
        infer(Abs("f", app(Const("pair"), App(Var("f"), X), App(Var("f"), ZERO))), sig)


def test_infer_deterministic(sig):
    t = Abs("f", Abs("g", App(Var("f"), App(Var("g"), X))))
    outs = {render_type(infer(t, sig)) for _ in range(5)}
    assert outs == {"(fun (fun ?a ?b) (fun (fun real ?a) ?b))"}


def test_annotations_share_variables(sig):
    ann = infer_annotated(Abs("y", App(SIN, Var("y"))), sig)
    assert render_type(ann[("b", "a")]) == "real"


# --- random terms against the union-find oracle --------------------------------

def rand_term(rng, sig, depth, bound=()):
    names = sorted(sig.consts)
    if depth == 0 or rng.random() < 0.25:
        pool = [Const(n) for n in names] + [Var(v) for v in sorted(sig.vars)] + [Var(b) for b in bound]
        return rng.choice(pool)
    r = rng.random()
    if r < 0.2:
        v = f"b{len(bound)}"
        return Abs(v, rand_term(rng, sig, depth - 1, bound + (v,)))
    return App(rand_term(rng, sig, depth - 1, bound), rand_term(rng, sig, depth - 1, bound))


def test_infer_matches_oracle_on_random_terms(sig):
    rng = random.Random(3)
    typed = 0
    for _ in range(1500):
        t = rand_term(rng, sig, 4)
        ref = oracle_type(t, sig)
        if ref is None:
            assert not typechecks(t, sig)
            continue
        typed += 1
        assert render_type(infer(t, sig)) == render_type(ref)
    assert typed >= 200


# --- alpha equality and cast erasure ---------------------------------------------

def test_alpha_equal():
    assert alpha_equal(Abs("u", Var("u")), Abs("v", Var("v")))
    assert not alpha_equal(Abs("u", App(SIN, Var("u"))), Abs("u", App(COS, Var("u"))))
    assert not alpha_equal(Abs("u", Var("w")), Abs("v", Var("v")))
    assert not alpha_equal(Abs("u", Abs("v", Var("u"))), Abs("u", Abs("v", Var("v"))))
    t = app(PLUS, X, App(AMP, ZERO))
    assert alpha_equal(t, t)


def test_erase_casts_examples():
    assert erase_casts(App(AMP, ZERO), {"amp"}) == ZERO
    assert erase_casts(app(PLUS, X, App(AMP, ZERO)), {"amp"}) == app(PLUS, X, ZERO)
    t = app(PLUS, X, App(AMP, ZERO))
    assert erase_casts(t, set()) == t
    stats = Counter()
    bare = App(Const("map"), AMP)
    assert erase_casts(bare, {"amp"}, stats) == bare
    assert stats["bare_cast"] == 1


def test_erase_idempotent_random(sig):
    rng = random.Random(9)
    for _ in range(300):
        t = rand_term(rng, sig, 4)
        e = erase_casts(t, {"amp"})
        assert erase_casts(e, {"amp"}) == e


# --- coercion repair -------------------------------------------------------------

def test_repair_spec_examples(sig):
    t = app(PLUS, X, ZERO)
    assert insert_coercions(t, sig) == app(PLUS, X, App(AMP, ZERO))
    assert oracle_repair(t, sig) == ("ok", app(PLUS, X, App(AMP, ZERO)))
    assert insert_coercions(App(SIN, X), sig) == App(SIN, X)
    with pytest.raises(NoRepair):
        insert_coercions(App(SIN, Const("c_i")), sig)


def test_repair_with_expected_root(sig):
    assert insert_coercions(ZERO, sig, expected=TCon("real")) == App(AMP, ZERO)
    with pytest.raises(NoRepair):
        insert_coercions(ZERO, sig, expected=TCon("bool"))


TRIG_LIKE = parse_signature("""
const zero : num
const & : (fun num real)
const Cx : (fun real complex)
const nc : (fun num complex)
const sin : (fun real real)
const ccos : (fun complex complex)
const plus_r : (fun real (fun real real))
const plus_c : (fun complex (fun complex complex))
const mix : (fun real (fun complex bool))
const dup : (fun ?a (fun ?a ?a))
var x : real
var n : num
var z : complex
coercion &
coercion Cx
coercion nc
""")


def test_repair_ambiguous_reports_candidates():
    # dup x n: only coercing n up to real works
    t = app(Const("dup"), Var("x"), Var("n"))
    assert insert_coercions(t, TRIG_LIKE) == app(Const("dup"), Var("x"), App(Const("&"), Var("n")))
    # mix n n: & on the first argument, nc on the second
    t2 = app(Const("mix"), Var("n"), Var("n"))
    assert oracle_repair(t2, TRIG_LIKE)[0] == "ok"
    assert insert_coercions(t2, TRIG_LIKE) == oracle_repair(t2, TRIG_LIKE)[1]


def test_ambiguous_repair_raised():
    # two minimal repairs touching different edges
    t = App(Const("ccos"), app(Const("dup"), ZERO, App(SIN, Var("n"))))
    assert oracle_repair(t, TRIG_LIKE, TCon("complex"))[0] == "ambiguous"
    with pytest.raises(AmbiguousRepair) as info:
        insert_coercions(t, TRIG_LIKE, expected=TCon("complex"))
    assert len(info.value.candidates) >= 2


def random_small_term(rng, sig, depth):
    names = sorted(sig.consts)
    if depth == 0 or rng.random() < 0.3:
        return rng.choice([Const(n) for n in names if n not in sig.coercions] +
                          [Var(v) for v in sorted(sig.vars)])
    return App(random_small_term(rng, sig, depth - 1), random_small_term(rng, sig, depth - 1))


def test_repair_matches_brute_force():
    rng = random.Random(17)
    seen = Counter()
    for _ in range(1500):
        t = random_small_term(rng, TRIG_LIKE, 3)
        if sum(1 for _ in leaves(t)) > 4:
            continue
        expected = rng.choice([None, TCon("real"), TCon("complex")])
        status, ref = oracle_repair(t, TRIG_LIKE, expected)
        seen[status] += 1
        if status == "none":
            with pytest.raises(NoRepair):
                insert_coercions(t, TRIG_LIKE, expected)
        elif status == "ambiguous":
            with pytest.raises(AmbiguousRepair):
                insert_coercions(t, TRIG_LIKE, expected)
        else:
            out = insert_coercions(t, TRIG_LIKE, expected)
            assert out == ref, (t, expected)
            infer(out, TRIG_LIKE, expected=expected)
            assert erase_casts(out, set(TRIG_LIKE.coercions)) == erase_casts(t, set(TRIG_LIKE.coercions))
    assert seen["ok"] > 50 and seen["none"] > 20, seen
