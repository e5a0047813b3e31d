import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordlang import core as co
from ordlang import regex as rx
from ordlang.opm import get_opm

OPM = get_opm("regex")
R = rx.sym("r")
M = co.TraceType(R)
UNIT = co.UNIT_T


def types(max_depth=5):
    base = st.one_of(
        st.just(UNIT),
        st.sampled_from([co.TraceType(rx.sym(c)) for c in "rw"]),
    )
    return st.recursive(
        base,
        lambda inner: st.one_of(
            st.tuples(st.sampled_from(co.MODES), inner, inner, st.sampled_from([0, 1])).map(
                lambda t: co.ArrowType(t[0], t[1], t[2], t[3])
            ),
            st.tuples(st.booleans(), inner, inner).map(
                lambda t: co.ProdType(t[0], t[1], t[2])
            ),
        ),
        max_leaves=2 ** max_depth,
    )


def terms():
    base = st.one_of(
        st.just(co.UNIT),
        st.just(co.DROP),
        st.sampled_from([co.Var(n) for n in "xyz"]),
        st.sampled_from([co.Loc(i) for i in range(2)]),
        st.just(co.NewConst(R)),
        st.just(co.OpConst(R)),
    )
    return st.recursive(
        base,
        lambda inner: st.one_of(
            st.tuples(st.sampled_from(co.MODES), st.sampled_from("xyz"), inner).map(
                lambda t: co.Lam(t[0], t[1], t[2])
            ),
            st.tuples(st.sampled_from(co.MODES), inner, inner).map(
                lambda t: co.App(t[0], t[1], t[2])
            ),
            st.tuples(st.booleans(), inner, inner).map(
                lambda t: co.Pair(t[0], t[1], t[2])
            ),
            st.tuples(st.booleans(), inner, inner).map(
                lambda t: co.LetPair(t[0], "x", "y", t[1], t[2])
            ),
        ),
        max_leaves=16,
    )


def values():
    return st.one_of(
        st.just(co.UNIT),
        st.sampled_from([co.Loc(i) for i in range(2)]),
        st.tuples(st.sampled_from(co.MODES), st.sampled_from("xyzw"), terms()).map(
            lambda t: co.Lam(t[0], t[1], t[2])
        ),
    )


# -- unr / ord classification

def test_unr_examples():
    assert co.unr(UNIT)
    assert co.unr(co.ArrowType(co.PLAIN, M, M, 1))  # any plain arrow
    assert co.unr(co.ProdType(False, UNIT, UNIT))


def test_ord_examples():
    assert co.ord_(M)
    assert co.ord_(co.ProdType(False, UNIT, M))  # via the right component
    assert co.ord_(co.ProdType(True, M, UNIT))
    for mode in (co.UNORD, co.RIGHT, co.LEFT):
        assert co.ord_(co.ArrowType(mode, UNIT, UNIT, 0))


@given(types())
@settings(max_examples=300)
def test_unr_ord_total_and_exclusive(t):
    assert co.unr(t) != co.ord_(t)


# -- free variables and substitution

def test_fv_examples():
    assert co.fv(co.Lam(co.UNORD, "x", co.Var("x"))) == frozenset()
    assert co.fv(co.Pair(False, co.Var("x"), co.Var("y"))) == {"x", "y"}
    assert (
        co.fv(co.LetPair(True, "x", "y", co.Var("z"), co.Var("x"))) == {"z"}
    )
    assert co.fv(co.Loc(3)) == frozenset()


def test_subst_examples():
    assert co.subst(co.Var("x"), co.UNIT, "x") == co.UNIT
    lam = co.Lam(co.UNORD, "y", co.Pair(False, co.Var("x"), co.Var("y")))
    out = co.subst(lam, co.Loc(0), "x")
    assert out == co.Lam(co.UNORD, "y", co.Pair(False, co.Loc(0), co.Var("y")))


def test_subst_avoids_capture():
    # the substituted value has a free y, so the binder must be renamed
    lam = co.Lam(co.PLAIN, "y", co.Pair(False, co.Var("x"), co.Var("y")))
    val = co.Lam(co.PLAIN, "z", co.Var("y"))
    out = co.subst(lam, val, "x")
    assert isinstance(out, co.Lam)
    assert out.var != "y"
    assert co.fv(out) == {"y"}


@given(terms(), values(), st.sampled_from("xyz"))
@settings(max_examples=200)
def test_subst_void(m, v, x):
    if x not in co.fv(m):
        assert co.subst(m, v, x) == m


@given(terms(), values(), st.sampled_from("xyz"))
@settings(max_examples=200)
def test_subst_respects_fv(m, v, x):
    out = co.subst(m, v, x)
    assert co.fv(out) <= (co.fv(m) - {x}) | co.fv(v)


def test_letpair_binders_must_differ():
    with pytest.raises(ValueError):
        co.LetPair(False, "x", "x", co.UNIT, co.UNIT)


# -- values

def test_is_value():
    assert co.is_value(co.Pair(True, co.Loc(0), co.Loc(0)))  # l .o l
    assert not co.is_value(co.App(co.PLAIN, co.Lam(co.PLAIN, "x", co.Var("x")), co.UNIT))
    assert co.is_value(co.OpConst(R))
    assert co.is_value(co.Lam(co.LEFT, "x", co.Var("x")))
    assert not co.is_value(co.Pair(False, co.UNIT, co.Var("x") ))
    assert not co.is_value(co.Var("x"))


def test_locations_with_multiplicity():
    term = co.Pair(True, co.Loc(0), co.Pair(False, co.Loc(0), co.Loc(1)))
    assert sorted(co.locations(term)) == [0, 0, 1]


# -- stable pretty format

def test_pretty_constants_and_modes():
    assert co.pretty(co.UNIT, OPM) == "unit"
    assert co.pretty(co.NewConst(R), OPM) == "new_{r}"
    assert co.pretty(co.Loc(2), OPM) == "l2"
    assert (
        co.pretty(co.App(co.UNORD, co.Var("f"), co.UNIT), OPM) == "f @° unit"
    )
    assert (
        co.pretty(co.Pair(True, co.Var("a"), co.Var("b")), OPM) == "a .o b"
    )
    assert (
        co.pretty(co.Pair(False, co.Var("a"), co.Var("b")), OPM) == "a ox b"
    )


def test_pretty_let_sugar():
    redex = co.App(co.LEFT, co.Lam(co.LEFT, "x", co.Var("x")), co.UNIT)
    assert co.pretty(redex, OPM) == "let< x = unit in\nx"
    letpair = co.LetPair(True, "a", "b", co.Var("p"), co.Var("a"))
    assert co.pretty(letpair, OPM) == "let a .o b = p in\na"


def test_pretty_mode_marks_on_lambdas():
    assert co.pretty(co.Lam(co.PLAIN, "x", co.Var("x")), OPM) == "λx. x"
    assert co.pretty(co.Lam(co.UNORD, "x", co.Var("x")), OPM) == "λ°x. x"
    assert co.pretty(co.Lam(co.RIGHT, "x", co.Var("x")), OPM) == "λ>x. x"
    assert co.pretty(co.Lam(co.LEFT, "x", co.Var("x")), OPM) == "λ<x. x"


def test_types_equal_semantic_indices():
    a = co.TraceType(rx.alt(rx.sym("r"), rx.sym("w")))
    b = co.TraceType(rx.alt(rx.sym("w"), rx.sym("r")))
    assert co.types_equal(a, b, OPM)
    # distinct languages differ
    assert not co.types_equal(a, co.TraceType(rx.sym("r")), OPM)
    # mode and effect are part of arrow identity
    ar1 = co.ArrowType(co.PLAIN, UNIT, UNIT, 0)
    ar2 = co.ArrowType(co.PLAIN, UNIT, UNIT, 1)
    assert not co.types_equal(ar1, ar2, OPM)
    assert not co.types_equal(
        co.ArrowType(co.RIGHT, UNIT, UNIT, 0),
        co.ArrowType(co.LEFT, UNIT, UNIT, 0),
        OPM,
    )
