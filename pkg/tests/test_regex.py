import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordlang import regex as rx
from ordlang.opm import OpmError

from oracles import language_sample, naive_match, random_regex, words_upto

R, W, C = rx.sym("r"), rx.sym("w"), rx.sym("c")
RW_STAR = rx.star(rx.alt(R, W))
ENVELOPE = rx.cat(RW_STAR, C)  # (r|w)*c


def regexes(alphabet="rwc", max_depth=4):
    base = st.sampled_from([rx.EPS] + [rx.sym(ch) for ch in alphabet])
    return st.recursive(
        base,
        lambda inner: st.one_of(
            st.tuples(inner, inner).map(lambda p: rx.cat(*p)),
            st.tuples(inner, inner).map(lambda p: rx.alt(*p)),
            inner.map(rx.star),
        ),
        max_leaves=2 ** max_depth,
    )


def test_nullable():
    assert rx.nullable(RW_STAR)
    assert not rx.nullable(C)
    # independent check at length 0: the empty word is not in (r|w)*c
    assert not naive_match(ENVELOPE, "")
    assert not rx.nullable(ENVELOPE)


def test_derivative_examples():
    assert rx.derivative(C, "c") == rx.EPS
    assert rx.derivative(C, "r") == rx.EMPTY
    # derivative of the envelope by r is the envelope again, checked
    # against the brute-force matcher on all short words
    d = rx.derivative(ENVELOPE, "r")
    for word in words_upto("rwc", 5):
        assert naive_match(d, word) == naive_match(ENVELOPE, "r" + word)


@given(regexes(), st.sampled_from("rwc"))
@settings(max_examples=120)
def test_derivative_is_left_quotient(r, a):
    d = rx.derivative(r, a)
    for word in words_upto("rwc", 3):
        assert naive_match(d, word) == naive_match(r, a + word)


def test_to_dfa_single_symbol():
    dfa = rx.to_dfa(C, ("c", "r", "w"))
    assert dfa.n_states == 3  # start, accept, sink
    for word in words_upto("rwc", 4):
        assert dfa.accepts(word) == naive_match(C, word)


def test_to_dfa_empty_language():
    dfa = rx.to_dfa(rx.EMPTY, ("r",))
    assert dfa.n_states == 1
    assert not dfa.accepting


def test_to_dfa_rw_star():
    dfa = rx.to_dfa(RW_STAR, ("c", "r", "w"))
    assert dfa.n_states == 2  # accepting loop plus sink for c
    assert len(dfa.accepting) == 1
    for word in words_upto("rwc", 4):
        assert dfa.accepts(word) == naive_match(RW_STAR, word)


def test_to_dfa_state_budget():
    with pytest.raises(rx.StateBudgetExceeded):
        rx.to_dfa(ENVELOPE, ("r", "w", "c"), budget=1)


def test_includes_examples():
    assert rx.includes(RW_STAR, rx.star(R))
    # splitting the classic borrow: (r|w)* · (r|w)*c is inside (r|w)*c
    assert rx.includes(ENVELOPE, rx.cat(RW_STAR, ENVELOPE))
    assert not rx.includes(R, W)


@given(regexes(max_depth=3), regexes(max_depth=3))
@settings(max_examples=150)
def test_includes_matches_brute_force(a, b):
    expected = language_sample(b, "rwc", 5) <= language_sample(a, "rwc", 5)
    got = rx.includes(a, b)
    if got:
        assert expected
    elif expected:
        # disagreement beyond the sampled horizon must be a real word
        assert any(
            naive_match(b, word) and not naive_match(a, word)
            for word in words_upto("rwc", 8)
        )


def test_product_derivative_envelope_by_borrows():
    # borrowing r* (or w*) from the file envelope leaves the envelope
    for borrow in (rx.star(R), rx.star(W)):
        pd = rx.product_derivative(ENVELOPE, borrow)
        assert rx.equivalent(pd, ENVELOPE)


def test_product_derivative_neutral_divisor():
    for r in (ENVELOPE, RW_STAR, rx.cat(R, C)):
        assert rx.equivalent(rx.product_derivative(r, rx.EPS), r)


def test_product_derivative_empty_divisor_rejected():
    with pytest.raises(ValueError):
        rx.product_derivative(ENVELOPE, rx.EMPTY)


def _pd_sound_and_maximal(num, den, alphabet="rwc"):
    pd = rx.product_derivative(num, den)
    # soundness: den · pd ⊆ num
    assert rx.includes(num, rx.cat(den, pd))
    # sampled maximality: any short word outside pd has a short den-word
    # whose concatenation escapes num
    den_words = [u for u in words_upto(alphabet, 5) if naive_match(den, u)]
    for w in words_upto(alphabet, 4):
        if naive_match(pd, w):
            continue
        assert any(not naive_match(num, u + w) for u in den_words), (num, den, w)


def test_product_derivative_sound_and_maximal_examples():
    _pd_sound_and_maximal(ENVELOPE, rx.star(R))
    _pd_sound_and_maximal(rx.cat(R, C), R)
    _pd_sound_and_maximal(RW_STAR, rx.alt(R, W))


@given(regexes(max_depth=3), regexes(max_depth=3))
@settings(max_examples=60)
def test_product_derivative_sound_and_maximal_random(num, den):
    if rx.is_empty_language(den):
        return
    _pd_sound_and_maximal(num, den)


def test_opm_operations(regex_opm):
    assert regex_opm.mul(rx.star(R), C) == rx.cat(rx.star(R), C)
    assert regex_opm.leq(rx.star(R), RW_STAR)
    assert not regex_opm.leq(RW_STAR, rx.star(R))
    assert regex_opm.eq(rx.alt(R, W), rx.alt(W, R))
    assert regex_opm.droppable(rx.star(R))
    assert not regex_opm.droppable(C)
    # residual of r* against the envelope: the witness is the envelope
    assert regex_opm.residual_exists(rx.star(R), ENVELOPE)
    assert regex_opm.best_continuation(rx.star(R), ENVELOPE) is not None


@given(regexes(max_depth=3), regexes(max_depth=3))
@settings(max_examples=80)
def test_residual_iff_product_derivative_nonempty(x, y):
    if rx.is_empty_language(x):
        return
    opm = rx.RegexOpm()
    assert opm.residual_exists(x, y) == (
        not rx.is_empty_language(rx.product_derivative(y, x))
    )


def test_seeded_oracle_agreement_200_pairs(regex_opm):
    disagreements = 0
    rng = random.Random(20240817)
    for _ in range(200):
        a = random_regex(rng, "rwc", 4)
        b = random_regex(rng, "rwc", 4)
        expected = language_sample(b, "rwc", 6) <= language_sample(a, "rwc", 6)
        if rx.includes(a, b) != expected:
            disagreements += 1
    assert disagreements == 0


def test_parse_regex():
    assert rx.parse_regex("(r|w)*c") == ENVELOPE
    assert rx.parse_regex("rw*") == rx.cat(R, rx.star(W))  # star binds tightest
    assert rx.parse_regex("r|wc") == rx.alt(R, rx.cat(W, C))  # concat over alt
    assert rx.parse_regex("eps") == rx.EPS
    assert rx.parse_regex("r eps") == R
    with pytest.raises(OpmError):
        rx.parse_regex("(r|w")
    with pytest.raises(OpmError):
        rx.parse_regex("")
    with pytest.raises(OpmError):
        rx.parse_regex("r)")


def test_parse_element_rejects_empty_language(regex_opm):
    with pytest.raises(OpmError):
        regex_opm.parse_element("r|")  # parse error, not empty, still rejected


def test_normalization():
    assert rx.cat(rx.EMPTY, R) == rx.EMPTY
    assert rx.cat(R, rx.EMPTY) == rx.EMPTY
    assert rx.cat(rx.EPS, R) == R
    assert rx.alt(R, R) == R
    assert rx.alt(R, rx.EMPTY) == R
    assert rx.star(rx.star(R)) == rx.star(R)
    assert rx.star(rx.EMPTY) == rx.EPS
    assert rx.alt(rx.alt(R, W), C) == rx.alt(R, rx.alt(W, C))


def test_is_empty_language_on_normalized_forms():
    assert rx.is_empty_language(rx.cat(R, rx.EMPTY))
    assert not rx.is_empty_language(rx.star(rx.EMPTY))
