import random

import pytest
from hypothesis import given, settings, strategies as st

from cubulate.presentation import builtin, invert, parse_word
from cubulate.word_problem import (
    CONED,
    CROSS,
    DEHN,
    ELECTRIFIED,
    INTRINSIC,
    ORACLE,
    OracleInconclusive,
    _presentation,
    are_equal,
    area_estimate,
    bs_length,
    dehn_reduce,
    dehn_step,
    is_trivial,
    oracle_is_trivial,
    permutation_quotients,
    quotient_image,
    random_factor_word,
    replay,
    trivial_corpus,
)


def _cycle_types(X, w):
    """Conjugacy invariant: cycle type of w's image in every permutation quotient."""
    gp = _presentation(X)
    out = []
    for img in quotient_image(permutation_quotients(X), gp.encode(w)):
        seen, lengths = set(), []
        for i in range(len(img)):
            n = 0
            while i not in seen:
                seen.add(i)
                i = img[i]
                n += 1
            if n:
                lengths.append(n)
        out.append(tuple(sorted(lengths)))
    return out


def test_full_relator_is_replaced_by_empty(P1):
    w = parse_word(P1, "(a t b t^-1)^4")
    after, event = dehn_step(P1, w)
    assert after == ()
    assert event.span == 8


def test_short_match_is_absent(P1):
    assert dehn_step(P1, parse_word(P1, "a t b t^-1")) is None


@pytest.mark.parametrize("text, span", [
    ("(a t b t^-1)^3 a t b^2 t^-1", 8),
    ("(a t b t^-1)^2 a t b^3 t^-1", 6),
    ("(a t b t^-1)^2 a t b t^-1 a^3", 6),
])
def test_complement_replacement_preserves_conjugacy_class(P1, text, span):
    w = parse_word(P1, text)
    after, event = dehn_step(P1, w)
    assert event.span == span
    assert 2 * event.span > P1.relators[0].essential_count
    assert bs_length(after) < bs_length(w)
    assert _cycle_types(P1, after) == _cycle_types(P1, w)


def test_open_path_rejected(P1):
    with pytest.raises(ValueError):
        dehn_step(P1, parse_word(P1, "a t", closed=False))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_torsion(P1, k):
    w = parse_word(P1, f"(a b)^{k}")
    assert is_trivial(P1, w, DEHN) == (k == 4)
    assert is_trivial(P1, w, ORACLE, radius=20) == (k == 4)
    assert is_trivial(P1, w, CROSS) == (k == 4)


def test_factor_words_nontrivial(P1, P2):
    for X in (P1, P2):
        rng = random.Random(5)
        for _ in range(50):
            w = random_factor_word(X, rng)
            assert not is_trivial(X, w)
            assert not oracle_is_trivial(X, w)


def test_equality(P1):
    ab = parse_word(P1, "a b")
    assert are_equal(P1, ab, ab)
    assert not are_equal(P1, ab, parse_word(P1, "t b t^-1 a"))
    assert are_equal(P1, parse_word(P1, "(a b)^5"), ab)
    assert are_equal(P1, parse_word(P1, "(a b)^5"), ab, ORACLE)


def test_bs_length(P1):
    assert bs_length(parse_word(P1, "(a t b t^-1)^4")) == 8
    assert bs_length(parse_word(P1, "a", closed=False)) == 0
    assert bs_length(parse_word(P1, "t b t^-1", closed=False)) == 2


def test_area(P1):
    r = P1.relators[0].word
    assert area_estimate(P1, r) == 1
    assert area_estimate(P1, ()) == 0
    u = parse_word(P1, "a t b t^-1 a", closed=False)
    v = parse_word(P1, "t b^2 t^-1", closed=False)
    w = tuple(u) + r + invert(u) + tuple(v) + invert(r) + invert(v)
    trace = dehn_reduce(P1, w)
    assert replay(P1, trace) == ()
    assert area_estimate(P1, w) == trace.area == 2
    with pytest.raises(ValueError):
        area_estimate(P1, parse_word(P1, "a b"))


@pytest.mark.parametrize("mode, expected", [(INTRINSIC, 4), (ELECTRIFIED, 2), (CONED, 4)])
def test_relative_length_modes(P1, mode, expected):
    from cubulate.word_problem import relative_length
    assert relative_length(P1, parse_word(P1, "a t b t^-1"), mode) == expected


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), name=st.sampled_from(["P1", "P2"]))
def test_trivial_words_reduce_to_empty(seed, name):
    X = builtin(name)
    for w in trivial_corpus(X, 4, seed=seed):
        trace = dehn_reduce(X, w)
        assert trace.output == ()
        assert replay(X, trace) == ()
        assert 2 * trace.area <= max(1, bs_length(w))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_dehn_and_oracle_agree_on_random_words(seed):
    X = builtin("P1")
    rng = random.Random(seed)
    w = trivial_corpus(X, 1, seed=seed)[0]
    u = random_factor_word(X, rng, "A")
    for word in (w, tuple(w) + tuple(u)):
        try:
            oracle = oracle_is_trivial(X, word)
        except OracleInconclusive:
            continue
        assert is_trivial(X, word) == oracle
