import pytest
from hypothesis import given, settings, strategies as st

from cubulate.presentation import (
    ABELIAN,
    ConjugateIntoFactorError,
    DisconnectedGraphError,
    DSLSyntaxError,
    EdgeLetter,
    FactorLetter,
    StaggeringError,
    UnknownSymbolError,
    builtin,
    compute_exponent,
    cyclic_reduce,
    element_of,
    identity_element,
    inverse_element,
    invert,
    is_edge,
    min_exponent,
    multiply,
    normalize,
    parse_presentation,
    parse_word,
    serialize,
    validate_staggering,
)

DUMBBELL = "factor A free a\nfactor B free b\nedge t A B\n"
TWO_EDGES = "factor A free a\nfactor B free b\nedge t1 A B\nedge t2 A B\norder edges t1 t2\n"


def test_parse_dumbbell_inserts_edge_letters():
    X = parse_presentation(DUMBBELL + "relator (a b)^4")
    (r,) = X.relators
    assert X.format_word(r.period) == "a t b t^-1"
    assert r.exponent == 4
    assert X.n == 4
    assert X.W == 16


def test_comments_and_blank_lines():
    X = parse_presentation("# comment\n" + DUMBBELL + "\nrelator (a b)^4  # trailing\n")
    assert X.n == 4


def test_staggering_violation_on_shared_edge():
    with pytest.raises(StaggeringError):
        parse_presentation(DUMBBELL + "relator (a b)^1\nrelator (a b a b)^1")


def test_relator_inside_one_factor_rejected():
    with pytest.raises(ConjugateIntoFactorError):
        parse_presentation(DUMBBELL + "relator (a a)^1")


def test_syntax_error_reports_position():
    with pytest.raises(DSLSyntaxError) as exc:
        parse_presentation(DUMBBELL + "relator (a b")
    assert exc.value.line == 4
    assert exc.value.col is not None


def test_unknown_symbol():
    with pytest.raises(UnknownSymbolError) as exc:
        parse_presentation(DUMBBELL + "relator (a c)^4")
    assert exc.value.line == 4


def test_disconnected_graph():
    with pytest.raises(DisconnectedGraphError):
        parse_presentation("factor A free a\nfactor B free b\nfactor C free c\nedge t A B\n")


def test_exponent_two_warns():
    X = parse_presentation(DUMBBELL + "relator (a b)^2")
    assert X.n == 2
    assert X.warnings


def test_min_exponent_over_several_relators():
    X = parse_presentation(TWO_EDGES + "relator (a t1 b t1^-1)^4\nrelator (a t2 b t2^-1)^6")
    assert min_exponent(X) == 4


def test_backtracking_removed():
    X = builtin("P1")
    w = parse_word(X, "t^-1 a t t^-1 a t", closed=False)
    assert X.format_word(normalize(X, w)) == "t^-1 a a t"
    assert normalize(X, parse_word(X, "a a^-1", closed=False)) == ()
    assert normalize(X, parse_word(X, "a b b^-1 a^-1", closed=False)) == ()
    assert normalize(X, parse_word(X, "t t^-1", closed=False)) == ()


def test_cyclic_reduction_keeps_edge_letters():
    X = builtin("P1")
    w = parse_word(X, "t^-1 a t t^-1 a t", closed=False)
    assert X.format_word(cyclic_reduce(X, w)) == "a a"
    w = parse_word(X, "b t^-1 a t t^-1 a t", closed=False)
    assert X.format_word(cyclic_reduce(X, w)) == "b t^-1 a a t"


def test_abelian_normal_form_is_staircase():
    X = builtin("P2")
    assert X.format_word(normalize(X, parse_word(X, "x y x^-1", closed=False))) == "y"
    assert X.format_word(normalize(X, parse_word(X, "x y x", closed=False))) == "x x y"


def _rotation_exponent(w):
    """Largest m with w a rotation-invariant m-th power, by brute force."""
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and w[d:] + w[:d] == w:
            return w[:d], n // d


@pytest.mark.parametrize("text", ["(a t b t^-1)^4", "a t b t^-1", "(a t b t^-1 a t b b t^-1)^2"])
def test_exponent_matches_rotation_oracle(text):
    X = builtin("P1")
    w = parse_word(X, text)
    p, m = compute_exponent(X, w)
    assert (p, m) == _rotation_exponent(tuple(w))


def test_exponent_examples():
    X = builtin("P1")
    p, m = compute_exponent(X, parse_word(X, "(a t b t^-1 a t b b t^-1)^2"))
    assert (X.format_word(p), m) == ("a t b t^-1 a t b b t^-1", 2)


def test_staggering_single_relator_is_vacuous():
    assert validate_staggering(builtin("P1")) == []


def test_staggering_increasing_edges():
    X = parse_presentation(TWO_EDGES + "relator (a t1 b t1^-1)^4\nrelator (a t2 b t2^-1)^4")
    assert validate_staggering(X) == []


def test_staggering_shared_minimum_is_a_violation():
    # the second relator uses both edges but shares the least one
    with pytest.raises(StaggeringError, match="min t1 < t1"):
        parse_presentation(TWO_EDGES + "relator (a t1 b t1^-1)^4\nrelator (a t1 b t2^-1)^6")


@pytest.mark.parametrize("name", ["P0", "P1", "P2"])
def test_serialize_round_trip(name):
    X = builtin(name)
    Y = parse_presentation(serialize(X))
    assert serialize(Y) == serialize(X)
    assert [(r.period, r.exponent) for r in Y.relators] == [(r.period, r.exponent) for r in X.relators]


def _letters(X, factor):
    spec = X.factors[factor]
    return st.lists(st.builds(FactorLetter, st.just(factor), st.integers(0, spec.rank - 1),
                              st.sampled_from((1, -1))), max_size=12)


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_normalize_idempotent_and_inverse_cancels(data):
    X = builtin(data.draw(st.sampled_from(["P1", "P2"])))
    pieces = []
    for _ in range(data.draw(st.integers(0, 3))):
        pieces += data.draw(_letters(X, "A"))
        pieces.append(EdgeLetter("t", 1))
        pieces += data.draw(_letters(X, "B"))
        pieces.append(EdgeLetter("t", -1))
    w = normalize(X, pieces, "A")
    assert normalize(X, w, "A") == w
    assert normalize(X, tuple(w) + invert(w), "A") == ()


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from(["P1", "P2"]), data=st.data())
def test_factor_group_axioms(kind, data):
    X = builtin(kind)
    spec = X.factors["A"]
    g, h, k = (element_of(spec, data.draw(_letters(X, "A"))) for _ in range(3))
    e = identity_element(spec)
    assert multiply(spec, g, e) == g
    assert multiply(spec, g, inverse_element(spec, g)) == e
    assert multiply(spec, multiply(spec, g, h), k) == multiply(spec, g, multiply(spec, h, k))
    if spec.kind == ABELIAN:
        assert multiply(spec, g, h) == multiply(spec, h, g)


def test_letters():
    X = builtin("P1")
    w = parse_word(X, "a b")
    assert [is_edge(l) for l in w] == [False, True, False, True]
