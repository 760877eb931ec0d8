import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from cubulate.ball import build_ball
from cubulate.horoball import (
    AugmentedBall,
    DepthTooSmall,
    HoroballGraph,
    PseudometricChoice,
    admissible_pseudometric,
    four_point_defect,
    horoball_distance,
    hyperbolicity_estimate,
    line_horoball,
    log_envelope,
    normal_form_distance,
    required_depth,
)
from cubulate.presentation import parse_word
from cubulate.word_problem import HOROBALL, relative_length


def test_level_three_joins_distance_eight():
    g = line_horoball(9, 3)
    assert (0, 8) in g.horizontal(3)
    assert all(b - a <= 8 for a, b in g.horizontal(3))
    assert len(g.horizontal(3)) == 36


def test_depth_zero_is_the_base():
    g = line_horoball(9, 0)
    assert g.horizontal(0) == [(i, i + 1) for i in range(8)]
    assert len(g.adj) == 9


def test_singleton_base_is_a_ray():
    g = HoroballGraph(1, lambda a, b: 0, 5)
    assert [sorted(g.adj[i]) for i in range(6)] == [[1], [0, 2], [1, 3], [2, 4], [3, 5], [4]]


def test_distances():
    g = line_horoball(64, 8)
    assert horoball_distance(g, (5, 2), (5, 2)) == 0
    assert horoball_distance(g, (0, 0), (8, 0)) == 6
    assert normal_form_distance(g, (0, 0), (8, 0)) == 6
    assert horoball_distance(g, (4, 3), (4, 0)) == 3
    assert horoball_distance(g, (0, 0), (1, 0)) == 1


def test_normal_forms_agree_on_seeded_pairs():
    g = line_horoball(64, 8)
    rng = random.Random(0)
    for _ in range(100):
        u = (rng.randrange(64), rng.randrange(9))
        v = (rng.randrange(64), rng.randrange(9))
        assert horoball_distance(g, u, v) == normal_form_distance(g, u, v)


def test_log_envelope():
    C = log_envelope(line_horoball(64, 8))
    assert C == pytest.approx(2 * math.log2(3) - 2)


def test_pseudometric(P1):
    pm = PseudometricChoice(P1, 4)
    assert pm("A", (1,)) == 1
    assert pm("A", (1,) * 8) == 6
    with pytest.raises(DepthTooSmall):
        PseudometricChoice(P1, 2)("A", (1,) * 8)
    assert required_depth(8) == 4
    w = parse_word(P1, "a^8 t b t^-1")
    assert relative_length(P1, w, HOROBALL, pm) == 9


def test_admissible_depth(P1):
    B = build_ball(P1, 6)
    assert admissible_pseudometric(B).depth == 5
    with pytest.raises(DepthTooSmall):
        admissible_pseudometric(B, depth=2)


def test_tree_is_zero_hyperbolic(ball_p0):
    delta, count = hyperbolicity_estimate(ball_p0.bfs, len(ball_p0))
    assert delta == 0.0 and count == 163185


def test_line_horoball_delta():
    h = line_horoball(16, 5)
    assert hyperbolicity_estimate(h.bfs, len(h.adj), samples=20000, seed=0) == (1.5, 20000)


def test_augmented_ball_delta(P1):
    B = build_ball(P1, 6)
    A = AugmentedBall(B, admissible_pseudometric(B).depth)
    assert len(A) == 1140
    assert hyperbolicity_estimate(A.bfs, len(A), samples=5000, seed=7) == (1.5, 5000)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 40), depth=st.integers(0, 6), data=st.data())
def test_metric_axioms_and_normal_form(n, depth, data):
    g = line_horoball(n, depth)
    pt = st.tuples(st.integers(0, n - 1), st.integers(0, depth))
    u, v, w = data.draw(pt), data.draw(pt), data.draw(pt)
    duv = horoball_distance(g, u, v)
    assert duv == horoball_distance(g, v, u)
    assert duv <= horoball_distance(g, u, w) + horoball_distance(g, w, v)
    if depth >= required_depth(n - 1):
        assert duv == normal_form_distance(g, u, v)


@settings(max_examples=40, deadline=None)
@given(xs=st.lists(st.integers(0, 30), min_size=4, max_size=4))
def test_four_point_defect_on_a_line_is_zero(xs):
    assert four_point_defect(lambda a, b: abs(a - b), *xs) == 0
