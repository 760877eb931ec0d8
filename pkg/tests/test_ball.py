import pytest
from hypothesis import given, settings, strategies as st

from cubulate.ball import (
    CONED,
    ELECTRIFIED,
    INTRINSIC,
    OutsideSafeCore,
    all_geodesics,
    build_ball,
    convexity_check,
    geodesic,
    geodesic_cell_report,
    geodesic_word,
    max_degree,
    position_class,
    relative_geodesic,
    shareboundary_violations,
)
from cubulate.presentation import is_edge, parse_presentation, parse_word
from cubulate.word_problem import _moves, _presentation, permutation_quotients, quotient_image


@pytest.mark.parametrize("R", range(5))
def test_free_product_ball_size(P0, R):
    # the cover of the dumbbell with two circle factors is the 3-regular tree
    B = build_ball(P0, R)
    assert len(B) == 1 + 3 * (2 ** R - 1)
    assert len(B.edges) == len(B) - 1
    assert not B.cells


def test_radius_zero(P1):
    B = build_ball(P1, 0)
    assert len(B) == 1 and not B.cells and not B.edges


def test_full_cells_present(ball_p1):
    full = [c for c in ball_p1.cells if c.complete]
    assert full
    assert {c.length for c in full} == {16}
    assert max_degree(ball_p1) <= ball_p1.X.graph.degree_bound()


def test_position_classes(ball_p1):
    c = next(c for c in ball_p1.cells if c.complete)
    assert position_class(c, 0) == [0, 4, 8, 12]
    assert position_class(c, 1) == [1, 5, 9, 13]
    Y = parse_presentation("factor A free a\nfactor B free b\nedge t A B\nrelator (a b a b b)^1")
    cell = next(c for c in build_ball(Y, 6).cells if c.complete)
    assert position_class(cell, 2) == [2]
    with pytest.raises(ValueError):
        position_class(c, 16)


def test_geodesic_basics(ball_p1, P1):
    B = ball_p1
    assert geodesic(B, 0, 0) == []
    va = B.locate(parse_word(P1, "a", closed=False))
    assert P1.format_word(geodesic_word(B, 0, va)) == "a"
    far = next(v for v in range(len(B)) if not B.in_core(v))
    with pytest.raises(OutsideSafeCore):
        geodesic(B, 0, far)


def test_distance_to_ab_squared(ball_p1, P1):
    B = ball_p1
    target = parse_word(P1, "(a b)^2")
    v = B.locate(target)
    assert B.dist[v] == B.bfs(0)[v] == 8
    # independent check: no shorter path has the same image in the finite quotients
    gp = _presentation(P1)
    reps = permutation_quotients(P1)
    want = quotient_image(reps, gp.encode(target))

    def walk(prefix, here, budget):
        if P1.end_factor(prefix, "A") == "A" and quotient_image(reps, gp.encode(prefix)) == want:
            return True
        if budget == 0:
            return False
        for l in _moves(P1, here):
            if prefix and l == prefix[-1].inverse():
                continue
            nxt = P1.graph.edge_ends(l)[1] if is_edge(l) else here
            if walk(prefix + (l,), nxt, budget - 1):
                return True
        return False

    assert not walk((), "A", 7)


def test_relative_geodesic_modes(P1, P0):
    B = build_ball(P1, 8)
    B.safe_radius = 6
    v = B.locate(parse_word(P1, "a t b t^-1 a", closed=False))
    assert relative_geodesic(B, 0, v, INTRINSIC)[0] == B.dist[v] == 5
    assert relative_geodesic(B, 0, v, ELECTRIFIED)[0] == 2
    assert relative_geodesic(B, 0, v, CONED)[0] == 5
    B0 = build_ball(P0, 6)
    u = B0.locate(parse_word(P0, "a t b^-1", closed=False))
    length, path = relative_geodesic(B0, 0, u, ELECTRIFIED)
    assert length == 1
    assert sum(B0.component[a] != B0.component[b] for a, b in zip(path, path[1:])) == 1


def test_convexity(P1, ball_p2):
    assert convexity_check(build_ball(P1, 6)) == []
    assert convexity_check(ball_p2, max_pair_distance=4) == []


def test_geodesics_and_cells(ball_p1):
    n_pairs, n_geod, orbit_bad, half_bad, frac = geodesic_cell_report(ball_p1, 8)
    assert (n_pairs, n_geod) == (2070, 2074)
    assert orbit_bad == [] and half_bad == []
    assert frac == 0.5
    assert shareboundary_violations(ball_p1) == []


@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_geodesics_have_the_right_length(ball_p1, data):
    B = ball_p1
    core = B.core()
    u = data.draw(st.sampled_from(core))
    v = data.draw(st.sampled_from(core))
    d_v = B.bfs(v)
    paths = all_geodesics(B, u, v, d_v)
    assert paths
    for p in paths:
        assert len(p) == d_v[u]
        here = u
        for eid, sign in p:
            e = B.edges[eid]
            assert here == (e.tail if sign > 0 else e.head)
            here = e.head if sign > 0 else e.tail
        assert here == v
