import itertools

import pytest
from hypothesis import given, settings, strategies as st

from cubulate.acceptance import ball
from cubulate.dual_cube import (
    build_dual,
    consistent,
    dual_report,
    flip,
    halfspace_system,
    npc_link_check,
    principal_orientation,
    properness_witness,
    restricted_tree_check,
    vertex_space_halfspaces,
)
from cubulate.walls import separating_wall_count


@pytest.fixture(scope="module")
def dual_p1(ball_p1):
    return build_dual(halfspace_system(ball_p1))


def _essential_only(B):
    return lambda w: all(B.edges[e].essential for e in w.crossings)


def test_principal_orientation_in_a_tree():
    B = ball("P0", 3)
    H = halfspace_system(B, select=_essential_only(B))
    base = principal_orientation(H, 0)
    for i, w in enumerate(H.walls):
        e = B.edges[min(w.crossings)]
        # side 0 holds the tail of the lowest crossing edge
        toward = 0 if B.dist[e.tail] < B.dist[e.head] else 1
        assert base[i] == toward


def test_adjacent_orientations_differ_on_the_joining_walls(ball_p1):
    B = ball_p1
    H = halfspace_system(B)
    for u in B.core()[:12]:
        for v, eid in B.adj[u].values():
            if not B.in_core(v):
                continue
            diff = {i for i, (a, b) in enumerate(zip(principal_orientation(H, u), principal_orientation(H, v))) if a != b}
            assert diff == {i for i, w in enumerate(H.walls) if eid in w.crossings}
    assert principal_orientation(H, 0) == principal_orientation(H, 0)


def test_p0_restricted_dual_is_the_tree():
    B = ball("P0", 3)
    D = build_dual(halfspace_system(B, select=_essential_only(B)))
    assert restricted_tree_check(D)
    assert npc_link_check(D) == []
    assert D.max_cube_dim == 1


def test_p0_full_dual():
    B = ball("P0", 3)
    rep = dual_report(build_dual(halfspace_system(B)))
    assert (rep["zero_cubes"], rep["one_cubes"], rep["walls"], rep["hyperplanes"]) == (4, 3, 3, 3)


def test_p1_dual(dual_p1):
    rep = dual_report(dual_p1)
    assert rep["connected"]
    assert rep["link_violations"] == []
    assert rep["cubes_by_dimension"] == {"0": 85, "1": 114, "2": 30}
    assert rep["hyperplanes"] == rep["walls"] == 54


def test_p1_distances_match_separation(dual_p1, ball_p1):
    core = ball_p1.core()
    rows = properness_witness(dual_p1, [(core[0], v) for v in core[1:]])
    assert all(r["dual_distance"] == r["separating_walls"] for r in rows)
    far = max(rows, key=lambda r: r["distance"])
    assert far["dual_distance"] == separating_wall_count(ball_p1, far["x"], far["y"], complete_only=True)


def test_z2_piece_squares_match_crossings(ball_p2):
    H = vertex_space_halfspaces(ball_p2, ball_p2.component[0])
    D = build_dual(H)
    crossings = sum(H.cross(i, j) for i, j in itertools.combinations(range(len(H)), 2))
    squares = sum(all(ball_p2.component[ball_p2.edges[e].tail] == ball_p2.component[0] for e, _ in sq.boundary)
                  for sq in ball_p2.squares)
    assert D.cubes[2] == crossings == squares == 60
    assert len(D.zero_cubes) == len(H.points) == 85
    assert npc_link_check(D) == []


def test_single_square_passes_link_check(ball_p2):
    B = ball_p2
    H = vertex_space_halfspaces(B, B.component[0])
    i, j = next((i, j) for i, j in itertools.combinations(range(len(H)), 2) if H.cross(i, j))
    D = build_dual(type(H)(B, [H.walls[i], H.walls[j]], H.points, [H.halfspaces[i], H.halfspaces[j]],
                           [H.side[i], H.side[j]]))
    assert D.cubes == {0: 4, 1: 4, 2: 1}
    assert npc_link_check(D) == []


def test_p2_dual(ball_p2):
    rep = dual_report(build_dual(halfspace_system(ball_p2)))
    assert rep["connected"] and rep["link_violations"] == []
    assert rep["hyperplanes"] == rep["walls"] == 8


@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_principal_orientations_consistent(dual_p1, data):
    H = dual_p1.H
    x = data.draw(st.sampled_from(H.points))
    o = principal_orientation(H, x)
    assert consistent(H, o)
    i = data.draw(st.integers(0, len(H) - 1))
    assert flip(flip(o, i), i) == o


@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_dual_distance_is_a_metric(dual_p1, data):
    D = dual_p1
    a, b, c = (data.draw(st.integers(0, len(D.zero_cubes) - 1)) for _ in range(3))
    assert D.distance(a, b) == D.distance(b, a)
    assert D.distance(a, c) <= D.distance(a, b) + D.distance(b, c)
    # distance between 0-cubes is the number of walls on which they differ
    assert D.distance(a, b) == sum(x != y for x, y in zip(D.zero_cubes[a], D.zero_cubes[b]))
