import pytest
from hypothesis import given, settings, strategies as st

from cubulate.diagrams import (
    auxiliary,
    classify_cells,
    detect_cancelable_pair,
    diagram_from_trace,
    diagram_to_dot,
    fold_pair,
    internal_cell_instance,
    mirror_pair,
    reduce_diagram,
    relator_disk,
    spelling_audit,
)
from cubulate.presentation import builtin, invert, normalize, parse_word
from cubulate.word_problem import dehn_reduce, is_trivial, trivial_corpus


def _from_word(X, w):
    return diagram_from_trace(X, w, dehn_reduce(X, w))


def test_mirror_pair_folds_to_one_cell(P1):
    M = mirror_pair(P1, 0, 1)
    pair = detect_cancelable_pair(M)
    assert pair is not None
    F = fold_pair(M, pair)
    assert M.area - F.area == 1
    assert detect_cancelable_pair(F) is None
    assert F.boundary_word() == M.boundary_word()
    assert reduce_diagram(M).area == 1


def test_single_cell(P1):
    D = relator_disk(P1)
    assert detect_cancelable_pair(D) is None
    A = auxiliary(D)
    assert len(A.cells[0]) == 8
    assert len(A.points) == 8
    cls = classify_cells(D)[0]
    assert cls["exposed"] and cls["extreme"]
    assert cls["extreme_arc"] == [2, 3, 4, 5, 6, 7, 0]
    audit = spelling_audit(D)
    assert audit["ok"] and audit["checks"] == []


def test_empty_word(P1):
    D = _from_word(P1, ())
    assert D.area == 0 and D.boundary_word() == ()


def _two_conjugates(X):
    r = X.relators[0].word
    u = parse_word(X, "a t b t^-1 a", closed=False)
    v = parse_word(X, "t b^2 t^-1", closed=False)
    return tuple(u) + r + invert(u) + tuple(v) + invert(r) + invert(v)


def test_two_cell_diagram_both_extreme(P1):
    D = _from_word(P1, _two_conjugates(P1))
    assert D.area == 2
    assert all(c["extreme"] for c in classify_cells(D).values())
    A = auxiliary(D)
    assert A.cell_points[0] & A.cell_points[1] or A.adjacency()


def test_three_event_trace(P1):
    w = _two_conjugates(P1)
    u = parse_word(P1, "a^-1 t b^-1 t^-1", closed=False)
    w = w + tuple(u) + P1.relators[0].word + invert(u)
    trace = dehn_reduce(P1, w)
    D = diagram_from_trace(P1, w, trace)
    assert trace.area == 3 and D.area <= 3
    assert normalize(P1, D.boundary_word()) == normalize(P1, w)
    assert len(spelling_audit(D)["extreme"]) >= 2


def test_internal_cell_instance(P1):
    D = internal_cell_instance(P1)
    bw = D.boundary_word()
    assert len(bw) == 120
    assert is_trivial(P1, bw)
    assert detect_cancelable_pair(D) is None
    audit = spelling_audit(D)
    assert audit["internal"] == [0]
    assert not classify_cells(D)[0]["extreme"]
    assert len(audit["extreme"]) == 8 >= 2 * P1.n
    assert audit["ok"]


@pytest.mark.parametrize("name, seed", [("P1", 0), ("P2", 1)])
def test_corpus_diagrams(name, seed):
    X = builtin(name)
    for w in trivial_corpus(X, 120, seed=seed):
        trace = dehn_reduce(X, w)
        D = diagram_from_trace(X, w, trace)
        assert D.area == trace.area
        assert detect_cancelable_pair(D) is None
        assert spelling_audit(D)["ok"]


def test_dot(P1):
    dot = diagram_to_dot(relator_disk(P1))
    assert dot.startswith("graph diagram {") and dot.count("shape=box") == 1


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), name=st.sampled_from(["P1", "P2"]))
def test_boundary_reads_back_the_word(seed, name):
    X = builtin(name)
    (w,) = trivial_corpus(X, 1, seed=seed)
    D = _from_word(X, w)
    assert normalize(X, D.boundary_word()) == normalize(X, w)
    if D.area >= 2:
        assert len(spelling_audit(D)["extreme"]) >= 2
