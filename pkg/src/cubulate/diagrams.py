"""Disk diagrams over a staggered presentation, recorded at the auxiliary level.

Vertex-space regions are points from the start: a diagram keeps only its
essential edges (labelled by essential edges of X), the points between
them, and its essential 2-cells with their boundary cycles.  Each cell also
remembers the vertex-space syllables of its relator so that cancelable
pairs can be recognised.  Identifications made by folding are tracked with
union-find on edges and points.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .presentation import (EdgeLetter, Letter, StaggeredComplex, cyclic_syllables, from_syllables,
                           identity_element, inverse_element, is_identity, multiply, syllables)
from .word_problem import DehnTrace, _relator_cycles

Token = Tuple[int, int]  # (diagram edge id, traversal sign)


class TraceMismatch(ValueError):
    pass


@dataclass
class DiagramCell:
    id: int
    relator: int
    direction: int
    offset: int
    boundary: List[Token]       # essential edges in reading order
    units: List[Tuple[EdgeLetter, tuple]]  # relator units read from ``offset``
    period: int                 # essential edges per period

    @property
    def length(self) -> int:
        return len(self.boundary)

    @property
    def exponent(self) -> int:
        return self.length // self.period

    def position(self, i: int) -> int:
        return (self.offset + i) % self.length % self.period

    def position_class(self, i: int) -> List[int]:
        p = self.position(i)
        return [k for k in range(self.length) if self.position(k) == p]


class Diagram:
    """Essential skeleton of a disk diagram plus its boundary path."""

    def __init__(self, X: StaggeredComplex):
        self.X = X
        self.labels: List[EdgeLetter] = []  # canonical (positive) essential edge
        self.tails: List[int] = []
        self.heads: List[int] = []
        self._ep: List[int] = []
        self._vp: List[int] = []
        self.cells: Dict[int, DiagramCell] = {}
        self._next_cell = 0
        self.boundary: List[Token] = []
        self.boundary_sylls: List[Tuple[str, tuple]] = []

    # union-find -------------------------------------------------------
    def new_vertex(self) -> int:
        self._vp.append(len(self._vp))
        return len(self._vp) - 1

    def vertex(self, v: int) -> int:
        while self._vp[v] != v:
            self._vp[v] = self._vp[self._vp[v]]
            v = self._vp[v]
        return v

    def edge(self, e: int) -> int:
        while self._ep[e] != e:
            self._ep[e] = self._ep[self._ep[e]]
            e = self._ep[e]
        return e

    def new_edge(self, label: EdgeLetter, tail: int, head: int) -> int:
        self.labels.append(EdgeLetter(label.edge, 1))
        self.tails.append(tail)
        self.heads.append(head)
        self._ep.append(len(self._ep))
        return len(self._ep) - 1

    def add_token_edge(self, letter: EdgeLetter, start: int, end: int) -> Token:
        """Edge read as ``letter`` from point ``start`` to point ``end``."""
        if letter.sign > 0:
            return (self.new_edge(letter, start, end), 1)
        return (self.new_edge(letter, end, start), -1)

    def identify_edges(self, e1: int, e2: int):
        a, b = self.edge(e1), self.edge(e2)
        if a == b:
            return
        if self.labels[a] != self.labels[b]:
            raise ValueError("cannot identify edges with different labels")
        self._ep[b] = a
        self.identify_vertices(self.tails[a], self.tails[b])
        self.identify_vertices(self.heads[a], self.heads[b])

    def identify_vertices(self, u: int, v: int):
        a, b = self.vertex(u), self.vertex(v)
        if a != b:
            self._vp[b] = a

    # tokens -----------------------------------------------------------
    def letter(self, t: Token) -> EdgeLetter:
        return EdgeLetter(self.labels[t[0]].edge, t[1])

    def start(self, t: Token) -> int:
        e = self.edge(t[0])
        return self.vertex(self.tails[e] if t[1] > 0 else self.heads[e])

    def end(self, t: Token) -> int:
        e = self.edge(t[0])
        return self.vertex(self.heads[e] if t[1] > 0 else self.tails[e])

    def add_cell(self, relator: int, direction: int, offset: int, boundary: List[Token],
                 units, period: int) -> DiagramCell:
        c = DiagramCell(self._next_cell, relator, direction, offset, list(boundary), list(units), period)
        self.cells[c.id] = c
        self._next_cell += 1
        return c

    @property
    def area(self) -> int:
        return len(self.cells)

    def boundary_word(self) -> Tuple[Letter, ...]:
        """Read the boundary back as a path in X."""
        if not self.boundary:
            if not self.boundary_sylls:
                return ()
            return from_syllables(self.X, self.boundary_sylls, [])
        edges = [self.letter((self.edge(e), s)) for e, s in self.boundary]
        return from_syllables(self.X, self.boundary_sylls, edges)


# ----------------------------------------------------------------------
# constructors


def _cycle(X: StaggeredComplex, rid: int, direction: int):
    for r, d, units, period in _relator_cycles(X):
        if r == rid and d == direction:
            return units, period
    raise KeyError((rid, direction))


def relator_disk(X: StaggeredComplex, rid: int = 0) -> Diagram:
    """A single relator cell whose boundary is the whole diagram boundary."""
    units, period = _cycle(X, rid, 1)
    D = Diagram(X)
    L = len(units)
    pts = [D.new_vertex() for _ in range(L)]
    toks = [D.add_token_edge(units[i][0], pts[i], pts[(i + 1) % L]) for i in range(L)]
    D.add_cell(rid, 1, 0, toks, units, period)
    D.boundary = list(toks)
    D.boundary_sylls = _boundary_sylls(X, units)
    return D


def _boundary_sylls(X: StaggeredComplex, units) -> List[Tuple[str, tuple]]:
    """Syllables of the closed path spelled by ``units``, split at the seam
    into an identity leading syllable and the trailing one."""
    out = []
    first_factor = X.graph.edge_ends(units[0][0])[0]
    out.append((first_factor, identity_element(X.factors[first_factor])))
    for e, g in units:
        out.append((X.graph.edge_ends(e)[1], g))
    return out


def mirror_pair(X: StaggeredComplex, rid: int = 0, position: int = 0) -> Diagram:
    """Two copies of a relator cell, the second reflected, glued along one edge."""
    units, period = _cycle(X, rid, 1)
    L = len(units)
    D = Diagram(X)
    pa = [D.new_vertex() for _ in range(L)]
    ta = [D.add_token_edge(units[i][0], pa[i], pa[(i + 1) % L]) for i in range(L)]
    D.add_cell(rid, 1, 0, ta, units, period)
    # the mirror copy shares the edge at ``position`` and runs the other way
    pb = [D.new_vertex() for _ in range(L)]
    pb[position], pb[(position + 1) % L] = pa[position], pa[(position + 1) % L]
    tb = []
    for i in range(L):
        if i == position:
            tb.append(ta[i])
        else:
            tb.append(D.add_token_edge(units[i][0], pb[i], pb[(i + 1) % L]))
    D.add_cell(rid, 1, 0, tb, units, period)
    # boundary: around the first cell from the shared edge's head, then back
    # around the second
    rest_a = [ta[(position + 1 + i) % L] for i in range(L - 1)]
    rest_b = [(e, -s) for e, s in reversed([tb[(position + 1 + i) % L] for i in range(L - 1)])]
    D.boundary = rest_a + rest_b
    rot = [units[(position + 1 + i) % L] for i in range(L - 1)]
    syl = [(X.graph.edge_ends(units[position][0])[1], units[position][1])]
    for e, g in rot[:-1]:
        syl.append((X.graph.edge_ends(e)[1], g))
    # the turn at the far end of the shared edge is trivial
    last_e = rot[-1][0]
    f = X.graph.edge_ends(last_e)[1]
    spec = X.factors[f]
    syl.append((f, identity_element(spec)))
    for e, g in reversed(rot[:-1]):
        fe = X.graph.edge_ends(e)[1]
        syl.append((fe, inverse_element(X.factors[fe], g)))
    fs = X.graph.edge_ends(units[position][0])[1]
    syl.append((fs, inverse_element(X.factors[fs], units[position][1])))
    # merge the closing syllable into the leading one
    lead_f, lead = syl[0]
    D.boundary_sylls = [(lead_f, multiply(X.factors[lead_f], syl[-1][1], lead))] + syl[1:-1] + \
        [(lead_f, identity_element(X.factors[lead_f]))]
    return D


def internal_cell_instance(X: StaggeredComplex, rid: int = 0) -> Diagram:
    """One relator cell surrounded by a ring of cells, one glued along each of
    its essential edges, so the centre cell is internal.

    Each outer cell meets the centre along an occurrence of the reversed
    letter, which keeps every glued pair non-cancelable.
    """
    units, period = _cycle(X, rid, 1)
    inv_units, _ = _cycle(X, rid, -1)
    L = len(units)
    D = Diagram(X)
    pts = [D.new_vertex() for _ in range(L)]
    centre = [D.add_token_edge(units[i][0], pts[i], pts[(i + 1) % L]) for i in range(L)]
    D.add_cell(rid, 1, 0, centre, units, period)
    outer_paths: List[List[Token]] = []
    outer_sylls: List[List[tuple]] = []
    for i in range(L):
        want = units[i][0]
        # outer cell reads ``want`` backwards: find an occurrence of it in the
        # forward cycle at a different position class, traversed as want^-1
        choice = None
        for cyc, direction in ((units, 1), (inv_units, -1)):
            for k in range(L):
                if cyc[k][0] == want.inverse():
                    choice = (cyc, direction, k)
                    break
            if choice:
                break
        if choice is None:
            raise ValueError("relator never uses an essential letter in both directions")
        cyc, direction, k = choice
        # outer cell read from occurrence k: first unit traverses the centre
        # edge i backwards, from pts[i+1] to pts[i]
        q = [None] * (L + 1)
        q[0], q[1] = pts[(i + 1) % L], pts[i]
        for m in range(2, L):
            q[m] = D.new_vertex()
        q[L] = q[0]
        toks = [(centre[i][0], -centre[i][1])]
        for m in range(1, L):
            toks.append(D.add_token_edge(cyc[(k + m) % L][0], q[m], q[m + 1]))
        rotated = [cyc[(k + m) % L] for m in range(L)]
        D.add_cell(rid, direction, k, toks, rotated, period)
        outer_paths.append(toks[1:])
        outer_sylls.append([g for _, g in rotated])
    # boundary: outer arcs in order around the centre
    D.boundary = [t for path in outer_paths for t in path]
    merged: List[Tuple[str, tuple]] = []
    for i in range(L):
        rot = outer_sylls[i]
        # syllables after each outer edge; the last one meets the next arc
        for m in range(1, L):
            e = outer_paths[i][m - 1]
            f = X.graph.edge_ends(D.letter(e))[1]
            merged.append((f, rot[m]))
    # the syllable at each junction is the outer cell's last syllable followed
    # by the next outer cell's first one (the turn around the shared point)
    for i in range(L):
        j = (i + 1) % L
        idx = i * (L - 1) + (L - 2)
        f, g = merged[idx]
        nxt = outer_sylls[j][0]
        merged[idx] = (f, multiply(X.factors[f], g, nxt))
    lead_f = merged[-1][0]
    D.boundary_sylls = [(lead_f, identity_element(X.factors[lead_f]))] + merged
    return D


# ----------------------------------------------------------------------
# Dehn traces


def _syl_factor(X: StaggeredComplex, e: EdgeLetter) -> str:
    return X.graph.edge_ends(e)[1]


def _reduce_tokens(D: Diagram, toks: List[Tuple[Token, tuple]], single):
    """Fold e g e^-1 with trivial g until the cyclic token list is reduced.

    ``toks`` pairs each boundary token with the syllable after it.
    """
    X = D.X
    changed = True
    while changed and len(toks) >= 2:
        changed = False
        n = len(toks)
        for i in range(n):
            (t1, g1), (t2, g2) = toks[i], toks[(i + 1) % n]
            l1, l2 = D.letter(t1), D.letter(t2)
            if l2 != l1.inverse() or not is_identity(X.factors[_syl_factor(X, l1)], g1):
                continue
            D.identify_edges(t1[0], t2[0])
            if n == 2:
                return [], (_syl_factor(X, l2), g2)
            prev = (i - 1) % n
            tp, gp = toks[prev]
            f = _syl_factor(X, D.letter(tp))
            toks[prev] = (tp, multiply(X.factors[f], gp, g2))
            drop = {i, (i + 1) % n}
            toks = [x for k, x in enumerate(toks) if k not in drop]
            changed = True
            break
    return toks, single


def _labels(D: Diagram, toks) -> list:
    return [(D.letter(t), g) for t, g in toks]


def _align(D: Diagram, toks, units) -> int:
    n = len(toks)
    if n != len(units):
        raise TraceMismatch("diagram boundary and trace disagree in length")
    labels = _labels(D, toks)
    for r in range(n):
        if labels[r:] + labels[:r] == list(units):
            return r
    raise TraceMismatch("diagram boundary and trace disagree")


def diagram_from_trace(X: StaggeredComplex, w: Sequence[Letter], trace: DehnTrace,
                       reduce: bool = True) -> Diagram:
    """Glue one relator cell per trace event onto a boundary reading ``w``."""
    if trace.output:
        raise TraceMismatch("trace does not reduce the word to the empty word")
    D = Diagram(X)
    if not w:
        return D
    sylls, edges = syllables(X, w)
    D.boundary_sylls = list(sylls)
    if not edges:
        return D
    n = len(edges)
    pts = [D.new_vertex() for _ in range(n)]
    D.boundary = [D.add_token_edge(edges[i], pts[i], pts[(i + 1) % n]) for i in range(n)]
    f_last = sylls[-1][0]
    seam = multiply(X.factors[f_last], sylls[-1][1], sylls[0][1])
    toks = [(D.boundary[i], sylls[i + 1][1]) for i in range(n - 1)] + [(D.boundary[-1], seam)]
    toks, single = _reduce_tokens(D, toks, None)
    for ev in trace.events:
        units, _ = cyclic_syllables(X, ev.before)
        r = _align(D, toks, units)
        rot = toks[r:] + toks[:r]
        k, j, o = ev.start, ev.span, ev.offset
        rot = rot[k:] + rot[:k]
        rel, period = _cycle(X, ev.relator, ev.direction)
        L = len(rel)
        s = lambda i: rel[(o + i) % L]
        # cell points: W[i] sits before relator unit i
        W: List[Optional[int]] = [None] * (L + 1)
        W[0] = D.start(rot[0][0])
        for i in range(1, j + 1):
            W[i] = D.end(rot[i - 1][0])
        for i in range(j + 1, L):
            W[i] = D.new_vertex()
        if j == L:
            D.identify_vertices(W[L], W[0])
        W[L] = W[0]
        boundary = [rot[i][0] for i in range(j)]
        for i in range(j, L):
            boundary.append(D.add_token_edge(s(i)[0], W[i], W[i + 1]))
        D.add_cell(ev.relator, ev.direction, o, boundary, [s(i) for i in range(L)], period)
        # new cyclic word: inverse of the unmatched part, then the rest
        items: List[tuple] = []
        f = _syl_factor(X, s(L - 1)[0])
        items.append(("s", f, inverse_element(X.factors[f], s(L - 1)[1])))
        for i in range(L - 1, j - 1, -1):
            tok = boundary[i]
            items.append(("e", (tok[0], -tok[1])))
            f = _syl_factor(X, s(i - 1)[0])
            items.append(("s", f, inverse_element(X.factors[f], s(i - 1)[1])))
        items.append(("s", _syl_factor(X, D.letter(rot[j - 1][0])), rot[j - 1][1]))
        for i in range(j, len(rot)):
            items.append(("e", rot[i][0]))
            items.append(("s", _syl_factor(X, D.letter(rot[i][0])), rot[i][1]))
        toks, single = _from_items(X, items)
        toks, single = _reduce_tokens(D, toks, single)
    if toks:
        raise TraceMismatch("trace ended with essential edges left")
    if reduce:
        D = reduce_diagram(D)
    return D


def _from_items(X, items):
    """Merge consecutive syllables; the seam joins the last to the first."""
    toks: List[list] = []
    lead = None
    for it in items:
        if it[0] == "s":
            _, f, g = it
            if toks:
                t, h = toks[-1]
                toks[-1] = [t, g if h is None else multiply(X.factors[f], h, g)]
            elif lead is None:
                lead = (f, g)
            else:
                lead = (f, multiply(X.factors[f], lead[1], g))
        else:
            toks.append([it[1], None])
    if not toks:
        return [], lead
    f, g = lead
    t, h = toks[-1]
    toks[-1] = [t, multiply(X.factors[f], h, g)]
    return [tuple(x) for x in toks], None


# ----------------------------------------------------------------------
# cancelable pairs and folding


def _read(cell: DiagramCell, i: int, forward: bool, X: StaggeredComplex):
    """Unit labels of ``cell`` read from occurrence ``i``; backwards reading
    traverses that occurrence reversed and pairs each edge with the inverse
    of the syllable before it."""
    L = cell.length
    if forward:
        return [cell.units[(i + m) % L] for m in range(L)]
    out = []
    for m in range(L):
        e, _ = cell.units[(i - m) % L]
        pe, pg = cell.units[(i - m - 1) % L]
        f = _syl_factor(X, pe)
        out.append((e.inverse(), inverse_element(X.factors[f], pg)))
    return out


def detect_cancelable_pair(D: Diagram) -> Optional[Tuple[int, int, int, int, bool]]:
    """``(alpha, beta, i, i2, same_direction)``: the cells share an edge at
    their occurrences ``i`` and ``i2`` and read identical labels from it."""
    where: Dict[int, List[Tuple[int, int, int]]] = {}
    for c in D.cells.values():
        for i, (e, s) in enumerate(c.boundary):
            where.setdefault(D.edge(e), []).append((c.id, i, s))
    for e in sorted(where):
        occ = where[e]
        for a in range(len(occ)):
            for b in range(a + 1, len(occ)):
                ca, ia, sa = occ[a]
                cb, ib, sb = occ[b]
                if ca == cb:
                    continue
                A, Bc = D.cells[ca], D.cells[cb]
                if A.length != Bc.length:
                    continue
                same = sa == sb
                ra = _read(A, ia, True, D.X)
                rb = _read(Bc, ib, same, D.X)
                if ra == rb:
                    return (ca, cb, ia, ib, same)
    return None


def fold_pair(D: Diagram, pair, in_place: bool = False) -> Diagram:
    """Identify the second cell's boundary with the first's and drop it."""
    if not in_place:
        D = copy.deepcopy(D)
    ca, cb, ia, ib, same = pair
    A, Bc = D.cells[ca], D.cells[cb]
    L = A.length
    for m in range(L):
        ta = A.boundary[(ia + m) % L]
        tb = Bc.boundary[(ib + m) % L] if same else Bc.boundary[(ib - m) % L]
        D.identify_edges(ta[0], tb[0])
    del D.cells[cb]
    return D


def reduce_diagram(D: Diagram) -> Diagram:
    while True:
        pair = detect_cancelable_pair(D)
        if pair is None:
            return D
        D = fold_pair(D, pair, in_place=True)


# ----------------------------------------------------------------------
# auxiliary diagram and classification


@dataclass
class AuxiliaryDiagram:
    points: Set[int]
    edges: Dict[int, Tuple[int, int, EdgeLetter]]
    cells: Dict[int, List[Token]]
    boundary: List[Token]
    cell_points: Dict[int, Set[int]] = field(default_factory=dict)
    cell_edges: Dict[int, Set[int]] = field(default_factory=dict)

    def adjacency(self) -> Dict[int, Set[int]]:
        """Cells whose closures meet."""
        out = {c: set() for c in self.cells}
        ids = sorted(self.cells)
        for a in ids:
            for b in ids:
                if a < b and (self.cell_points[a] & self.cell_points[b]):
                    out[a].add(b)
                    out[b].add(a)
        return out


def auxiliary(D: Diagram) -> AuxiliaryDiagram:
    edges = {}
    for e in range(len(D.labels)):
        r = D.edge(e)
        edges[r] = (D.vertex(D.tails[r]), D.vertex(D.heads[r]), D.labels[r])
    cells, cp, ce = {}, {}, {}
    for c in D.cells.values():
        toks = [(D.edge(e), s) for e, s in c.boundary]
        cells[c.id] = toks
        ce[c.id] = {e for e, _ in toks}
        cp[c.id] = {D.start(t) for t in toks} | {D.end(t) for t in toks}
    points = {D.vertex(v) for v in range(len(D._vp))}
    boundary = [(D.edge(e), s) for e, s in D.boundary]
    return AuxiliaryDiagram(points, edges, cells, boundary, cp, ce)


def classify_cells(D: Diagram) -> Dict[int, dict]:
    A = auxiliary(D)
    on_boundary = {e for e, _ in A.boundary}
    out = {}
    for c in D.cells.values():
        toks = A.cells[c.id]
        L = c.length
        external = any(e in on_boundary for e, _ in toks)
        exposed_classes = []
        for p in range(c.period):
            members = [i for i in range(L) if c.position(i) == p]
            if all(toks[i][0] in on_boundary for i in members):
                exposed_classes.append(members)
        others_e: Set[int] = set()
        others_p: Set[int] = set()
        for d in D.cells.values():
            if d.id != c.id:
                others_e |= A.cell_edges[d.id]
                others_p |= A.cell_points[d.id]
        arc = None
        for members in exposed_classes:
            for a, b in zip(members, members[1:] + members[:1]):
                # arc from occurrence b around to occurrence a, skipping the
                # gap between a and b
                span = (a - b) % L + 1
                idx = [(b + m) % L for m in range(span)]
                inner = [D.end(toks[i]) for i in idx[:-1]]
                if any(toks[i][0] in others_e for i in idx):
                    continue
                if any(v in others_p for v in inner):
                    continue
                arc = idx
                break
            if arc is not None:
                break
        out[c.id] = {
            "relator": c.relator,
            "exponent": c.exponent,
            "external": external,
            "exposed": bool(exposed_classes),
            "extreme": arc is not None,
            "extreme_arc": arc,
        }
    return out


def spelling_audit(D: Diagram) -> dict:
    cls = classify_cells(D)
    extreme = sorted(c for c, r in cls.items() if r["extreme"])
    internal = sorted(c for c, r in cls.items() if not r["external"])
    checks = []
    if len(cls) >= 2:
        checks.append({"claim": "at least two extreme cells", "need": 2, "have": len(extreme),
                       "ok": len(extreme) >= 2})
    if internal:
        n = max(cls[c]["exponent"] for c in internal)
        checks.append({"claim": "internal cell forces 2n extreme cells", "need": 2 * n,
                       "have": len(extreme), "ok": len(extreme) >= 2 * n})
    return {"cells": len(cls), "extreme": extreme, "internal": internal, "checks": checks,
            "ok": all(c["ok"] for c in checks)}


def diagram_to_dot(D: Diagram) -> str:
    A = auxiliary(D)
    lines = ["graph diagram {"]
    for v in sorted(A.points):
        lines.append(f'  p{v} [shape=point];')
    for e, (u, v, lab) in sorted(A.edges.items()):
        lines.append(f'  p{u} -- p{v} [label="{D.X.letter_name(lab)}"];')
    for c, toks in sorted(A.cells.items()):
        lines.append(f'  c{c} [shape=box, label="cell {c}"];')
        for v in sorted(A.cell_points[c]):
            lines.append(f'  c{c} -- p{v} [style=dotted];')
    lines.append("}")
    return "\n".join(lines)
