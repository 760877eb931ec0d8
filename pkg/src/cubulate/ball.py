"""Finite balls in the coned universal cover.

Vertices are 0-cells of the universal cover, labelled by a normalized edge
path from the base 0-cell.  Two labels name the same vertex exactly when
the closed path ``u v^-1`` is trivial; candidates are bucketed by their
images in finite permutation quotients before the word problem is asked.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .presentation import (
    ABELIAN,
    EdgeLetter,
    FactorLetter,
    Letter,
    StaggeredComplex,
    Word,
    is_edge,
    normalize,
)
from .word_problem import (
    DEHN,
    ELECTRIFIED,
    INTRINSIC,
    CONED,
    _moves,
    _presentation,
    are_equal,
    permutation_quotients,
    quotient_image,
)


class OutsideSafeCore(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    id: int
    tail: int
    head: int
    letter: Letter  # positive orientation, tail -> head

    @property
    def essential(self) -> bool:
        return is_edge(self.letter)


@dataclass
class EssentialCellInstance:
    id: int
    relator: int
    key: frozenset  # located (vertex, position mod period) pairs; identifies the cell
    base: Optional[int]
    boundary: List[Tuple[Optional[int], int]]  # (edge id or None if outside, traversal sign)
    vertices: List[Optional[int]]  # vertex before each occurrence, None if outside
    period: int
    exponent: int
    complete: bool = True

    @property
    def length(self) -> int:
        return len(self.boundary)

    def position_class(self, occ: int) -> List[int]:
        return position_class(self, occ)


def position_class(c: EssentialCellInstance, occ: int) -> List[int]:
    L = c.length
    if not 0 <= occ < L:
        raise ValueError("occurrence index out of range")
    return sorted((occ + j * c.period) % L for j in range(c.exponent))


@dataclass
class Square:
    id: int
    boundary: List[Tuple[int, int]]  # e1 f1 e2^-1 f2^-1
    factor: str
    gens: Tuple[int, int]


@dataclass
class BallComplex:
    X: StaggeredComplex
    radius: int
    labels: List[Word] = field(default_factory=list)
    factor_of: List[str] = field(default_factory=list)
    dist: List[int] = field(default_factory=list)
    component: List[int] = field(default_factory=list)
    edges: List[Edge] = field(default_factory=list)
    squares: List[Square] = field(default_factory=list)
    cells: List[EssentialCellInstance] = field(default_factory=list)
    adj: List[Dict[Letter, Tuple[int, int]]] = field(default_factory=list)  # letter -> (vertex, edge id)
    safe_radius: int = 0
    keys: List[tuple] = field(default_factory=list)

    @property
    def W_X(self) -> int:
        return self.X.W

    def locate(self, w: Word, h: Optional[tuple] = None) -> Optional[int]:
        """Ball vertex equal to the endpoint of path ``w``, if any."""
        if h is None:
            h = _hash(self.X, self._reps, w)
        for v in self._buckets.get(h, ()):
            if self.labels[v] == w or are_equal(self.X, self.labels[v], w, self._mode):
                return v
        return None

    def complete_cells(self) -> List["EssentialCellInstance"]:
        return [c for c in self.cells if c.complete]

    def __len__(self) -> int:
        return len(self.labels)

    def neighbors(self, v: int) -> Iterable[int]:
        return (u for u, _ in self.adj[v].values())

    def in_core(self, v: int) -> bool:
        return self.dist[v] <= self.safe_radius

    def core(self) -> List[int]:
        return [v for v in range(len(self)) if self.in_core(v)]

    def follow(self, v: int, w: Sequence[Letter]) -> Optional[int]:
        for l in w:
            nxt = self.adj[v].get(l)
            if nxt is None:
                return None
            v = nxt[0]
        return v

    def bfs(self, src: int, allowed: Optional[Set[int]] = None) -> List[int]:
        d = [-1] * len(self)
        d[src] = 0
        q = deque([src])
        while q:
            v = q.popleft()
            for u, _ in self.adj[v].values():
                if d[u] < 0 and (allowed is None or u in allowed):
                    d[u] = d[v] + 1
                    q.append(u)
        return d

    def edge_between(self, v: int, letter: Letter) -> Optional[Tuple[int, int]]:
        return self.adj[v].get(letter)

    # ------------------------------------------------------------------
    # incidence

    def cells_on_edge(self) -> Dict[int, List[Tuple[int, int]]]:
        cached = self.__dict__.get("_cells_on_edge")
        if cached is None:
            cached = {}
            for c in self.cells:
                for occ, (e, _) in enumerate(c.boundary):
                    if e is not None:
                        cached.setdefault(e, []).append((c.id, occ))
            self.__dict__["_cells_on_edge"] = cached
        return cached

    def squares_on_edge(self) -> Dict[int, List[Tuple[int, int]]]:
        cached = self.__dict__.get("_squares_on_edge")
        if cached is None:
            cached = {}
            for s in self.squares:
                for occ, (e, _) in enumerate(s.boundary):
                    cached.setdefault(e, []).append((s.id, occ))
            self.__dict__["_squares_on_edge"] = cached
        return cached


def _hash(X: StaggeredComplex, reps, w: Word, parent: Optional[tuple] = None) -> tuple:
    """Bucket key: end vertex space plus images in the finite quotients.

    With ``parent`` (the key of ``w`` minus its last letter) the image is
    extended by one letter instead of recomputed.
    """
    if parent is not None:
        return (X.end_factor(w, X.graph.base),
                quotient_image(reps, _presentation(X).encode(w[-1:]), parent[1]))
    return (X.end_factor(w, X.graph.base), quotient_image(reps, _presentation(X).encode(w)))


def build_ball(X: StaggeredComplex, R: int, mode: str = DEHN, safe_margin: Optional[int] = None) -> BallComplex:
    """All vertices within distance ``R`` of the base vertex, with every edge,
    square and essential cell whose boundary lies in the ball."""
    if R < 0:
        raise ValueError("radius must be nonnegative")
    reps = permutation_quotients(X)
    B = BallComplex(X, R)
    buckets: Dict[tuple, List[int]] = {}
    B._buckets, B._reps, B._mode = buckets, reps, mode

    def lookup(w: Word, h) -> Optional[int]:
        for v in buckets.get(h, ()):
            if B.labels[v] == w or are_equal(X, B.labels[v], w, mode):
                return v
        return None

    def add(w: Word, h, d: int) -> int:
        v = len(B.labels)
        B.keys.append(h)
        B.labels.append(w)
        B.factor_of.append(X.end_factor(w, X.graph.base))
        B.dist.append(d)
        B.adj.append({})
        buckets.setdefault(h, []).append(v)
        return v

    add((), _hash(X, reps, ()), 0)
    edge_keys: Dict[Tuple[int, int, Letter], int] = {}
    i = 0
    while i < len(B.labels):
        v = i
        i += 1
        for l in _moves(X, B.factor_of[v]):
            if l in B.adj[v]:
                continue
            w = normalize(X, B.labels[v] + (l,), X.graph.base)
            h = _hash(X, reps, B.labels[v] + (l,), B.keys[v])
            u = lookup(w, h)
            if u is None:
                if B.dist[v] >= R:
                    continue
                u = add(w, h, B.dist[v] + 1)
            pos = l if l.sign > 0 else l.inverse()
            tail, head = (v, u) if l.sign > 0 else (u, v)
            key = (tail, head, pos)
            eid = edge_keys.get(key)
            if eid is None:
                eid = len(B.edges)
                edge_keys[key] = eid
                B.edges.append(Edge(eid, tail, head, pos))
            B.adj[v][l] = (u, eid)
            B.adj[u][l.inverse()] = (v, eid)

    # vertex-space components
    parent = list(range(len(B.labels)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in B.edges:
        if not e.essential:
            parent[find(e.head)] = find(e.tail)
    roots: Dict[int, int] = {}
    B.component = [roots.setdefault(find(v), len(roots)) for v in range(len(B.labels))]

    _add_squares(B)
    _add_cells(B)
    B.safe_radius = R // 2 if safe_margin is None else R - safe_margin
    return B


def _add_squares(B: BallComplex):
    X = B.X
    for v in range(len(B)):
        f = X.factors[B.factor_of[v]]
        if f.kind != ABELIAN:
            continue
        for i in range(f.rank):
            for j in range(i + 1, f.rank):
                xi, xj = FactorLetter(f.id, i, 1), FactorLetter(f.id, j, 1)
                a = B.adj[v].get(xi)
                b = B.adj[v].get(xj)
                if a is None or b is None:
                    continue
                c = B.adj[a[0]].get(xj)
                d = B.adj[b[0]].get(xi)
                if c is None or d is None or c[0] != d[0]:
                    continue
                B.squares.append(Square(len(B.squares), [(a[1], 1), (c[1], 1), (d[1], -1), (b[1], -1)], f.id, (i, j)))


def _add_cells(B: BallComplex):
    """Every essential cell instance with at least one boundary edge in the ball.

    A cell is determined by one boundary edge together with the position of
    that edge in the attaching word.  Its remaining boundary vertices are
    found by walking the attaching word, through the ball where possible and
    by exact lookup otherwise.
    """
    X = B.X
    seen: Set[frozenset] = set()
    for rid, r in enumerate(X.relators):
        word = r.word
        L, P = len(word), len(r.period)
        for e in B.edges:
            for q in range(P):
                l = word[q]
                if l == e.letter:
                    tail = e.tail
                elif l == e.letter.inverse():
                    tail = e.head
                else:
                    continue
                verts = _walk_cell(B, tail, word, q)
                key = frozenset([("r", rid)]) | frozenset(
                    (v, k % P) for k, v in enumerate(verts) if v is not None)
                if key in seen:
                    continue
                seen.add(key)
                boundary = []
                for k in range(L):
                    a, b = verts[k], verts[(k + 1) % L]
                    hop = B.adj[a].get(word[k]) if a is not None else None
                    if hop is not None and hop[0] == b:
                        boundary.append((hop[1], word[k].sign))
                    else:
                        boundary.append((None, word[k].sign))
                complete = all(eid is not None for eid, _ in boundary)
                B.cells.append(EssentialCellInstance(
                    len(B.cells), rid, key, verts[0], boundary, verts, P, r.exponent, complete))


def _walk_cell(B: BallComplex, v0: int, word: Word, q: int) -> List[Optional[int]]:
    """Vertices before each occurrence of the cell whose occurrence q starts at v0."""
    X = B.X
    L = len(word)
    verts: List[Optional[int]] = [None] * L
    labels: List[Optional[Word]] = [None] * L
    keys: List[Optional[tuple]] = [None] * L
    verts[q] = v0
    labels[q], keys[q] = B.labels[v0], B.keys[v0]
    for step in range(1, L):
        k = (q + step) % L
        prev = (k - 1) % L
        pv = verts[prev]
        hop = B.adj[pv].get(word[prev]) if pv is not None else None
        if hop is not None:
            verts[k] = hop[0]
            labels[k], keys[k] = B.labels[hop[0]], B.keys[hop[0]]
        else:
            raw = labels[prev] + (word[prev],)
            keys[k] = _hash(X, B._reps, raw, keys[prev])
            labels[k] = normalize(X, raw, X.graph.base)
            verts[k] = B.locate(labels[k], keys[k])
    return verts


# --------------------------------------------------------------------------
# geodesics and cell reports


def _require_core(B: BallComplex, *vs: int):
    for v in vs:
        if not B.in_core(v):
            raise OutsideSafeCore(f"vertex {v} is outside the safe core")


def geodesic(B: BallComplex, u: int, v: int) -> List[Tuple[int, int]]:
    """A shortest edge path from u to v as (edge id, direction) pairs."""
    _require_core(B, u, v)
    d = B.bfs(v)
    if d[u] < 0:
        raise ValueError("vertices are not connected in the ball")
    path = []
    cur = u
    while cur != v:
        for l in sorted(B.adj[cur], key=_letter_key):
            w, eid = B.adj[cur][l]
            if d[w] == d[cur] - 1:
                path.append((eid, 1 if l.sign > 0 else -1))
                cur = w
                break
    return path


def _letter_key(l: Letter):
    return (0, l.factor, l.gen, -l.sign) if not is_edge(l) else (1, l.edge, "", -l.sign)


def geodesic_word(B: BallComplex, u: int, v: int) -> Word:
    out = []
    for eid, s in geodesic(B, u, v):
        l = B.edges[eid].letter
        out.append(l if s > 0 else l.inverse())
    return tuple(out)


def all_geodesics(B: BallComplex, u: int, v: int, dist_from_v: Optional[List[int]] = None,
                  limit: int = 100000) -> List[List[Tuple[int, int]]]:
    """Every shortest edge path from u to v inside the ball."""
    d = dist_from_v if dist_from_v is not None else B.bfs(v)
    out: List[List[Tuple[int, int]]] = []
    stack = [(u, [])]
    while stack:
        cur, path = stack.pop()
        if cur == v:
            out.append(path)
            if len(out) > limit:
                raise RuntimeError("too many geodesics")
            continue
        for l, (w, eid) in B.adj[cur].items():
            if d[w] == d[cur] - 1:
                stack.append((w, path + [(eid, 1 if l.sign > 0 else -1)]))
    return out


def relative_geodesic(B: BallComplex, u: int, v: int, mode: str = INTRINSIC,
                      syllable_metric=None) -> Tuple[float, List[int]]:
    """Vertex sequence of a path minimizing relative length.

    Vertex-space moves are contracted: inside a component a single hop
    between any two vertices costs the chosen pseudometric.  Returns the
    relative length and the vertex sequence.
    """
    import heapq

    _require_core(B, u, v)
    comp_members: Dict[int, List[int]] = {}
    for x in range(len(B)):
        comp_members.setdefault(B.component[x], []).append(x)
    intrinsic = None
    if mode == INTRINSIC:
        intrinsic = {}
    best = {u: 0.0}
    prev: Dict[int, int] = {}
    heap = [(0.0, u)]
    while heap:
        d, x = heapq.heappop(heap)
        if d > best.get(x, float("inf")):
            continue
        if x == v:
            break
        steps = []
        for l, (y, _) in B.adj[x].items():
            if is_edge(l):
                steps.append((y, 1.0))
            elif mode == INTRINSIC:
                steps.append((y, 1.0))
        if mode != INTRINSIC:
            for y in comp_members[B.component[x]]:
                if y == x:
                    continue
                if mode == ELECTRIFIED:
                    c = 0.0
                elif mode == CONED:
                    c = 1.0
                else:
                    if syllable_metric is None:
                        raise ValueError("horoball mode needs a syllable metric")
                    c = float(syllable_metric(B, x, y))
                steps.append((y, c))
        for y, c in steps:
            nd = d + c
            if nd < best.get(y, float("inf")) - 1e-12:
                best[y] = nd
                prev[y] = x
                heapq.heappush(heap, (nd, y))
    path = [v]
    while path[-1] != u:
        path.append(prev[path[-1]])
    return best[v], path[::-1]


def convexity_check(B: BallComplex, max_pair_distance: Optional[int] = None,
                    vertices: Optional[Iterable[int]] = None) -> List[Tuple[int, int]]:
    """Pairs in one vertex-space component joined by a geodesic that leaves it."""
    pool = list(vertices) if vertices is not None else B.core()
    by_comp: Dict[int, List[int]] = {}
    for v in pool:
        by_comp.setdefault(B.component[v], []).append(v)
    violations = []
    for comp, vs in by_comp.items():
        if len(vs) < 2:
            continue
        members = {x for x in range(len(B)) if B.component[x] == comp}
        for a in vs:
            d_all = B.bfs(a)
            d_in = B.bfs(a, members)
            for b in vs:
                if b <= a:
                    continue
                if max_pair_distance is not None and d_all[b] > max_pair_distance:
                    continue
                # some geodesic leaves the component iff the in-component
                # distance exceeds the ball distance, or a shortest path
                # can step out and come back at the same length
                if d_in[b] != d_all[b] or _geodesic_leaves(B, a, b, d_all, members):
                    violations.append((a, b))
    return violations


def _geodesic_leaves(B: BallComplex, a: int, b: int, d_a: List[int], members: Set[int]) -> bool:
    d_b = B.bfs(b)
    total = d_a[b]
    for x in range(len(B)):
        if x not in members and d_a[x] >= 0 and d_b[x] >= 0 and d_a[x] + d_b[x] == total:
            return True
    return False


def geodesic_cell_report(B: BallComplex, max_distance: int = 8, pairs: Optional[Iterable[Tuple[int, int]]] = None):
    """Exhaustive check of geodesics against essential cell boundaries.

    For every pair of core vertices within ``max_distance`` and every
    geodesic joining them, records any geodesic that contains a complete
    position class of a cell, or more than half of a cell's essential
    edges.  Returns ``(pairs_checked, geodesics_checked, orbit_violations,
    half_violations, max_fraction)``.
    """
    cell_edges = B.cells_on_edge()
    ess_count = {c.id: B.X.relators[c.relator].essential_count for c in B.cells}
    core = B.core()
    orbit_bad, half_bad = [], []
    n_pairs = n_geod = 0
    max_frac = 0.0
    if pairs is None:
        pair_iter = []
        for a in core:
            d = B.bfs(a)
            for b in core:
                if b != a and 0 <= d[b] <= max_distance:
                    pair_iter.append((a, b))
    else:
        pair_iter = list(pairs)
    dist_cache: Dict[int, List[int]] = {}
    for a, b in pair_iter:
        if b not in dist_cache:
            dist_cache[b] = B.bfs(b)
        geods = all_geodesics(B, a, b, dist_cache[b])
        n_pairs += 1
        for g in geods:
            n_geod += 1
            per_cell: Dict[int, Set[int]] = {}
            for eid, _ in g:
                for cid, occ in cell_edges.get(eid, ()):
                    per_cell.setdefault(cid, set()).add(occ)
            for cid, occs in per_cell.items():
                c = B.cells[cid]
                if c.exponent > 1:
                    for occ in occs:
                        if set(position_class(c, occ)) <= occs:
                            orbit_bad.append((a, b, cid, occ))
                            break
                ess = sum(1 for o in occs if B.edges[c.boundary[o][0]].essential)
                if ess_count[cid]:
                    max_frac = max(max_frac, ess / ess_count[cid])
                if 2 * ess > ess_count[cid]:
                    half_bad.append((a, b, cid, ess))
    return n_pairs, n_geod, orbit_bad, half_bad, max_frac


def shareboundary_violations(B: BallComplex) -> List[Tuple[int, int, int]]:
    """Distinct cells where a cell's boundary holds two members of a position class of another."""
    cell_edges = B.cells_on_edge()
    out = []
    for a in B.cells:
        for occ in range(a.period):
            cls = position_class(a, occ)
            others: Dict[int, int] = {}
            for o in cls:
                eid = a.boundary[o][0]
                if eid is None:
                    continue
                for cid, _ in cell_edges.get(eid, ()):
                    if cid != a.id:
                        others[cid] = others.get(cid, 0) + 1
            for cid, k in others.items():
                if k > 1:
                    out.append((a.id, occ, cid))
    return out


def max_degree(B: BallComplex) -> int:
    return max(len(a) for a in B.adj)
