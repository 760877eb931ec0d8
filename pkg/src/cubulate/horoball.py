"""Combinatorial horoballs over vertex spaces and the augmented ball."""

from __future__ import annotations

import itertools
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from .ball import BallComplex
from .presentation import ABELIAN, StaggeredComplex, element_length, invert, syllables, _reduce_syllables

Metric = Callable[[int, int], int]


class DepthTooSmall(ValueError):
    def __init__(self, depth: int, required: int):
        self.depth = depth
        self.required = required
        super().__init__(f"depth {depth} cannot span the base; need at least {required}")


def required_depth(diameter: int) -> int:
    """Smallest depth whose top level joins any two base points directly, plus one."""
    return (math.ceil(math.log2(diameter)) if diameter > 1 else 0) + 1


class HoroballGraph:
    """Levels ``0..depth`` over a finite base with metric ``d_base``.

    Vertex ``(i, j)`` is base point ``i`` at level ``j``, stored as
    ``j * n + i``.  Vertical edges join consecutive levels; level ``j`` has a
    horizontal edge between base points at distance at most ``2**j``.
    """

    def __init__(self, n: int, d_base: Metric, depth: int):
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        self.n = n
        self.depth = depth
        self.d_base = d_base
        self.adj: List[List[int]] = [[] for _ in range(n * (depth + 1))]
        for j in range(depth + 1):
            reach = 2 ** j
            for a in range(n):
                for b in range(a + 1, n):
                    if 0 < d_base(a, b) <= reach:
                        self.adj[self.vid(a, j)].append(self.vid(b, j))
                        self.adj[self.vid(b, j)].append(self.vid(a, j))
            if j < depth:
                for a in range(n):
                    self.adj[self.vid(a, j)].append(self.vid(a, j + 1))
                    self.adj[self.vid(a, j + 1)].append(self.vid(a, j))

    def vid(self, i: int, j: int) -> int:
        return j * self.n + i

    def horizontal(self, j: int) -> List[Tuple[int, int]]:
        out = []
        for a in range(self.n):
            for v in self.adj[self.vid(a, j)]:
                b, jb = v % self.n, v // self.n
                if jb == j and a < b:
                    out.append((a, b))
        return out

    def bfs(self, src: int) -> List[int]:
        d = [-1] * len(self.adj)
        d[src] = 0
        q = deque([src])
        while q:
            x = q.popleft()
            for y in self.adj[x]:
                if d[y] < 0:
                    d[y] = d[x] + 1
                    q.append(y)
        return d


def build_horoball(n: int, d_base: Metric, depth: int) -> HoroballGraph:
    return HoroballGraph(n, d_base, depth)


def horoball_distance(g: HoroballGraph, u: Tuple[int, int], v: Tuple[int, int]) -> int:
    d = g.bfs(g.vid(*u))[g.vid(*v)]
    if d < 0:
        raise ValueError("points are not connected")
    return d


def _hops_at_most_three(g: HoroballGraph, a: int, b: int, reach: int) -> Optional[int]:
    d = g.d_base
    if a == b:
        return 0
    if d(a, b) <= reach:
        return 1
    near_a = [c for c in range(g.n) if d(a, c) <= reach]
    near_b = [c for c in range(g.n) if d(b, c) <= reach]
    if any(d(c, b) <= reach for c in near_a):
        return 2
    if any(d(c, c2) <= reach for c in near_a for c2 in near_b):
        return 3
    return None


def normal_form_distance(g: HoroballGraph, u: Tuple[int, int], v: Tuple[int, int]) -> int:
    """Distance over paths made of a vertical run, at most three horizontal
    hops at one level, and a second vertical run."""
    (a, ja), (b, jb) = u, v
    best = None
    for k in range(g.depth + 1):
        h = _hops_at_most_three(g, a, b, 2 ** k)
        if h is None:
            continue
        cost = abs(ja - k) + abs(jb - k) + h
        if best is None or cost < best:
            best = cost
    if best is None:
        raise ValueError("no short normal form within the available depth")
    return best


def line_horoball(n: int, depth: int) -> HoroballGraph:
    return HoroballGraph(n, lambda a, b: abs(a - b), depth)


def log_envelope(g: HoroballGraph, pairs: Optional[Sequence[Tuple[int, int]]] = None) -> float:
    """Largest deviation of level-0 distance from 2*log2(base distance + 1)."""
    if pairs is None:
        pairs = [(a, b) for a in range(g.n) for b in range(a, g.n)]
    by_src: Dict[int, List[int]] = {}
    worst = 0.0
    for a, b in pairs:
        if a not in by_src:
            by_src[a] = g.bfs(g.vid(a, 0))
        dA = by_src[a][g.vid(b, 0)]
        worst = max(worst, abs(dA - 2 * math.log2(g.d_base(a, b) + 1)))
    return worst


# --------------------------------------------------------------------------
# vertex-space metrics and the admissible pseudometric


def factor_element_between(B: BallComplex, u: int, v: int) -> Tuple[str, tuple]:
    """(factor, element) carrying u to v inside one vertex space."""
    X = B.X
    w = invert(B.labels[u]) + B.labels[v]
    start = B.factor_of[u]
    sylls, edges = syllables(X, w, start)
    sylls, edges = _reduce_syllables(X, sylls, edges)
    if edges:
        raise ValueError(f"vertices {u} and {v} lie in different vertex spaces")
    return sylls[0]


def vertex_space_distance(B: BallComplex, u: int, v: int) -> int:
    f, g = factor_element_between(B, u, v)
    return element_length(B.X.factors[f], g)


def _segment_base(X: StaggeredComplex, f: str, g: tuple):
    """A finite base containing identity and g whose own metric agrees with
    the vertex-space metric, and onto which nearest-point projection is
    1-Lipschitz: the geodesic for a tree, the bounding box for a torus."""
    spec = X.factors[f]
    if spec.kind == ABELIAN:
        ranges = [range(min(0, x), max(0, x) + 1) for x in g]
        pts = list(itertools.product(*ranges))
        idx = {p: i for i, p in enumerate(pts)}
        metric = lambda a, b: sum(abs(x - y) for x, y in zip(pts[a], pts[b]))
        return len(pts), metric, idx[tuple(0 for _ in g)], idx[tuple(g)]
    n = len(g) + 1
    return n, (lambda a, b: abs(a - b)), 0, n - 1


@dataclass
class PseudometricChoice:
    """Horoball distance used as the per-vertex-space length."""
    X: StaggeredComplex
    depth: int
    _cache: Dict[Tuple[str, tuple], int] = field(default_factory=dict)

    def __call__(self, f: str, g: tuple) -> int:
        key = (f, g)
        if key not in self._cache:
            n, metric, a, b = _segment_base(self.X, f, g)
            need = required_depth(metric(a, b))
            if self.depth < need:
                raise DepthTooSmall(self.depth, need)
            hb = HoroballGraph(n, metric, self.depth)
            self._cache[key] = horoball_distance(hb, (a, 0), (b, 0))
        return self._cache[key]

    def pair(self, B: BallComplex, x: int, y: int) -> int:
        return self(*factor_element_between(B, x, y))


def component_diameters(B: BallComplex) -> Dict[int, int]:
    members: Dict[int, List[int]] = {}
    for v in range(len(B)):
        members.setdefault(B.component[v], []).append(v)
    out = {}
    for c, vs in members.items():
        out[c] = max((vertex_space_distance(B, a, b) for a in vs for b in vs), default=0)
    return out


def admissible_pseudometric(B: BallComplex, depth: Optional[int] = None) -> PseudometricChoice:
    """Horoball pseudometric deep enough for every vertex space meeting the core."""
    core_comps = {B.component[v] for v in B.core()}
    diam = max((d for c, d in component_diameters(B).items() if c in core_comps), default=0)
    need = required_depth(diam)
    if depth is None:
        depth = need
    elif depth < need:
        raise DepthTooSmall(depth, need)
    return PseudometricChoice(B.X, depth)


# --------------------------------------------------------------------------
# augmented ball and hyperbolicity


class AugmentedBall:
    """The ball's 1-skeleton with a horoball glued over each vertex-space
    component; level 0 of each horoball is the component itself."""

    def __init__(self, B: BallComplex, depth: int):
        self.B = B
        self.depth = depth
        self.nodes: List[Tuple[int, int]] = [(v, 0) for v in range(len(B))]
        index: Dict[Tuple[int, int], int] = {(v, 0): v for v in range(len(B))}
        adj: List[set] = [set() for _ in range(len(B))]

        def node(v, j):
            if (v, j) not in index:
                index[(v, j)] = len(self.nodes)
                self.nodes.append((v, j))
                adj.append(set())
            return index[(v, j)]

        for v in range(len(B)):
            for u, _ in B.adj[v].values():
                adj[v].add(u)
        members: Dict[int, List[int]] = {}
        for v in range(len(B)):
            members.setdefault(B.component[v], []).append(v)
        for vs in members.values():
            dist = {(a, b): vertex_space_distance(B, a, b) for a in vs for b in vs if a < b}
            for j in range(1, depth + 1):
                for v in vs:
                    x, y = node(v, j - 1), node(v, j)
                    adj[x].add(y)
                    adj[y].add(x)
                for (a, b), d in dist.items():
                    if d <= 2 ** j:
                        x, y = node(a, j), node(b, j)
                        adj[x].add(y)
                        adj[y].add(x)
        self.index = index
        self.adj = [sorted(s) for s in adj]

    def __len__(self):
        return len(self.nodes)

    def bfs(self, src: int) -> List[int]:
        d = [-1] * len(self.adj)
        d[src] = 0
        q = deque([src])
        while q:
            x = q.popleft()
            for y in self.adj[x]:
                if d[y] < 0:
                    d[y] = d[x] + 1
                    q.append(y)
        return d


def four_point_defect(d: Callable[[int, int], float], x: int, y: int, z: int, w: int) -> float:
    s = sorted((d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)))
    return (s[2] - s[1]) / 2


def hyperbolicity_estimate(adj_bfs: Callable[[int], List[int]], n: int, samples: Optional[int] = None,
                           seed: int = 0, points: Optional[Sequence[int]] = None) -> Tuple[float, int]:
    """Largest four-point defect over quadruples of ``points``.

    Exhaustive when ``samples`` is None, otherwise ``samples`` quadruples
    drawn with a seeded generator.  Returns ``(delta, quadruples checked)``.
    """
    pts = list(points) if points is not None else list(range(n))
    rows: Dict[int, List[int]] = {}

    def d(a, b):
        if a not in rows:
            rows[a] = adj_bfs(a)
        return rows[a][b]

    if samples is None:
        quads = itertools.combinations(pts, 4)
    else:
        rng = random.Random(seed)
        quads = (tuple(rng.sample(pts, 4)) for _ in range(samples))
    worst, count = 0.0, 0
    for q in quads:
        worst = max(worst, four_point_defect(d, *q))
        count += 1
    return worst, count
