"""Walls in a finite ball of the coned universal cover.

Every edge carries two wall nodes, one on each side of its midpoint.  Nodes
are joined through squares (parallel copies of a midcube) and through
essential cells, where the node on the plus side of an occurrence is joined
to the node on the minus side of the occurrence one period later.  A wall
is a connected component of this node graph.

Side bookkeeping in a square with boundary ``e1 f1 e2^-1 f2^-1``: place the
square as [0,1]^2 with e1 and e2 both running along the x axis.  A side
tag s on e1 is the point x = 1/2 + s*eps measured along e1's own
orientation.  The midcube copy through that point meets e2 at the same x
coordinate, which in e2's orientation is side ``s * sigma1 * sigma2`` where
sigma are the traversal signs of e1, e2 in the boundary cycle; the opposite
edge is traversed backwards, hence ``s' = s * (-sigma1 * sigma2)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .ball import BallComplex, all_geodesics, geodesic
from .presentation import ABELIAN, EdgeLetter, FactorLetter, Letter
from .word_problem import _presentation

PLUS, MINUS = 1, -1
Node = Tuple[int, int]  # (edge id, side)


class IncompleteWallError(ValueError):
    pass


@dataclass
class Wall:
    id: int
    nodes: FrozenSet[Node]
    complete: bool
    frontier: List[Node]
    arcs: List[Tuple[int, int, int]]  # (cell id, occurrence, partner occurrence)
    square_moves: List[Tuple[int, Node, Node]]

    @property
    def crossings(self) -> Set[int]:
        return {e for e, _ in self.nodes}

    def kind(self, B: BallComplex) -> str:
        return "graph" if all(B.edges[e].essential for e, _ in self.nodes) else "hyperplane"


def wall_adjacency(B: BallComplex, node: Node) -> Tuple[List[Tuple[Node, tuple]], bool]:
    """Neighbours of a node with their provenance, and whether any transition
    leaves the ball."""
    eid, side = node
    out: List[Tuple[Node, tuple]] = []
    missing = False
    for sid, occ in B.squares_on_edge().get(eid, ()):
        sq = B.squares[sid]
        s1 = sq.boundary[occ][1]
        other_e, s2 = sq.boundary[(occ + 2) % 4]
        out.append(((other_e, side * (-s1 * s2)), ("square", sid)))
    edge = B.edges[eid]
    if not edge.essential:
        spec = B.X.factors[edge.letter.factor]
        if spec.kind == ABELIAN and len(B.squares_on_edge().get(eid, ())) < 2 * (spec.rank - 1):
            missing = True
    for cid, occ in B.cells_on_edge().get(eid, ()):
        if eid is None:
            continue
        c = B.cells[cid]
        sigma = c.boundary[occ][1]
        t = side * sigma
        partner = (occ + c.period) % c.length if t > 0 else (occ - c.period) % c.length
        pe, ps = c.boundary[partner]
        if pe is None:
            missing = True
            continue
        out.append(((pe, -t * ps), ("cell", cid, occ, partner)))
    return out, missing


def trace_wall(B: BallComplex, eid: int, side: int, wall_id: int = -1) -> Wall:
    start = (eid, side)
    seen = {start}
    q = deque([start])
    frontier: List[Node] = []
    arcs: Set[Tuple[int, int, int]] = set()
    moves: List[Tuple[int, Node, Node]] = []
    while q:
        n = q.popleft()
        nbrs, missing = wall_adjacency(B, n)
        if missing:
            frontier.append(n)
        for m, how in nbrs:
            if how[0] == "cell":
                _, cid, a, b = how
                arcs.add((cid, min(a, b), max(a, b)))
            else:
                moves.append((how[1], n, m))
            if m not in seen:
                seen.add(m)
                q.append(m)
    return Wall(wall_id, frozenset(seen), not frontier, frontier, sorted(arcs), moves)


def all_walls(B: BallComplex) -> List[Wall]:
    cached = B.__dict__.get("_walls")
    if cached is not None:
        return cached
    owner: Dict[Node, int] = {}
    walls: List[Wall] = []
    for e in B.edges:
        for s in (MINUS, PLUS):
            if (e.id, s) in owner:
                continue
            w = trace_wall(B, e.id, s, len(walls))
            for n in w.nodes:
                owner[n] = w.id
            walls.append(w)
    B.__dict__["_walls"] = walls
    B.__dict__["_wall_of"] = owner
    return walls


def wall_of(B: BallComplex, node: Node) -> Wall:
    all_walls(B)
    return B.__dict__["_walls"][B.__dict__["_wall_of"][node]]


def complete_walls(B: BallComplex) -> List[Wall]:
    return [w for w in all_walls(B) if w.complete]


# --------------------------------------------------------------------------
# embedding, separation, vertex spaces


def _require_complete(w: Wall):
    if not w.complete:
        raise IncompleteWallError(f"wall {w.id} is not complete")


def hyperplane_classes(B: BallComplex, w: Wall) -> Dict[Node, int]:
    """Group a wall's nodes into hyperplanes: classes under square moves."""
    parent = {n: n for n in w.nodes}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for _, a, b in w.square_moves:
        if a in parent and b in parent:
            parent[find(a)] = find(b)
    roots: Dict[Node, int] = {}
    return {n: roots.setdefault(find(n), len(roots)) for n in sorted(w.nodes)}


def check_embedded(B: BallComplex, w: Wall, require_complete: bool = True) -> bool:
    """No edge carries both nodes, no cell is crossed by two arcs, and the
    hyperplane graph (hyperplanes joined by cell arcs) is a tree."""
    if require_complete:
        _require_complete(w)
    edges = [e for e, _ in w.nodes]
    if len(edges) != len(set(edges)):
        return False
    per_cell: Dict[int, int] = {}
    for cid, _, _ in w.arcs:
        per_cell[cid] = per_cell.get(cid, 0) + 1
    if any(k > 1 for k in per_cell.values()):
        return False
    cls = hyperplane_classes(B, w)
    k = len(set(cls.values()))
    parent = list(range(k))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for cid, a, b in w.arcs:
        c = B.cells[cid]
        ha = [cls[n] for n in w.nodes if n[0] == c.boundary[a][0]]
        hb = [cls[n] for n in w.nodes if n[0] == c.boundary[b][0]]
        if not ha or not hb:
            return False
        ra, rb = find(ha[0]), find(hb[0])
        if ra == rb:
            return False  # cycle in the hyperplane graph
        parent[ra] = rb
    return True


def two_coloring(B: BallComplex, w: Wall) -> Optional[List[int]]:
    """Parity of crossings of ``w`` along paths from each vertex's component
    root; None if some cycle of the ball crosses ``w`` an odd number of times."""
    cut = w.crossings
    color = [-1] * len(B)
    for s in range(len(B)):
        if color[s] >= 0:
            continue
        color[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            for u, eid in B.adj[v].values():
                c = color[v] ^ (1 if eid in cut else 0)
                if color[u] < 0:
                    color[u] = c
                    q.append(u)
                elif color[u] != c:
                    return None
    return color


def sides(B: BallComplex, w: Wall) -> List[int]:
    """Component labels of ball vertices in the complement of ``w``.

    Besides ball edges not crossed by ``w``, the boundary of every essential
    cell is used: it is a path avoiding ``w`` even where it leaves the ball,
    except that an arc of ``w`` cuts it into two pieces.
    """
    cut = w.crossings
    parent = list(range(len(B)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(vs):
        vs = [v for v in vs if v is not None]
        for v in vs[1:]:
            parent[find(v)] = find(vs[0])

    for e in B.edges:
        if e.id not in cut:
            union([e.tail, e.head])
    arcs = {cid: (a, b) for cid, a, b in w.arcs}
    for c in B.cells:
        if c.id not in arcs:
            union(c.vertices)
            continue
        a, b = arcs[c.id]
        # boundary vertex k sits between occurrences k-1 and k
        union([c.vertices[k] for k in range(a + 1, b + 1)])
        union([c.vertices[k % c.length] for k in range(b + 1, a + c.length + 1)])
    roots: Dict[int, int] = {}
    return [roots.setdefault(find(v), len(roots)) for v in range(len(B))]


def in_core(B: BallComplex, w: Wall) -> bool:
    return all(B.in_core(B.edges[e].tail) and B.in_core(B.edges[e].head) for e in w.crossings)


def check_separates(B: BallComplex, w: Wall) -> bool:
    """The ball falls into exactly two nonempty sides, every crossing edge
    joins them, and no cycle of the ball crosses ``w`` an odd number of times."""
    _require_complete(w)
    if two_coloring(B, w) is None:
        return False
    comp = sides(B, w)
    if len(set(comp)) != 2:
        return False
    return all(comp[B.edges[e].tail] != comp[B.edges[e].head] for e in w.crossings)


def side_function(B: BallComplex, w: Wall) -> Dict[int, int]:
    """Core vertex -> 0/1 side of a complete separating wall."""
    comp = sides(B, w)
    labels = sorted({comp[v] for v in B.core()})
    if len(labels) != 2:
        raise ValueError(f"wall {w.id} does not split the core in two")
    # side 0 holds the tail of the lowest crossing edge
    first = min(w.crossings)
    tail_label = comp[B.edges[first].tail]
    return {v: 0 if comp[v] == tail_label else 1 for v in B.core()}


def wall_vertex_space_intersection(B: BallComplex, w: Wall, require_complete: bool = True) -> Dict[int, int]:
    """Vertex-space component -> number of hyperplanes of the wall inside it."""
    if require_complete:
        _require_complete(w)
    cls = hyperplane_classes(B, w)
    per: Dict[int, Set[int]] = {}
    for n in w.nodes:
        e = B.edges[n[0]]
        if e.essential:
            continue
        per.setdefault(B.component[e.tail], set()).add(cls[n])
    return {c: len(h) for c, h in per.items()}


def single_hyperplane(B: BallComplex, w: Wall, require_complete: bool = True) -> bool:
    return all(k <= 1 for k in wall_vertex_space_intersection(B, w, require_complete).values())


# --------------------------------------------------------------------------
# walls of finite quotients


class QuotientWalls:
    """Wall components of the quotient of the node graph by the kernel of a
    finite permutation representation.

    The wall system is invariant under the group, so each wall maps into a
    single component here.  Two nodes whose images lie in different
    components therefore lie on different walls of the universal cover; this
    certifies facts about walls that leave the ball.
    """

    def __init__(self, X, cols):
        self.X = X
        self.cols = cols
        self.gp = _presentation(X)
        self.comp: Dict[tuple, int] = {}

    def move(self, img: tuple, word) -> tuple:
        img = list(img)
        for x in self.gp.encode(word):
            p = self.cols[x]
            img = [p[i] for i in img]
        return tuple(img)

    def neighbors(self, node: tuple) -> List[tuple]:
        img, letter, side = node
        X = self.X
        out = []
        if not isinstance(letter, EdgeLetter):
            spec = X.factors[letter.factor]
            if spec.kind == ABELIAN:
                for j in range(spec.rank):
                    if j == letter.gen:
                        continue
                    for sg in (1, -1):
                        out.append((self.move(img, [FactorLetter(letter.factor, j, sg)]), letter, side))
        for rel in X.relators:
            word, P = rel.word * 2, len(rel.period)
            for k, l in enumerate(word[:P]):
                if l != letter and l != letter.inverse():
                    continue
                sigma = l.sign
                tail = img if sigma > 0 else self.move(img, [letter])
                t = side * sigma
                if t > 0:
                    ptail = self.move(tail, word[k:k + P])
                else:
                    # the period before occurrence k is again the period
                    ptail = self.move(tail, [x.inverse() for x in reversed(word[k:k + P])])
                canon = ptail if sigma > 0 else self.move(ptail, [l])
                out.append((canon, letter, -t * sigma))
        return out

    def component(self, node: tuple) -> int:
        c = self.comp.get(node)
        if c is not None:
            return c
        label = len(set(self.comp.values()))
        self.comp[node] = label
        q = deque([node])
        while q:
            n = q.popleft()
            for m in self.neighbors(n):
                if m not in self.comp:
                    self.comp[m] = label
                    q.append(m)
        return label


def _quotient_walls(B: BallComplex) -> List[QuotientWalls]:
    qs = B.__dict__.get("_qwalls")
    if qs is None:
        qs = [QuotientWalls(B.X, cols) for cols in B._reps]
        B.__dict__["_qwalls"] = qs
    return qs


def quotient_node(B: BallComplex, node: Node, r: int) -> tuple:
    eid, side = node
    e = B.edges[eid]
    return (B.keys[e.tail][1][r], e.letter, side)


def certified_distinct(B: BallComplex, n1: Node, n2: Node) -> bool:
    """True if some finite quotient puts the two nodes on different walls."""
    for r, q in enumerate(_quotient_walls(B)):
        if q.component(quotient_node(B, n1, r)) != q.component(quotient_node(B, n2, r)):
            return True
    return False


# --------------------------------------------------------------------------
# carriers, separation counts


def carrier(B: BallComplex, w: Wall) -> Set[int]:
    """Ball vertices of the smallest subcomplex containing the wall."""
    verts: Set[int] = set()
    for e in w.crossings:
        verts.update((B.edges[e].tail, B.edges[e].head))
    for cid, _, _ in w.arcs:
        verts.update(v for v in B.cells[cid].vertices if v is not None)
    for sid, _, _ in w.square_moves:
        for e, _ in B.squares[sid].boundary:
            verts.update((B.edges[e].tail, B.edges[e].head))
    return verts


def _multi_bfs(B: BallComplex, sources: Iterable[int]) -> List[int]:
    d = [-1] * len(B)
    q = deque()
    for s in sources:
        d[s] = 0
        q.append(s)
    while q:
        v = q.popleft()
        for u, _ in B.adj[v].values():
            if d[u] < 0:
                d[u] = d[v] + 1
                q.append(u)
    return d


def carrier_quasiconvexity(B: BallComplex, w: Wall, max_pairs: Optional[int] = None) -> int:
    """Largest distance from an essential-edge vertex of a carrier geodesic to
    the carrier, over geodesics between carrier vertices in the safe core."""
    _require_complete(w)
    C = carrier(B, w)
    dC = _multi_bfs(B, C)
    pts = sorted(v for v in C if B.in_core(v))
    worst = 0
    count = 0
    for i, a in enumerate(pts):
        d_a = B.bfs(a)
        for b in pts[i + 1:]:
            if max_pairs is not None and count >= max_pairs:
                return worst
            count += 1
            # geodesics from b to a
            for g in all_geodesics(B, b, a, d_a, limit=10000):
                for eid, _ in g:
                    e = B.edges[eid]
                    if e.essential:
                        worst = max(worst, dC[e.tail], dC[e.head])
    return worst


def crossing_counts(B: BallComplex, path: List[Tuple[int, int]]) -> Dict[int, int]:
    """Wall id -> number of nodes of that wall on the path's edges."""
    all_walls(B)
    owner = B.__dict__["_wall_of"]
    out: Dict[int, int] = {}
    for eid, _ in path:
        for s in (MINUS, PLUS):
            wid = owner[(eid, s)]
            out[wid] = out.get(wid, 0) + 1
    return out


def wallspace_key(w: Wall) -> FrozenSet[int]:
    """Walls with the same crossing edges induce the same partition."""
    return frozenset(w.crossings)


def separating_wall_count(B: BallComplex, x: int, y: int, complete_only: bool = False) -> int:
    """Walls separating x from y, read off a fixed geodesic between them.

    A complete wall counts when it crosses the geodesic an odd number of
    times; parallel copies with equal crossing sets count once.  Unless
    ``complete_only``, a wall leaving the ball also counts when it is
    certified to cross the geodesic exactly once, at most once per geodesic
    edge since the two copies on an edge are parallel.  For incomplete walls
    this is a lower bound.
    """
    if x == y:
        return 0
    path = geodesic(B, x, y)
    walls = all_walls(B)
    keys = set()
    for wid, k in crossing_counts(B, path).items():
        if k % 2 == 1 and walls[wid].complete:
            keys.add(wallspace_key(walls[wid]))
    if complete_only:
        return len(keys)
    owner = B.__dict__["_wall_of"]
    extra = 0
    for eid, _ in path:
        nodes = [(eid, s) for s in (MINUS, PLUS) if not walls[owner[(eid, s)]].complete]
        extra += any(crosses_once(B, path, n) for n in nodes)
    return len(keys) + extra


def crosses_once(B: BallComplex, path: List[Tuple[int, int]], node: Node) -> bool:
    """Whether the wall through ``node`` meets the path's edges in ``node`` only.

    Decided exactly for complete walls.  For a wall leaving the ball, the
    traced piece must avoid the other path nodes and each of them must be
    put on a different wall by some finite quotient.
    """
    all_walls(B)
    w = B.__dict__["_walls"][B.__dict__["_wall_of"][node]]
    others = [(eid, s) for eid, _ in path for s in (MINUS, PLUS) if (eid, s) != node]
    if any(n in w.nodes for n in others):
        return False
    if w.complete:
        return True
    return all(certified_distinct(B, node, n) for n in others)


def single_crossing_check(B: BallComplex, path: List[Tuple[int, int]], reach: int) -> List[int]:
    """Positions of path edges with no wall crossing the path exactly once
    within ``reach`` edges of them.  An empty list means the check passes."""
    once_at = [i for i, (eid, _) in enumerate(path)
               if any(crosses_once(B, path, (eid, s)) for s in (MINUS, PLUS))]
    return [i for i in range(len(path)) if not any(abs(i - j) <= reach for j in once_at)]


def linear_separation_fit(B: BallComplex, pairs: Optional[List[Tuple[int, int]]] = None):
    """Lower linear envelope of separating-wall counts against distance.

    Returns ``(kappa, eps, rows)`` where rows are ``(x, y, d, count)`` and
    the envelope ``count >= kappa*d - eps`` holds on every row.  The slope is
    the largest one through the origin-side hull, found by scanning the
    candidate slopes count/d and taking the best admissible pair.
    """
    if pairs is None:
        core = B.core()
        pairs = [(core[0], v) for v in core[1:]]
    rows = []
    for x, y in pairs:
        d = B.bfs(x)[y]
        rows.append((x, y, d, separating_wall_count(B, x, y)))
    pts = sorted({(d, c) for _, _, d, c in rows if d > 0})
    if len(pts) < 2:
        return None, None, rows
    # choose kappa maximizing the fitted line at the largest distance,
    # subject to count >= kappa*d - eps with eps >= 0 minimal
    best = None
    dmax = max(d for d, _ in pts)
    for i in range(len(pts)):
        for j in range(len(pts)):
            (d1, c1), (d2, c2) = pts[i], pts[j]
            if d2 <= d1:
                continue
            k = (c2 - c1) / (d2 - d1)
            if k <= 0:
                continue
            eps = max(k * d - c for d, c in pts)
            eps = max(eps, 0.0)
            score = k * dmax - eps
            if best is None or score > best[0] + 1e-12:
                best = (score, k, eps)
    if best is None:
        k = min(c / d for d, c in pts)
        return k, 0.0, rows
    return best[1], best[2], rows


def wall_report(B: BallComplex, w: Wall) -> dict:
    cls = hyperplane_classes(B, w)
    return {
        "id": w.id,
        "type": w.kind(B),
        "complete": w.complete,
        "nodes": [[e, "plus" if s > 0 else "minus"] for e, s in sorted(w.nodes)],
        "crossings": sorted(w.crossings),
        "hyperplanes": len(set(cls.values())),
        "arcs": [{"cell": c, "relator": B.cells[c].relator, "from": a, "to": b} for c, a, b in w.arcs],
        "frontier": [[e, "plus" if s > 0 else "minus"] for e, s in sorted(w.frontier)],
    }


def wall_to_dot(B: BallComplex, w: Wall) -> str:
    """Wall graph: nodes are edge sides, cell arcs labelled by relator id."""
    def name(n: Node) -> str:
        return f'"{n[0]}{"+" if n[1] > 0 else "-"}"'

    lines = [f"graph wall_{w.id} {{"]
    for n in sorted(w.nodes):
        label = B.X.letter_name(B.edges[n[0]].letter)
        shape = ', shape=box' if n in w.frontier else ""
        lines.append(f'  {name(n)} [label="{label}{n[0]}{"+" if n[1] > 0 else "-"}"{shape}];')
    seen = set()
    for cid, a, b in w.arcs:
        c = B.cells[cid]
        ea, eb = c.boundary[a][0], c.boundary[b][0]
        na = [n for n in w.nodes if n[0] == ea]
        nb = [n for n in w.nodes if n[0] == eb]
        if na and nb and (na[0], nb[0]) not in seen:
            seen.add((na[0], nb[0]))
            lines.append(f'  {name(na[0])} -- {name(nb[0])} [label="r{c.relator}"];')
    for sid, x, y in w.square_moves:
        key = tuple(sorted((x, y)))
        if key not in seen:
            seen.add(key)
            lines.append(f'  {name(x)} -- {name(y)} [style=dashed, label="sq{sid}"];')
    lines.append("}")
    return "\n".join(lines)
