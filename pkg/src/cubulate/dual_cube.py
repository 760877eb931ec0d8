"""Sageev's dual cube complex for the finite wallspace of a ball.

Principal orientations come from safe-core vertices.  Each complete wall
that splits the core contributes a pair of halfspaces; walls with the same
crossing edges induce the same partition and are merged.  Halfspaces are
bitmasks over all ball vertices, the witnesses for consistency and crossing,
since a complete wall splits the whole ball in two.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .ball import BallComplex
from .walls import Wall, complete_walls, separating_wall_count, sides, wallspace_key

Orientation = Tuple[int, ...]


class InconsistentWallspace(RuntimeError):
    pass


@dataclass
class HalfspaceSystem:
    B: BallComplex
    walls: List[Wall]
    points: List[int]
    halfspaces: List[Tuple[int, int]]  # (mask of side 0, mask of side 1)
    side: List[Dict[int, int]]

    def cross(self, i: int, j: int) -> bool:
        if i == j:
            return False
        return all(self.halfspaces[i][a] & self.halfspaces[j][b] for a in (0, 1) for b in (0, 1))

    def __len__(self):
        return len(self.walls)


def halfspace_system(B: BallComplex, walls: Optional[Sequence[Wall]] = None,
                     select: Optional[Callable[[Wall], bool]] = None) -> HalfspaceSystem:
    """Complete walls splitting the core, one per partition."""
    pool = list(walls) if walls is not None else complete_walls(B)
    if select is not None:
        pool = [w for w in pool if select(w)]
    points = B.core()
    bit = [1 << v for v in range(len(B))]
    chosen, halves, side_maps, seen = [], [], [], set()
    for w in pool:
        key = wallspace_key(w)
        if key in seen:
            continue
        comp = sides(B, w)
        labels = sorted({comp[v] for v in range(len(B))})
        if len(labels) != 2:
            raise InconsistentWallspace(f"wall {w.id} does not split the ball in two")
        zero = comp[B.edges[min(w.crossings)].tail]
        sm = {v: 0 if comp[v] == zero else 1 for v in range(len(B))}
        if len({sm[v] for v in points}) < 2:
            continue
        m0 = sum(bit[v] for v in range(len(B)) if sm[v] == 0)
        m1 = sum(bit[v] for v in range(len(B)) if sm[v] == 1)
        seen.add(key)
        chosen.append(w)
        halves.append((m0, m1))
        side_maps.append(sm)
    return HalfspaceSystem(B, chosen, points, halves, side_maps)


def vertex_space_halfspaces(B: BallComplex, component: int) -> HalfspaceSystem:
    """Wallspace on one vertex-space piece of the ball.

    The walls are the hyperplane classes of the piece, edges identified
    across opposite sides of its squares; each class that cuts the piece in
    two contributes a pair of halfspaces over the piece's vertices.
    """
    verts = [v for v in range(len(B)) if B.component[v] == component]
    vset = set(verts)
    edges = [e for e in B.edges if not e.essential and e.tail in vset and e.head in vset]
    parent = {e.id: e.id for e in edges}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for sq in B.squares:
        for i in (0, 1):
            a, b = sq.boundary[i][0], sq.boundary[i + 2][0]
            if a in parent and b in parent:
                parent[find(a)] = find(b)
    classes: Dict[int, Set[int]] = {}
    for e in edges:
        classes.setdefault(find(e.id), set()).add(e.id)
    bit = {v: 1 << v for v in verts}
    chosen, halves, side_maps = [], [], []
    for cls in sorted(classes.values(), key=min):
        comp = {v: v for v in verts}

        def root(a):
            while comp[a] != a:
                comp[a] = comp[comp[a]]
                a = comp[a]
            return a

        for e in edges:
            if e.id not in cls:
                comp[root(e.tail)] = root(e.head)
        labels = sorted({root(v) for v in verts})
        if len(labels) != 2:
            continue
        zero = root(B.edges[min(cls)].tail)
        sm = {v: 0 if root(v) == zero else 1 for v in verts}
        chosen.append(frozenset(cls))
        halves.append((sum(bit[v] for v in verts if sm[v] == 0), sum(bit[v] for v in verts if sm[v] == 1)))
        side_maps.append(sm)
    return HalfspaceSystem(B, chosen, verts, halves, side_maps)


def principal_orientation(H: HalfspaceSystem, x: int) -> Orientation:
    return tuple(sm[x] for sm in H.side)


def consistent(H: HalfspaceSystem, o: Orientation) -> bool:
    masks = [H.halfspaces[i][s] for i, s in enumerate(o)]
    return all(masks[i] & masks[j] for i in range(len(masks)) for j in range(i + 1, len(masks)))


def flippable(H: HalfspaceSystem, o: Orientation, i: int) -> bool:
    """Flipping wall i keeps the orientation consistent."""
    m = H.halfspaces[i][1 - o[i]]
    return all(m & H.halfspaces[j][o[j]] for j in range(len(o)) if j != i)


def flip(o: Orientation, *ids: int) -> Orientation:
    out = list(o)
    for i in ids:
        out[i] = 1 - out[i]
    return tuple(out)


@dataclass
class DualCubeComplex:
    H: HalfspaceSystem
    zero_cubes: List[Orientation]
    index: Dict[Orientation, int]
    one_cubes: List[Tuple[int, int, int]]  # (0-cube, 0-cube, wall)
    principal: Dict[int, int]  # core vertex -> 0-cube
    flip_margin: int
    cubes: Dict[int, int] = field(default_factory=dict)  # dimension -> count
    max_cube_dim: int = 0

    def neighbors(self, z: int) -> List[Tuple[int, int]]:
        return self._adj[z]

    def distance(self, a: int, b: int) -> int:
        d = {a: 0}
        q = deque([a])
        while q:
            x = q.popleft()
            if x == b:
                return d[x]
            for y, _ in self._adj[x]:
                if y not in d:
                    d[y] = d[x] + 1
                    q.append(y)
        return -1

    def connected(self) -> bool:
        if not self.zero_cubes:
            return True
        seen = {0}
        q = deque([0])
        while q:
            x = q.popleft()
            for y, _ in self._adj[x]:
                if y not in seen:
                    seen.add(y)
                    q.append(y)
        return len(seen) == len(self.zero_cubes)

    def flippable_at(self, z: int) -> List[int]:
        return sorted(w for _, w in self._adj[z])

    def square_at(self, z: int, i: int, j: int) -> bool:
        o = self.zero_cubes[z]
        return self.H.cross(i, j) and consistent(self.H, flip(o, i, j))

    def hyperplanes(self) -> int:
        """Classes of 1-cubes under opposite sides of 2-cubes."""
        parent = list(range(len(self.one_cubes)))
        edge_of: Dict[Tuple[int, int], int] = {}
        for k, (a, _, w) in enumerate(self.one_cubes):
            edge_of[(a, w)] = k
            edge_of[(self.one_cubes[k][1], w)] = k

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for z in range(len(self.zero_cubes)):
            ws = self.flippable_at(z)
            o = self.zero_cubes[z]
            for i, j in itertools.combinations(ws, 2):
                if not self.square_at(z, i, j):
                    continue
                zi = self.index.get(flip(o, i))
                zj = self.index.get(flip(o, j))
                if zi is None or zj is None:
                    continue
                # edge (z, w=i) is parallel to edge (zj, w=i)
                a, b = edge_of.get((z, i)), edge_of.get((zj, i))
                if a is not None and b is not None:
                    parent[find(a)] = find(b)
                a, b = edge_of.get((z, j)), edge_of.get((zi, j))
                if a is not None and b is not None:
                    parent[find(a)] = find(b)
        return len({find(k) for k in range(len(self.one_cubes))})


def build_dual(H: HalfspaceSystem, flip_margin: int = 2, max_dim: int = 4) -> DualCubeComplex:
    principal: Dict[int, int] = {}
    zero: List[Orientation] = []
    index: Dict[Orientation, int] = {}
    depth: Dict[Orientation, int] = {}
    q = deque()
    for x in H.points:
        o = principal_orientation(H, x)
        if not consistent(H, o):
            raise InconsistentWallspace(f"principal orientation of vertex {x} is inconsistent")
        if o not in index:
            index[o] = len(zero)
            zero.append(o)
            depth[o] = 0
            q.append(o)
        principal[x] = index[o]
    while q:
        o = q.popleft()
        if depth[o] >= flip_margin:
            continue
        for i in range(len(o)):
            if flippable(H, o, i):
                p = flip(o, i)
                if p not in index:
                    index[p] = len(zero)
                    zero.append(p)
                    depth[p] = depth[o] + 1
                    q.append(p)
    one: List[Tuple[int, int, int]] = []
    adj: List[List[Tuple[int, int]]] = [[] for _ in zero]
    for a, o in enumerate(zero):
        for i in range(len(o)):
            if o[i] == 0:
                b = index.get(flip(o, i))
                if b is not None:
                    one.append((a, b, i))
                    adj[a].append((b, i))
                    adj[b].append((a, i))
    D = DualCubeComplex(H, zero, index, one, principal, flip_margin)
    D._adj = adj
    D.cubes = {0: len(zero), 1: len(one)}
    D.max_cube_dim = 1 if one else 0
    _count_cubes(D, max_dim)
    return D


def _count_cubes(D: DualCubeComplex, max_dim: int):
    """Cubes of dimension 2..max_dim spanned at materialized 0-cubes.

    A cube is a 0-cube together with a family of pairwise crossing walls all
    of whose corner orientations are consistent; it is counted once, at the
    corner where every wall of the family takes side 0.
    """
    H = D.H
    for z, o in enumerate(D.zero_cubes):
        ws = [w for w in D.flippable_at(z) if o[w] == 0]
        for k in range(2, max_dim + 1):
            found = 0
            for fam in itertools.combinations(ws, k):
                if not all(H.cross(i, j) for i, j in itertools.combinations(fam, 2)):
                    continue
                if all(consistent(H, flip(o, *sub)) for r in range(2, k + 1)
                       for sub in itertools.combinations(fam, r)):
                    found += 1
            if not found:
                break
            D.cubes[k] = D.cubes.get(k, 0) + found
            D.max_cube_dim = max(D.max_cube_dim, k)


def npc_link_check(D: DualCubeComplex) -> List[dict]:
    """Flag condition at every 0-cube: pairwise square-spanning triples of
    link vertices must span a 3-cube.  Returns the violations."""
    H = D.H
    bad = []
    for z, o in enumerate(D.zero_cubes):
        ws = D.flippable_at(z)
        edges = {(i, j) for i, j in itertools.combinations(ws, 2) if D.square_at(z, i, j)}
        for i, j, k in itertools.combinations(ws, 3):
            if (i, j) in edges and (i, k) in edges and (j, k) in edges:
                if not consistent(H, flip(o, i, j, k)):
                    bad.append({"zero_cube": z, "walls": [i, j, k]})
    return bad


def properness_witness(D: DualCubeComplex, pairs: Sequence[Tuple[int, int]]) -> List[dict]:
    """Dual distance of principal 0-cubes against ball distance and the
    separating wall count, per sampled pair."""
    B = D.H.B
    rows = []
    for x, y in pairs:
        rows.append({
            "x": x, "y": y,
            "distance": B.bfs(x)[y],
            "dual_distance": D.distance(D.principal[x], D.principal[y]),
            "separating_walls": separating_wall_count(B, x, y, complete_only=True),
        })
    return rows


def restricted_tree_check(D: DualCubeComplex) -> bool:
    """For a system of essential-edge walls over a tree-like ball: the dual is
    the tree whose vertices are the vertex-space pieces of the core and whose
    edges are the core's essential edges."""
    B = D.H.B
    core = set(D.H.points)
    piece_of: Dict[int, int] = {}
    for x in core:
        z = D.principal[x]
        c = B.component[x]
        if piece_of.setdefault(c, z) != z:
            return False
    if len(set(piece_of.values())) != len(piece_of) or len(piece_of) != len(D.zero_cubes):
        return False
    tree_edges = {frozenset((piece_of[B.component[e.tail]], piece_of[B.component[e.head]]))
                  for e in B.edges if e.essential and e.tail in core and e.head in core}
    dual_edges = {frozenset((a, b)) for a, b, _ in D.one_cubes}
    return tree_edges == dual_edges and len(dual_edges) == len(D.zero_cubes) - 1


def dual_report(D: DualCubeComplex) -> dict:
    return {
        "zero_cubes": len(D.zero_cubes),
        "one_cubes": len(D.one_cubes),
        "cubes_by_dimension": {str(k): v for k, v in sorted(D.cubes.items())},
        "max_cube_dim": D.max_cube_dim,
        "walls": len(D.H),
        "hyperplanes": D.hyperplanes(),
        "connected": D.connected(),
        "link_violations": npc_link_check(D),
        "flip_margin": D.flip_margin,
    }
