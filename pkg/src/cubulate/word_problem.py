"""Word problem for staggered presentations.

Two independent routes decide triviality of a closed edge path:

* ``dehn``: greedy rewriting.  A run of a relator's cyclic word containing
  strictly more than half of its essential edges is replaced by the
  complementary run, which strictly lowers the number of essential edges.
* ``oracle``: works in a presentation of the fundamental group.  A bounded
  coset enumeration over the trivial subgroup proves triviality, and
  permutation quotients from a low-index subgroup search prove
  nontriviality.  When neither succeeds the answer is ``inconclusive``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .presentation import (
    ABELIAN,
    EdgeLetter,
    FactorLetter,
    Letter,
    StaggeredComplex,
    Word,
    cyclic_reduce,
    cyclic_syllables,
    element_length,
    invert,
    is_edge,
    is_identity,
    letters_of,
    normalize,
    syllables,
)

DEHN, ORACLE, CROSS = "dehn", "oracle", "cross-check"
INTRINSIC, ELECTRIFIED, CONED, HOROBALL = "intrinsic", "electrified", "coned", "horoball"


class OracleInconclusive(RuntimeError):
    """The oracle exhausted its radius without a certificate either way."""


class CrossCheckError(AssertionError):
    def __init__(self, message: str, trace: "DehnTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class DehnEvent:
    before: Word
    start: int
    span: int
    relator: int
    offset: int
    direction: int
    removed: Word
    replacement: Word
    after: Word

    def as_dict(self, X: StaggeredComplex) -> dict:
        return {
            "relator": self.relator,
            "direction": self.direction,
            "offset": self.offset,
            "start": self.start,
            "essential_edges_matched": self.span,
            "removed": X.format_word(self.removed),
            "replacement": X.format_word(self.replacement),
            "result": X.format_word(self.after),
        }


@dataclass
class DehnTrace:
    input: Word
    events: List[DehnEvent] = field(default_factory=list)
    output: Word = ()

    @property
    def area(self) -> int:
        return len(self.events)


def bs_length(w: Sequence[Letter]) -> int:
    return sum(1 for l in w if is_edge(l))


def relative_length(X: StaggeredComplex, w: Sequence[Letter], mode: str = INTRINSIC,
                    horoball_metric: Optional[Callable[[str, tuple], float]] = None):
    """Edge-letter count plus the chosen vertex-space length of each syllable."""
    if mode == HOROBALL and horoball_metric is None:
        raise ValueError("horoball mode needs a horoball metric")
    sylls, edges = syllables(X, w)
    total = Fraction(len(edges))
    for f, g in sylls:
        spec = X.factors[f]
        if mode == INTRINSIC:
            total += element_length(spec, g)
        elif mode == CONED:
            total += 0 if is_identity(spec, g) else 1
        elif mode == HOROBALL:
            total += Fraction(horoball_metric(f, g)).limit_denominator(10**6)
        elif mode != ELECTRIFIED:
            raise ValueError(f"unknown pseudometric mode {mode!r}")
    return total


# --------------------------------------------------------------------------
# Dehn rewriting


def _relator_cycles(X: StaggeredComplex):
    cache = X.__dict__.setdefault("_cycles", None)
    if cache is None:
        cache = []
        for i, r in enumerate(X.relators):
            for direction, word in ((1, r.word), (-1, invert(r.word))):
                units, _ = cyclic_syllables(X, word)
                period = len(units) // r.exponent
                cache.append((i, direction, units, period))
        X.__dict__["_cycles"] = cache
    return cache


def _best_match(X: StaggeredComplex, units):
    n = len(units)
    best = None
    for rid, direction, rel, period in _relator_cycles(X):
        L = len(rel)
        for o in range(period):
            f0 = rel[o][0]
            for k in range(n):
                if units[k][0] != f0:
                    continue
                j = 1
                while j < L and j < n and units[(k + j - 1) % n][1] == rel[(o + j - 1) % L][1] \
                        and units[(k + j) % n][0] == rel[(o + j) % L][0]:
                    j += 1
                if 2 * j > L:
                    key = (-(2 * j - L), k, rid, -direction, o)
                    if best is None or key < best[0]:
                        best = (key, k, j, rid, direction, o, rel)
    return best


def _syll_letters(X: StaggeredComplex, e: EdgeLetter, g: tuple) -> Tuple[Letter, ...]:
    return letters_of(X.factors[X.graph.edge_ends(e)[1]], g)


def _require_closed(X: StaggeredComplex, w: Sequence[Letter]):
    if w and not X.is_closed(w):
        raise ValueError(f"not a closed edge path: {X.format_word(w)}")


def dehn_step(X: StaggeredComplex, w: Sequence[Letter]) -> Optional[Tuple[Word, DehnEvent]]:
    """One greedy rewrite on a closed word, or ``None`` when no long match exists."""
    _require_closed(X, w)
    w = cyclic_reduce(X, w)
    units, _ = cyclic_syllables(X, w)
    if not units:
        return None
    best = _best_match(X, units)
    if best is None:
        return None
    _, k, j, rid, direction, o, rel = best
    n, L = len(units), len(rel)
    rot = units[k:] + units[:k]
    removed: List[Letter] = []
    for i in range(j):
        e, g = rot[i]
        removed.append(e)
        if i < j - 1:
            removed.extend(_syll_letters(X, e, g))
    rest: List[Letter] = list(_syll_letters(X, *rot[j - 1]))
    for e, g in rot[j:]:
        rest.append(e)
        rest.extend(_syll_letters(X, e, g))
    repl: List[Letter] = []
    for i in range(L - 1, j - 1, -1):
        f, r = rel[(o + i) % L]
        repl.extend(invert(_syll_letters(X, f, r)))
        repl.append(f.inverse())
    f, r = rel[(o + j - 1) % L]
    repl.extend(invert(_syll_letters(X, f, r)))
    after = cyclic_reduce(X, tuple(repl) + tuple(rest))
    event = DehnEvent(w, k, j, rid, o, direction, tuple(removed), tuple(repl), after)
    return after, event


def dehn_reduce(X: StaggeredComplex, w: Sequence[Letter], max_steps: int = 100000) -> DehnTrace:
    _require_closed(X, w)
    trace = DehnTrace(tuple(w))
    cur = cyclic_reduce(X, w)
    for _ in range(max_steps):
        step = dehn_step(X, cur)
        if step is None:
            break
        cur, ev = step
        trace.events.append(ev)
    trace.output = cur
    return trace


def replay(X: StaggeredComplex, trace: DehnTrace) -> Word:
    """Recompute the output of a trace from its input, checking every event."""
    cur = cyclic_reduce(X, trace.input)
    for ev in trace.events:
        if ev.before != cur:
            raise AssertionError("trace does not replay")
        cur = dehn_step(X, cur)[0]
        if cur != ev.after:
            raise AssertionError("trace does not replay")
    return cur


# --------------------------------------------------------------------------
# oracle: fundamental group presentation, coset closure, finite quotients


class GroupPresentation:
    """Generators and relators of the fundamental group of X.

    A spanning tree of the graph of spaces is collapsed; the remaining
    essential edges become free generators.
    """

    def __init__(self, X: StaggeredComplex):
        self.X = X
        gens: List[Tuple] = []
        for f in X.graph.factors:
            for i in range(f.rank):
                gens.append(("f", f.id, i))
        seen = {X.graph.base}
        self.tree = set()
        changed = True
        while changed:
            changed = False
            for e in X.graph.edges:
                if (e.source in seen) != (e.target in seen):
                    seen.update((e.source, e.target))
                    self.tree.add(e.id)
                    changed = True
        for e in X.graph.edges:
            if e.id not in self.tree:
                gens.append(("e", e.id))
        self.gens = gens
        self.index = {g: i for i, g in enumerate(gens)}
        rels: List[List[int]] = []
        for f in X.graph.factors:
            if f.kind == ABELIAN:
                for i in range(f.rank):
                    for j in range(i + 1, f.rank):
                        a, b = self.index[("f", f.id, i)], self.index[("f", f.id, j)]
                        rels.append([2 * a, 2 * b, 2 * a + 1, 2 * b + 1])
        for r in X.relators:
            rels.append(self.encode(r.word))
        self.relators = [r for r in rels if r]

    def encode(self, w: Sequence[Letter]) -> List[int]:
        """Columns: generator i is 2i, its inverse 2i+1."""
        out = []
        for l in w:
            if is_edge(l):
                if l.edge in self.tree:
                    continue
                g = self.index[("e", l.edge)]
            else:
                g = self.index[("f", l.factor, l.gen)]
            out.append(2 * g if l.sign > 0 else 2 * g + 1)
        return out


def _presentation(X: StaggeredComplex) -> GroupPresentation:
    gp = X.__dict__.get("_gp")
    if gp is None:
        gp = GroupPresentation(X)
        X.__dict__["_gp"] = gp
    return gp


class CosetClosure:
    """Bounded Todd-Coxeter enumeration over the trivial subgroup.

    Every identification made is a consequence of the relators, so a word
    found to return to the start coset is trivial.  Enumeration stops once
    relators have been scanned at every coset within ``radius`` definitions
    of the word's own cycle, or when ``max_cosets`` is exceeded.
    """

    def __init__(self, ngens: int, relators: List[List[int]], max_cosets: int = 200000):
        self.ncols = 2 * ngens
        self.rels = relators
        self.max_cosets = max_cosets
        self.table: List[List[Optional[int]]] = []
        self.parent: List[int] = []
        self.depth: List[int] = []

    def new(self, depth: int) -> int:
        if len(self.table) >= self.max_cosets:
            raise OracleInconclusive("coset limit reached")
        self.table.append([None] * self.ncols)
        self.parent.append(len(self.parent))
        self.depth.append(depth)
        return len(self.table) - 1

    def rep(self, c: int) -> int:
        p = self.parent
        root = c
        while p[root] != root:
            root = p[root]
        while p[c] != root:
            p[c], c = root, p[c]
        return root

    def _merge(self, a: int, b: int, queue: List[int]):
        a, b = self.rep(a), self.rep(b)
        if a == b:
            return
        if a > b:
            a, b = b, a
        self.parent[b] = a
        self.depth[a] = min(self.depth[a], self.depth[b])
        queue.append(b)

    def coincidence(self, a: int, b: int):
        queue: List[int] = []
        self._merge(a, b, queue)
        i = 0
        while i < len(queue):
            e = queue[i]
            i += 1
            row = self.table[e]
            for x in range(self.ncols):
                f = row[x]
                if f is None:
                    continue
                xi = x ^ 1
                self.table[f][xi] = None
                e1, f1 = self.rep(e), self.rep(f)
                if self.table[e1][x] is not None:
                    self._merge(f1, self.table[e1][x], queue)
                elif self.table[f1][xi] is not None:
                    self._merge(e1, self.table[f1][xi], queue)
                else:
                    self.table[e1][x] = f1
                    self.table[f1][xi] = e1

    def define(self, c: int, x: int) -> int:
        d = self.new(self.depth[c] + 1)
        self.table[c][x] = d
        self.table[d][x ^ 1] = c
        return d

    def trace(self, c: int, word: List[int], define: bool = False) -> Optional[int]:
        for x in word:
            c = self.rep(c)
            nxt = self.table[c][x]
            if nxt is None:
                if not define:
                    return None
                nxt = self.define(c, x)
            c = nxt
        return self.rep(c)

    def scan_and_fill(self, c: int, R: List[int]):
        f = b = c
        i, j = 0, len(R) - 1
        while True:
            while i <= j and self.table[self.rep(f)][R[i]] is not None:
                f = self.table[self.rep(f)][R[i]]
                i += 1
            if i > j:
                if self.rep(f) != self.rep(b):
                    self.coincidence(f, b)
                return
            while j >= i and self.table[self.rep(b)][R[j] ^ 1] is not None:
                b = self.table[self.rep(b)][R[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                f, b = self.rep(f), self.rep(b)
                self.table[f][R[i]] = b
                self.table[b][R[i] ^ 1] = f
                return
            self.define(self.rep(f), R[i])

    def proves_trivial(self, word: List[int], radius: int) -> bool:
        start = self.new(0)
        cur = start
        for x in word:
            cur = self.define(cur, x)
            self.depth[cur] = 0
        end = cur
        c = 0
        while c < len(self.table):
            if self.rep(start) == self.rep(end):
                return True
            if self.rep(c) == c and self.depth[c] <= radius:
                for R in self.rels:
                    if self.rep(c) != c:
                        break
                    self.scan_and_fill(c, R)
            c += 1
        return self.rep(start) == self.rep(end)


def permutation_quotients(X: StaggeredComplex, max_index: Optional[int] = None):
    """Transitive permutation representations of G from subgroups of small index.

    Returns a list of representations, each a list of permutations (tuples)
    indexed by column as in :class:`GroupPresentation`.
    """
    cached = X.__dict__.get("_perms")
    if cached is not None and max_index is None:
        return cached
    from sympy.combinatorics.fp_groups import FpGroup, low_index_subgroups
    from sympy.combinatorics.free_groups import free_group

    gp = _presentation(X)
    n = len(gp.gens)
    if max_index is None:
        max_index = 5 if n <= 2 else 4
    F, *syms = free_group(",".join(f"g{i}" for i in range(n)))
    if n == 1:
        syms = [syms[0]] if not isinstance(syms[0], tuple) else list(syms[0])

    def to_sym(rel):
        out = F.identity
        for x in rel:
            out = out * (syms[x // 2] ** (1 if x % 2 == 0 else -1))
        return out

    G = FpGroup(F, [to_sym(r) for r in gp.relators])
    reps = []
    for C in low_index_subgroups(G, max_index):
        if len(C.table) < 2:
            continue
        cols = []
        for x in range(2 * n):
            g = syms[x // 2] ** (1 if x % 2 == 0 else -1)
            col = C.A.index(g)
            cols.append(tuple(C.table[c][col] for c in range(len(C.table))))
        reps.append(cols)
    if cached is None:
        X.__dict__["_perms"] = reps
    return reps


def quotient_image(reps, word: List[int], start: Optional[tuple] = None) -> tuple:
    """Images of a word under every permutation representation.

    ``start`` is a previously computed image to extend, so images of a
    prefix-closed family of words can be computed letter by letter.
    """
    out = []
    for r, cols in enumerate(reps):
        img = list(start[r]) if start is not None else list(range(len(cols[0])))
        for x in word:
            p = cols[x]
            img = [p[i] for i in img]
        out.append(tuple(img))
    return tuple(out)


def oracle_is_trivial(X: StaggeredComplex, w: Sequence[Letter], radius: int = 20,
                      max_cosets: int = 200000) -> bool:
    gp = _presentation(X)
    word = gp.encode(w)
    reps = permutation_quotients(X)
    for img in quotient_image(reps, word):
        if any(i != p for i, p in enumerate(img)):
            return False
    # free reduction in the free product part is decided by the closure too
    closure = CosetClosure(len(gp.gens), gp.relators, max_cosets)
    if closure.proves_trivial(word, radius):
        return True
    raise OracleInconclusive(f"no certificate within radius {radius}")


def is_trivial(X: StaggeredComplex, w: Sequence[Letter], mode: str = DEHN, radius: int = 20) -> bool:
    if mode == DEHN:
        return not dehn_reduce(X, w).output
    if mode == ORACLE:
        return oracle_is_trivial(X, w, radius)
    if mode == CROSS:
        trace = dehn_reduce(X, w)
        dehn = not trace.output
        oracle = oracle_is_trivial(X, w, radius)
        if dehn != oracle:
            raise CrossCheckError(
                f"dehn says {dehn}, oracle says {oracle} for {X.format_word(w)}", trace)
        return dehn
    raise ValueError(f"unknown mode {mode!r}")


def are_equal(X: StaggeredComplex, u: Sequence[Letter], v: Sequence[Letter], mode: str = DEHN,
              radius: int = 20) -> bool:
    if X.end_factor(u) != X.end_factor(v) or X.start_factor(u) != X.start_factor(v):
        return False
    return is_trivial(X, tuple(u) + invert(v), mode, radius)


def area_estimate(X: StaggeredComplex, w: Sequence[Letter]) -> int:
    trace = dehn_reduce(X, w)
    if trace.output:
        raise ValueError("area is only defined for trivial words")
    return trace.area


# --------------------------------------------------------------------------
# corpora


def _moves(X: StaggeredComplex, here: str) -> List[Letter]:
    out: List[Letter] = []
    spec = X.factors[here]
    for i in range(spec.rank):
        out += [FactorLetter(here, i, 1), FactorLetter(here, i, -1)]
    for e in X.graph.edges:
        if e.source == here:
            out.append(EdgeLetter(e.id, 1))
        if e.target == here:
            out.append(EdgeLetter(e.id, -1))
    return out


def random_path(X: StaggeredComplex, length: int, rng: random.Random, start: Optional[str] = None) -> Word:
    here = start if start is not None else X.graph.base
    out: List[Letter] = []
    for _ in range(length):
        opts = [l for l in _moves(X, here) if not out or l != out[-1].inverse()]
        l = rng.choice(opts)
        out.append(l)
        if is_edge(l):
            here = X.graph.edge_ends(l)[1]
    return tuple(out)


def random_trivial_word(X: StaggeredComplex, rng: random.Random, max_relators: int = 5,
                        max_conjugator: int = 8) -> Word:
    """Product of conjugates of relators, based at the base vertex."""
    out: List[Letter] = []
    for _ in range(rng.randint(1, max_relators)):
        r = rng.choice(X.relators)
        rel = r.word if rng.random() < 0.5 else invert(r.word)
        k = rng.randrange(len(rel))
        rel = rel[k:] + rel[:k]
        target = X.start_factor(rel)
        for _ in range(1000):
            u = random_path(X, rng.randint(0, max_conjugator), rng)
            if X.end_factor(u, X.graph.base) == target:
                break
        else:
            raise RuntimeError("could not find a conjugator")
        out.extend(u + rel + invert(u))
    return normalize(X, out, X.graph.base)


def trivial_corpus(X: StaggeredComplex, count: int = 500, seed: int = 0, max_relators: int = 5,
                   max_conjugator: int = 8) -> List[Word]:
    rng = random.Random(seed)
    return [random_trivial_word(X, rng, max_relators, max_conjugator) for _ in range(count)]


def random_factor_word(X: StaggeredComplex, rng: random.Random, factor: Optional[str] = None,
                       max_length: int = 12) -> Word:
    """A nonempty normalized word inside one vertex space."""
    while True:
        f = factor if factor is not None else rng.choice(X.graph.factors).id
        spec = X.factors[f]
        letters = [FactorLetter(f, rng.randrange(spec.rank), rng.choice((1, -1)))
                   for _ in range(rng.randint(1, max_length))]
        w = normalize(X, letters, f)
        if w:
            return w
