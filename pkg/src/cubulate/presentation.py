"""Staggered presentations over free and free-abelian factors.

A presentation is a finite graph of spaces with trivial edge spaces whose
vertex spaces are one-vertex cube complexes (wedges of circles or tori),
together with relator cells attached along closed edge paths.  Words are
edge paths: sequences of factor letters (loops in a vertex space) and edge
letters (essential edges between vertex spaces).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

FREE = "free"
ABELIAN = "abelian"


class FactorLetter(NamedTuple):
    factor: str
    gen: int
    sign: int

    def inverse(self) -> "FactorLetter":
        return FactorLetter(self.factor, self.gen, -self.sign)


class EdgeLetter(NamedTuple):
    edge: str
    sign: int

    def inverse(self) -> "EdgeLetter":
        return EdgeLetter(self.edge, -self.sign)


Letter = Union[FactorLetter, EdgeLetter]
Word = Tuple[Letter, ...]


class PresentationError(ValueError):
    """Base class for presentation input errors."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {col}" if col is not None else "") + ")"
        super().__init__(message + where)


class DSLSyntaxError(PresentationError):
    pass


class UnknownSymbolError(PresentationError):
    pass


class DisconnectedGraphError(PresentationError):
    pass


class StaggeringError(PresentationError):
    pass


class ConjugateIntoFactorError(PresentationError):
    pass


def is_edge(letter: Letter) -> bool:
    return type(letter) is EdgeLetter


def invert(word: Sequence[Letter]) -> Word:
    return tuple(l.inverse() for l in reversed(word))


@dataclass(frozen=True)
class FactorSpec:
    id: str
    kind: str
    gens: Tuple[str, ...]

    @property
    def rank(self) -> int:
        return len(self.gens)


# Factor group elements are canonical hashable values:
#   free    -> tuple of nonzero ints, +-(gen+1), freely reduced
#   abelian -> tuple of ints, the exponent vector


def identity_element(spec: FactorSpec) -> tuple:
    return () if spec.kind == FREE else (0,) * spec.rank


def is_identity(spec: FactorSpec, g: tuple) -> bool:
    return not any(g)


def multiply(spec: FactorSpec, g: tuple, h: tuple) -> tuple:
    if spec.kind == ABELIAN:
        return tuple(x + y for x, y in zip(g, h))
    out = list(g)
    for x in h:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse_element(spec: FactorSpec, g: tuple) -> tuple:
    if spec.kind == ABELIAN:
        return tuple(-x for x in g)
    return tuple(-x for x in reversed(g))


def element_of(spec: FactorSpec, letters: Iterable[FactorLetter]) -> tuple:
    if spec.kind == ABELIAN:
        v = [0] * spec.rank
        for l in letters:
            v[l.gen] += l.sign
        return tuple(v)
    return multiply(spec, (), tuple((l.gen + 1) * l.sign for l in letters))


def letters_of(spec: FactorSpec, g: tuple) -> Tuple[FactorLetter, ...]:
    """Geodesic letter spelling; abelian elements use the lexicographic staircase."""
    if spec.kind == ABELIAN:
        out = []
        for i, k in enumerate(g):
            s = 1 if k > 0 else -1
            out.extend([FactorLetter(spec.id, i, s)] * abs(k))
        return tuple(out)
    return tuple(FactorLetter(spec.id, abs(x) - 1, 1 if x > 0 else -1) for x in g)


def element_length(spec: FactorSpec, g: tuple) -> int:
    return sum(abs(x) for x in g) if spec.kind == ABELIAN else len(g)


@dataclass(frozen=True)
class EssentialEdge:
    id: str
    source: str
    target: str


@dataclass
class GraphOfSpaces:
    factors: List[FactorSpec]
    edges: List[EssentialEdge]
    order: List[str]

    def __post_init__(self):
        self.factor_by_id: Dict[str, FactorSpec] = {f.id: f for f in self.factors}
        self.edge_by_id: Dict[str, EssentialEdge] = {e.id: e for e in self.edges}
        self.rank_of_edge = {e: i for i, e in enumerate(self.order)}

    @property
    def base(self) -> str:
        return self.factors[0].id

    def is_dumbbell(self) -> bool:
        return len(self.edges) == 1 and self.edges[0].source != self.edges[0].target

    def edge_ends(self, letter: EdgeLetter) -> Tuple[str, str]:
        e = self.edge_by_id[letter.edge]
        return (e.source, e.target) if letter.sign > 0 else (e.target, e.source)

    def is_connected(self) -> bool:
        if not self.factors:
            return False
        seen = {self.factors[0].id}
        stack = [self.factors[0].id]
        while stack:
            v = stack.pop()
            for e in self.edges:
                for a, b in ((e.source, e.target), (e.target, e.source)):
                    if a == v and b not in seen:
                        seen.add(b)
                        stack.append(b)
        return len(seen) == len(self.factors)

    def degree_bound(self) -> int:
        return 2 * sum(f.rank for f in self.factors) + 2 * len(self.edges)


@dataclass
class Relator:
    period: Word
    exponent: int
    min_edge: str
    max_edge: str

    @property
    def word(self) -> Word:
        return self.period * self.exponent

    @property
    def length(self) -> int:
        return len(self.period) * self.exponent

    @property
    def essential_count(self) -> int:
        return sum(1 for l in self.period if is_edge(l)) * self.exponent


@dataclass
class StaggeredComplex:
    graph: GraphOfSpaces
    relators: List[Relator]
    warnings: List[str] = field(default_factory=list)

    @property
    def factors(self) -> Dict[str, FactorSpec]:
        return self.graph.factor_by_id

    @property
    def n(self) -> Optional[int]:
        return min((r.exponent for r in self.relators), default=None)

    @property
    def W(self) -> int:
        """Maximum number of edges in an attaching map."""
        return max((r.length for r in self.relators), default=0)

    def letter_name(self, l: Letter) -> str:
        if is_edge(l):
            name = l.edge
        else:
            name = self.factors[l.factor].gens[l.gen]
        return name if l.sign > 0 else name + "^-1"

    def format_word(self, w: Sequence[Letter]) -> str:
        return " ".join(self.letter_name(l) for l in w)

    def start_factor(self, w: Sequence[Letter], default: Optional[str] = None) -> str:
        for l in w:
            return self.graph.edge_ends(l)[0] if is_edge(l) else l.factor
        return default if default is not None else self.graph.base

    def end_factor(self, w: Sequence[Letter], start: Optional[str] = None) -> str:
        for l in reversed(w):
            return self.graph.edge_ends(l)[1] if is_edge(l) else l.factor
        return start if start is not None else self.graph.base

    def is_path(self, w: Sequence[Letter], start: Optional[str] = None) -> bool:
        here = start if start is not None else self.start_factor(w)
        for l in w:
            if is_edge(l):
                a, b = self.graph.edge_ends(l)
                if a != here:
                    return False
                here = b
            elif l.factor != here:
                return False
        return True

    def is_closed(self, w: Sequence[Letter]) -> bool:
        return self.is_path(w) and self.start_factor(w) == self.end_factor(w)


# --------------------------------------------------------------------------
# normal forms


def syllables(X: StaggeredComplex, w: Sequence[Letter], start: Optional[str] = None):
    """Split a path into (factor, element) syllables separated by edge letters.

    Returns ``(sylls, edges)`` with ``len(sylls) == len(edges) + 1``; syllable
    ``i`` sits at the vertex space reached before edge ``i``.
    """
    here = start if start is not None else X.start_factor(w)
    sylls: List[Tuple[str, tuple]] = []
    edges: List[EdgeLetter] = []
    run: List[FactorLetter] = []
    for l in w:
        if is_edge(l):
            sylls.append((here, element_of(X.factors[here], run)))
            run = []
            edges.append(l)
            here = X.graph.edge_ends(l)[1]
        else:
            run.append(l)
    sylls.append((here, element_of(X.factors[here], run)))
    return sylls, edges


def from_syllables(X: StaggeredComplex, sylls, edges) -> Word:
    out: List[Letter] = []
    for i, (f, g) in enumerate(sylls):
        out.extend(letters_of(X.factors[f], g))
        if i < len(edges):
            out.append(edges[i])
    return tuple(out)


def _reduce_syllables(X: StaggeredComplex, sylls, edges):
    # stack-based removal of e . gamma . e^-1 with gamma trivial
    out_s = [sylls[0]]
    out_e: List[EdgeLetter] = []
    for e, (f, g) in zip(edges, sylls[1:]):
        if out_e and out_e[-1] == e.inverse() and is_identity(X.factors[out_s[-1][0]], out_s[-1][1]):
            out_e.pop()
            out_s.pop()
            pf, pg = out_s[-1]
            out_s[-1] = (pf, multiply(X.factors[pf], pg, g))
        else:
            out_e.append(e)
            out_s.append((f, g))
    return out_s, out_e


def normalize(X: StaggeredComplex, w: Sequence[Letter], start: Optional[str] = None) -> Word:
    """Reduce factor syllables to normal form and remove backtracking."""
    if not w:
        return ()
    sylls, edges = syllables(X, w, start)
    sylls, edges = _reduce_syllables(X, sylls, edges)
    return from_syllables(X, sylls, edges)


def cyclic_syllables(X: StaggeredComplex, w: Sequence[Letter]):
    """Cyclic syllable decomposition of a closed path.

    Returns ``(units, single)``.  ``units`` is a cyclically reduced list of
    ``(edge, element)`` pairs, each element living at the target of its
    edge.  For words without essential edges ``units`` is empty and
    ``single`` holds the ``(factor id, element)`` of the lone syllable.
    """
    sylls, edges = syllables(X, w)
    sylls, edges = _reduce_syllables(X, sylls, edges)
    if not edges:
        return [], sylls[0]
    fk = sylls[-1][0]
    seam = multiply(X.factors[fk], sylls[-1][1], sylls[0][1])
    mid = [g for _, g in sylls[1:-1]]
    E = list(edges)
    while len(E) >= 2 and E[-1] == E[0].inverse() and is_identity(X.factors[fk], seam):
        if len(E) == 2:
            f = X.graph.edge_ends(E[0])[1]
            return [], (f, mid[0])
        fk = X.graph.edge_ends(E[-2])[1]
        seam = multiply(X.factors[fk], mid[-1], mid[0])
        E = E[1:-1]
        mid = mid[1:-1]
    units = list(zip(E[:-1], mid)) + [(E[-1], seam)]
    return units, None


def units_to_word(X: StaggeredComplex, units, rotation: int = 0) -> Word:
    """Spell a cyclic unit list as a closed word starting at a syllable."""
    if not units:
        return ()
    n = len(units)
    units = units[rotation % n:] + units[: rotation % n]
    out: List[Letter] = []
    # start with the syllable preceding units[0], i.e. the last one
    e_last, g_last = units[-1]
    f_last = X.graph.edge_ends(e_last)[1]
    out.extend(letters_of(X.factors[f_last], g_last))
    for e, g in units[:-1]:
        out.append(e)
        out.extend(letters_of(X.factors[X.graph.edge_ends(e)[1]], g))
    out.append(e_last)
    return tuple(out)


def cyclic_reduce(X: StaggeredComplex, w: Sequence[Letter]) -> Word:
    """Cyclically reduced conjugate of a closed path with normalized syllables."""
    if not w:
        return ()
    units, single = cyclic_syllables(X, w)
    if not units:
        f, g = single
        return letters_of(X.factors[f], g)
    return units_to_word(X, units)


def compute_exponent(X: StaggeredComplex, R: Sequence[Letter]) -> Tuple[Word, int]:
    """Largest m with R equal, as a cyclic word, to p^m."""
    units, single = cyclic_syllables(X, R)
    if not units:
        w = cyclic_reduce(X, R)
        return w, 1
    n = len(units)
    for d in range(1, n + 1):
        if n % d == 0 and all(units[i] == units[(i + d) % n] for i in range(n)):
            return units_to_word(X, units[:d]), n // d
    raise AssertionError("unreachable")


def validate_staggering(X: StaggeredComplex) -> List[str]:
    rank = X.graph.rank_of_edge
    out = []
    rs = X.relators
    for i in range(len(rs)):
        for j in range(i + 1, len(rs)):
            c, d = rs[i], rs[j]
            if not (rank[c.max_edge] < rank[d.max_edge] and rank[c.min_edge] < rank[d.min_edge]):
                out.append(
                    f"relators {i} < {j}: need max {c.max_edge} < {d.max_edge} "
                    f"and min {c.min_edge} < {d.min_edge}"
                )
    return out


def min_exponent(X: StaggeredComplex) -> int:
    if not X.relators:
        raise ValueError("presentation has no relators")
    return X.n


# --------------------------------------------------------------------------
# DSL

_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<pow>\^\s*-?\s*\d+)|(?P<lp>\()|(?P<rp>\)))")


class _Symbols:
    def __init__(self, graph: GraphOfSpaces):
        self.table: Dict[str, Letter] = {}
        for f in graph.factors:
            for i, g in enumerate(f.gens):
                self.table[g] = FactorLetter(f.id, i, 1)
        for e in graph.edges:
            self.table[e.id] = EdgeLetter(e.id, 1)

    def resolve(self, name: str, line: Optional[int], col: Optional[int]) -> List[Letter]:
        if name in self.table:
            return [self.table[name]]
        if all(ch in self.table for ch in name):
            return [self.table[ch] for ch in name]
        raise UnknownSymbolError(f"unknown symbol {name!r}", line, col)


def _power(seq: List[Letter], k: int) -> List[Letter]:
    if k < 0:
        seq = list(invert(seq))
        k = -k
    return seq * k


def _parse_expr(text: str, symbols: _Symbols, line: Optional[int] = None, offset: int = 0) -> List[Letter]:
    pos = 0
    stack: List[List[Letter]] = [[]]
    last: List[List[Letter]] = []  # most recent atom per level, for ^k
    last.append(None)
    opens: List[int] = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, offset + pos + 1)
        col = offset + m.start() + 1
        if m.group("id"):
            atom = symbols.resolve(m.group("id"), line, col)
            stack[-1].extend(atom)
            last[-1] = (len(stack[-1]) - len(atom), atom)
        elif m.group("lp"):
            stack.append([])
            last.append(None)
            opens.append(col)
        elif m.group("rp"):
            if len(stack) == 1:
                raise DSLSyntaxError("unbalanced ')'", line, col)
            inner = stack.pop()
            last.pop()
            opens.pop()
            stack[-1].extend(inner)
            last[-1] = (len(stack[-1]) - len(inner), inner)
        else:
            if last[-1] is None:
                raise DSLSyntaxError("exponent without a preceding group", line, col)
            k = int(m.group("pow").replace("^", "").replace(" ", ""))
            at, atom = last[-1]
            powered = _power(list(atom), k)
            del stack[-1][at:]
            stack[-1].extend(powered)
            last[-1] = None
        pos = m.end()
    if len(stack) != 1:
        raise DSLSyntaxError("unbalanced '('", line, opens[-1] if opens else None)
    return stack[0]


def _insert_edges(graph: GraphOfSpaces, letters: List[Letter], start: str, closed: bool) -> List[Letter]:
    e = graph.edges[0]
    fwd, bwd = EdgeLetter(e.id, 1), EdgeLetter(e.id, -1)
    out: List[Letter] = []
    here = start
    for l in letters:
        if l.factor != here:
            out.append(fwd if here == e.source else bwd)
            here = l.factor
        out.append(l)
    if closed and here != start:
        out.append(fwd if here == e.source else bwd)
    return out


def parse_word(X: StaggeredComplex, text: str, closed: bool = True, start: Optional[str] = None,
               line: Optional[int] = None, offset: int = 0) -> Word:
    """Parse a word expression into an edge path.

    On a dumbbell graph, words written only in factor generators get edge
    letters inserted between syllables (and a closing letter when
    ``closed``).  Otherwise the word must already be a valid path.
    """
    letters = _parse_expr(text, _Symbols(X.graph), line, offset)
    return _as_path(X.graph, X, letters, closed, start, line)


def _as_path(graph, X, letters, closed, start, line):
    if graph.is_dumbbell() and letters and not any(is_edge(l) for l in letters):
        begin = start if start is not None else (graph.base if closed else letters[0].factor)
        letters = _insert_edges(graph, letters, begin, closed)
    w = tuple(letters)
    probe = StaggeredComplex(graph, []) if X is None else X
    if not probe.is_path(w, start):
        raise DSLSyntaxError("word is not an edge path in the graph of spaces", line)
    if closed and w and probe.start_factor(w) != probe.end_factor(w):
        raise DSLSyntaxError("word is not a closed path", line)
    return w


def parse_presentation(text: str) -> StaggeredComplex:
    """Parse the presentation DSL into a validated :class:`StaggeredComplex`."""
    factors: List[FactorSpec] = []
    edges: List[EssentialEdge] = []
    order: Optional[List[str]] = None
    raw_relators: List[Tuple[str, int, int]] = []
    names: Dict[str, str] = {}

    def declare(name, what, ln, col):
        if name in names:
            raise DSLSyntaxError(f"duplicate name {name!r} (already a {names[name]})", ln, col)
        names[name] = what

    lines = text.split("\n")
    stmts = []
    for ln, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0]
        col0 = 0
        for part in body.split("/"):
            stmts.append((ln, col0, part))
            col0 += len(part) + 1
    for ln, col0, stmt in stmts:
        if not stmt.strip():
            continue
        lead = len(stmt) - len(stmt.lstrip())
        toks = stmt.split()
        kw = toks[0]
        col = col0 + lead + 1
        if kw == "factor":
            if len(toks) < 4 or toks[2] not in (FREE, ABELIAN):
                raise DSLSyntaxError("expected: factor <Id> (free|abelian) <gen>+", ln, col)
            declare(toks[1], "factor", ln, col)
            for g in toks[3:]:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", g):
                    raise DSLSyntaxError(f"bad generator name {g!r}", ln, col)
                declare(g, "generator", ln, col)
            factors.append(FactorSpec(toks[1], toks[2], tuple(toks[3:])))
        elif kw == "edge":
            if len(toks) != 4:
                raise DSLSyntaxError("expected: edge <Id> <FactorId> <FactorId>", ln, col)
            for f in toks[2:]:
                if names.get(f) != "factor":
                    raise UnknownSymbolError(f"unknown factor {f!r}", ln, col)
            declare(toks[1], "edge", ln, col)
            edges.append(EssentialEdge(toks[1], toks[2], toks[3]))
        elif kw == "order":
            if len(toks) < 2 or toks[1] != "edges":
                raise DSLSyntaxError("expected: order edges <Id>+", ln, col)
            order = toks[2:]
        elif kw == "relator":
            expr = stmt[stmt.index("relator") + len("relator"):]
            m = re.search(r"\^\s*(-?\d+)\s*$", expr)
            if not m:
                raise DSLSyntaxError("relator must end with ^<int>", ln, col + len(stmt.strip()))
            raw_relators.append((expr, ln, col0 + stmt.index("relator") + len("relator")))
        else:
            raise DSLSyntaxError(f"unknown statement {kw!r}", ln, col)

    if not factors:
        raise DSLSyntaxError("no factors declared", 1, 1)
    if order is None:
        order = [e.id for e in edges]
    if sorted(order) != sorted(e.id for e in edges) or len(set(order)) != len(order):
        raise DSLSyntaxError("edge order must list every edge exactly once")
    graph = GraphOfSpaces(factors, edges, list(order))
    if not graph.is_connected():
        raise DisconnectedGraphError("graph of spaces is disconnected")

    X = StaggeredComplex(graph, [])
    for expr, ln, off in raw_relators:
        w = parse_word(X, expr, closed=True, line=ln, offset=off)
        X.relators.append(make_relator(X, w, ln))
    violations = validate_staggering(X)
    if violations:
        raise StaggeringError("staggering violation: " + "; ".join(violations))
    if X.relators and X.n < 4:
        X.warnings.append(f"minimal exponent {X.n} < 4: property checks are outside guaranteed territory")
    return X


def make_relator(X: StaggeredComplex, w: Sequence[Letter], line: Optional[int] = None) -> Relator:
    reduced = cyclic_reduce(X, w)
    if not any(is_edge(l) for l in reduced):
        raise ConjugateIntoFactorError("relator is conjugate into a factor", line)
    p, m = compute_exponent(X, reduced)
    rank = X.graph.rank_of_edge
    used = sorted({l.edge for l in p if is_edge(l)}, key=rank.__getitem__)
    return Relator(p, m, used[0], used[-1])


def serialize(X: StaggeredComplex) -> str:
    lines = []
    for f in X.graph.factors:
        lines.append(f"factor {f.id} {f.kind} " + " ".join(f.gens))
    for e in X.graph.edges:
        lines.append(f"edge {e.id} {e.source} {e.target}")
    if X.graph.edges:
        lines.append("order edges " + " ".join(X.graph.order))
    for r in X.relators:
        lines.append(f"relator ({X.format_word(r.period)})^{r.exponent}")
    return "\n".join(lines) + "\n"


P0_TEXT = """\
factor A free a
factor B free b
edge t A B
"""

P1_TEXT = """\
factor A free a
factor B free b
edge t A B
relator (a b)^4
"""

P2_TEXT = """\
factor A abelian x y
factor B free b
edge t A B
relator (x y b)^4
"""


def builtin(name: str) -> StaggeredComplex:
    texts = {"P0": P0_TEXT, "P1": P1_TEXT, "P2": P2_TEXT}
    return parse_presentation(texts[name])
