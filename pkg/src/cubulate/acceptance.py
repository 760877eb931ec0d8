"""The ten desk-scale acceptance criteria as callable checks.

Each check returns a :class:`CriterionResult` whose ``details`` hold only
deterministic data; wall-clock time is kept separately in ``seconds``.
"""

from __future__ import annotations

import os
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .ball import BallComplex, all_geodesics, build_ball, convexity_check, geodesic_cell_report
from .diagrams import diagram_from_trace, internal_cell_instance, spelling_audit
from .dual_cube import build_dual, halfspace_system, npc_link_check, properness_witness, restricted_tree_check
from .horoball import horoball_distance, line_horoball, log_envelope, normal_form_distance
from .presentation import builtin, parse_word
from .walls import (
    carrier_quasiconvexity,
    check_embedded,
    check_separates,
    complete_walls,
    linear_separation_fit,
    single_crossing_check,
    single_hyperplane,
)
from .word_problem import DEHN, ORACLE, dehn_reduce, is_trivial, random_factor_word, trivial_corpus


@dataclass
class CriterionResult:
    number: int
    name: str
    ok: bool
    details: Dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.ok else 'FAIL'}] {self.name} ({self.seconds:.1f}s)"

    def as_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "ok": self.ok, "details": self.details}


_BALLS: Dict[Tuple[str, int], BallComplex] = {}


def ball(name: str, radius: int) -> BallComplex:
    key = (name, radius)
    if key not in _BALLS:
        _BALLS[key] = build_ball(builtin(name), radius)
    return _BALLS[key]


def torsion_order(seed: int = 0, radius: int = 8) -> CriterionResult:
    X = builtin("P1")
    rows, ok = [], True
    for k in range(1, 5):
        w = parse_word(X, f"(a b)^{k}")
        dehn = is_trivial(X, w, DEHN)
        oracle = is_trivial(X, w, ORACLE, radius=20)
        good = dehn == oracle == (k == 4)
        ok &= good
        rows.append({"k": k, "dehn": dehn, "oracle": oracle})
    return CriterionResult(1, "torsion order of (ab) is 4", ok, {"powers": rows})


def factor_injectivity(seed: int = 0, radius: int = 8) -> CriterionResult:
    X = builtin("P1")
    rng = random.Random(seed)
    words = [random_factor_word(X, rng) for _ in range(200)]
    trivial_dehn = sum(is_trivial(X, w, DEHN) for w in words)
    trivial_oracle = sum(is_trivial(X, w, ORACLE) for w in words)
    return CriterionResult(2, "single-factor words are nontrivial", trivial_dehn == trivial_oracle == 0,
                           {"words": len(words), "trivial_dehn": trivial_dehn, "trivial_oracle": trivial_oracle})


def _corpus(seed: int):
    X = builtin("P1")
    words = trivial_corpus(X, 500, seed=seed, max_relators=5, max_conjugator=8)
    return X, words, [dehn_reduce(X, w) for w in words]


def dehn_linear_area(seed: int = 0, radius: int = 8) -> CriterionResult:
    X, words, traces = _corpus(seed)
    unreduced = sum(1 for t in traces if t.output)
    lengths = [len(w) for w in words]
    areas = [t.area for t in traces]
    slope, intercept = statistics.linear_regression(lengths, areas)
    finite = all(map(lambda v: v == v and abs(v) != float("inf"), (slope, intercept)))
    return CriterionResult(3, "Dehn reduction terminates with linear area", unreduced == 0 and finite, {
        "words": len(words), "unreduced": unreduced,
        "fit_slope": round(slope, 6), "fit_intercept": round(intercept, 6),
        "max_area_per_letter": round(max(a / l for a, l in zip(areas, lengths) if l), 6),
        "empty_after_normalization": lengths.count(0),
    })


def geodesic_cells(seed: int = 0, radius: int = 8) -> CriterionResult:
    B = ball("P1", radius)
    n_pairs, n_geod, orbit_bad, half_bad, max_frac = geodesic_cell_report(B, 8)
    convex = convexity_check(B)
    ok = not orbit_bad and not half_bad and not convex
    return CriterionResult(4, "geodesics avoid position classes and half-boundaries; vertex spaces convex", ok, {
        "pairs": n_pairs, "geodesics": n_geod, "position_class_violations": len(orbit_bad),
        "half_boundary_violations": len(half_bad), "max_shared_fraction": max_frac,
        "convexity_violations": len(convex),
    })


def wall_theorems(seed: int = 0, radius: int = 8) -> CriterionResult:
    rows, ok = [], True
    for name, R in (("P1", radius), ("P2", 6)):
        B = ball(name, R)
        walls = complete_walls(B)
        emb = sum(check_embedded(B, w) for w in walls)
        sep = sum(check_separates(B, w) for w in walls)
        one = sum(single_hyperplane(B, w) for w in walls)
        ok &= bool(walls) and emb == sep == one == len(walls)
        rows.append({"presentation": name, "radius": R, "complete_walls": len(walls),
                     "embedded": emb, "separating": sep, "single_hyperplane": one})
    return CriterionResult(5, "complete walls embed, separate, meet vertex spaces in one hyperplane", ok,
                           {"balls": rows})


def carrier_qc(seed: int = 0, radius: int = 8) -> CriterionResult:
    B = ball("P1", radius)
    vals = [carrier_quasiconvexity(B, w) for w in complete_walls(B)]
    worst = max(vals)
    return CriterionResult(6, "carriers are quasiconvex within W_X", worst <= B.W_X,
                           {"carriers": len(vals), "max_constant": worst, "bound": B.W_X})


def horoball_metrics(seed: int = 0, radius: int = 8) -> CriterionResult:
    g = line_horoball(64, 8)
    rng = random.Random(seed)
    mismatches = 0
    for _ in range(100):
        u = (rng.randrange(64), rng.randrange(9))
        v = (rng.randrange(64), rng.randrange(9))
        mismatches += horoball_distance(g, u, v) != normal_form_distance(g, u, v)
    C = log_envelope(g)
    d8 = horoball_distance(g, (0, 0), (8, 0))
    ok = mismatches == 0 and C < float("inf") and d8 == 6
    return CriterionResult(7, "horoball distances match normal forms; logarithmic envelope", ok,
                           {"pairs": 100, "mismatches": mismatches, "envelope_C": round(C, 6),
                            "distance_at_base_8": d8})


def linear_separation(seed: int = 0, radius: int = 8) -> CriterionResult:
    B = ball("P1", radius)
    core = B.core()
    reach = B.W_X + 1
    n_geod, failing = 0, 0
    for x in core:
        dx = B.bfs(x)
        for y in core:
            if y <= x:
                continue
            for g in all_geodesics(B, y, x, dx):
                n_geod += 1
                failing += bool(single_crossing_check(B, g, reach))
    pairs = [(x, y) for x in core for y in core if x < y]
    kappa, eps, _ = linear_separation_fit(B, pairs)
    ok = failing == 0 and kappa is not None and kappa > 0
    return CriterionResult(8, "single-crossing walls near every geodesic edge; linear separation", ok, {
        "geodesics": n_geod, "failing_geodesics": failing, "reach": reach,
        "kappa": kappa, "epsilon": eps,
    })


def dual_complex(seed: int = 0, radius: int = 8) -> CriterionResult:
    B0 = ball("P0", 3)
    essential_only = lambda w: all(B0.edges[e].essential for e in w.crossings)
    tree = restricted_tree_check(build_dual(halfspace_system(B0, select=essential_only)))
    B = ball("P1", radius)
    H = halfspace_system(B)
    D = build_dual(H)
    core = B.core()
    rng = random.Random(seed)
    pairs = [(x, y) for x in core for y in core if x < y]
    pairs = sorted(rng.sample(pairs, min(200, len(pairs))))
    rows = properness_witness(D, pairs)
    mismatches = sum(r["dual_distance"] != r["separating_walls"] for r in rows)
    hyperplanes = D.hyperplanes()
    links = npc_link_check(D)
    ok = tree and D.connected() and hyperplanes == len(H) and not links and mismatches == 0
    return CriterionResult(9, "dual cube complex: tree for P0, connected NPC for P1", ok, {
        "p0_restricted_is_tree": tree, "connected": D.connected(), "zero_cubes": len(D.zero_cubes),
        "one_cubes": len(D.one_cubes), "hyperplanes": hyperplanes, "walls_in_system": len(H),
        "complete_walls_in_ball": len(complete_walls(B)), "link_violations": len(links),
        "sampled_pairs": len(rows), "distance_mismatches": mismatches,
    })


def spelling_audits(seed: int = 0, radius: int = 8) -> CriterionResult:
    X, words, traces = _corpus(seed)
    multi, failing = 0, 0
    for w, t in zip(words, traces):
        D = diagram_from_trace(X, w, t)
        if D.area >= 2:
            multi += 1
            failing += len(spelling_audit(D)["extreme"]) < 2
    inst = spelling_audit(internal_cell_instance(X))
    need = 2 * X.n
    ok = failing == 0 and len(inst["extreme"]) >= need
    return CriterionResult(10, "reduced diagrams have enough extreme cells", ok, {
        "diagrams": len(words), "multi_cell": multi, "failing": failing,
        "internal_instance_extreme": len(inst["extreme"]), "internal_instance_need": need,
    })


CRITERIA: List[Callable[..., CriterionResult]] = [
    torsion_order, factor_injectivity, dehn_linear_area, geodesic_cells, wall_theorems,
    carrier_qc, horoball_metrics, linear_separation, dual_complex, spelling_audits,
]


def run_one(k: int, seed: int = 0, radius: int = 8) -> CriterionResult:
    t = time.perf_counter()
    res = CRITERIA[k - 1](seed=seed, radius=radius)
    res.seconds = time.perf_counter() - t
    return res


def run_all(seed: int = 0, radius: int = 8, threads: Optional[int] = None,
            only: Optional[List[int]] = None) -> List[CriterionResult]:
    """Run the selected criteria, in parallel processes when ``threads`` > 1.
    Results come back ordered by criterion number either way."""
    ks = sorted(only) if only else list(range(1, len(CRITERIA) + 1))
    if threads is None:
        threads = int(os.environ.get("CUBULATE_THREADS", "1") or 1)
    if threads <= 1:
        return [run_one(k, seed, radius) for k in ks]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        futs = [ex.submit(run_one, k, seed, radius) for k in ks]
        return [f.result() for f in futs]
