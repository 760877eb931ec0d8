"""Command line entry point.

Every subcommand prints its JSON (or DOT) report on stdout.  With
``--out-dir`` it also writes the report, a run manifest, and any figures.
Exit codes: 0 when every requested assertion holds, 2 when one fails,
1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__
from .presentation import PresentationError, StaggeredComplex, builtin, parse_presentation, parse_word, serialize

EXIT_OK, EXIT_INPUT, EXIT_ASSERT = 0, 1, 2
SCHEMA_VERSION = "1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunManifest:
    presentation_hash: str
    subcommand: str
    flags: Dict
    seed: Optional[int]
    version: str = __version__
    stats: Dict = field(default_factory=dict)
    assertions: List[Dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "toolkit_version": self.version,
            "presentation_sha256": self.presentation_hash,
            "subcommand": self.subcommand,
            "flags": self.flags,
            "seed": self.seed,
            "stats": self.stats,
            "assertions": self.assertions,
        }

    @property
    def ok(self) -> bool:
        return all(a["ok"] for a in self.assertions)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_presentation(ref: str) -> StaggeredComplex:
    """A DSL file path, or the name of a built-in example (P0, P1, P2)."""
    path = Path(ref)
    if path.is_file():
        return parse_presentation(path.read_text(encoding="utf-8"))
    if ref.upper() in ("P0", "P1", "P2"):
        return builtin(ref.upper())
    raise UsageError(f"no presentation file or built-in named {ref!r}")


def threads() -> int:
    try:
        return max(1, int(os.environ.get("CUBULATE_THREADS", "1")))
    except ValueError:
        raise UsageError("CUBULATE_THREADS must be an integer")


# --------------------------------------------------------------------------
# subcommands


class Result:
    def __init__(self, report, dot: Optional[str] = None):
        self.report = report
        self.dot = dot
        self.assertions: List[Dict] = []
        self.stats: Dict = {}
        self.figures: Dict[str, object] = {}

    def check(self, name: str, ok: bool):
        self.assertions.append({"name": name, "ok": bool(ok)})


def cmd_validate(X, args) -> Result:
    from .presentation import validate_staggering
    stagger = validate_staggering(X)
    rep = {
        "factors": [{"id": f.id, "kind": f.kind, "generators": list(f.gens)} for f in X.graph.factors],
        "edges": [{"id": e.id, "source": e.source, "target": e.target} for e in X.graph.edges],
        "edge_order": list(X.graph.order),
        "relators": [{"word": X.format_word(r.word), "period": X.format_word(r.period),
                      "exponent": r.exponent, "length": r.length,
                      "essential_edges": r.essential_count} for r in X.relators],
        "n_X": X.n,
        "W_X": X.W,
        "staggering_violations": stagger,
        "warnings": list(X.warnings),
        "canonical": serialize(X),
    }
    res = Result(rep)
    res.check("staggered", not stagger)
    res.stats = {"relators": len(X.relators), "n_X": X.n}
    return res


def cmd_reduce(X, args) -> Result:
    from .word_problem import bs_length, dehn_reduce
    if args.word is None:
        raise UsageError("reduce needs --word")
    w = parse_word(X, args.word)
    trace = dehn_reduce(X, w)
    trivial = not trace.output
    rep = {
        "input": X.format_word(w),
        "normal_form": X.format_word(trace.output),
        "trivial": trivial,
        "bs_length": bs_length(w),
        "area_estimate": trace.area if trivial else None,
        "trace": [e.as_dict(X) for e in trace.events],
    }
    res = Result(rep)
    if args.expect is not None:
        res.check(f"trivial is {args.expect}", trivial == (args.expect == "trivial"))
    return res


def _ball(X, args):
    from .ball import build_ball
    return build_ball(X, args.radius)


def cmd_ball(X, args) -> Result:
    B = _ball(X, args)
    rep = {
        "radius": B.radius,
        "safe_radius": B.safe_radius,
        "W_X": B.W_X,
        "vertices": [{"id": v, "label": X.format_word(B.labels[v]), "component": B.component[v],
                      "distance": B.dist[v]} for v in range(len(B))],
        "edges": [{"id": e.id, "tail": e.tail, "head": e.head, "letter": X.letter_name(e.letter)}
                  for e in B.edges],
        "cells": [{"id": c.id, "relator": c.relator, "complete": c.complete,
                   "boundary": [e for e, _ in c.boundary]} for c in B.cells],
    }
    lines = ["digraph ball {"]
    lines += [f'  v{v} [label="{v}"];' for v in range(len(B))]
    lines += [f'  v{e.tail} -> v{e.head} [label="{X.letter_name(e.letter)}"];' for e in B.edges]
    lines.append("}")
    res = Result(rep, "\n".join(lines) + "\n")
    res.stats = {"vertices": len(B), "edges": len(B.edges), "cells": len(B.cells)}
    return res


def _parse_trace(text: str):
    try:
        e, s = text.split(",")
        side = {"+": 1, "plus": 1, "1": 1, "+1": 1, "-": -1, "minus": -1, "-1": -1}[s.strip()]
        return int(e), side
    except (ValueError, KeyError):
        raise UsageError(f"--trace expects <edge id>,<+|->, got {text!r}")


def cmd_walls(X, args) -> Result:
    from . import walls as W
    B = _ball(X, args)
    allw = W.all_walls(B)
    done = W.complete_walls(B)
    rep: Dict = {"radius": B.radius, "walls": len(allw), "complete_walls": len(done)}
    res = Result(rep)
    if args.trace:
        eid, side = _parse_trace(args.trace)
        if not 0 <= eid < len(B.edges):
            raise UsageError(f"edge {eid} is not in the ball")
        w = W.wall_of(B, (eid, side))
        rep["wall"] = W.wall_report(B, w)
        res.dot = W.wall_to_dot(B, w) + "\n"
    checks = args.check or []
    results: Dict[str, Dict] = {}
    if "embed" in checks:
        n = sum(W.check_embedded(B, w) for w in done)
        results["embed"] = {"passed": n, "of": len(done)}
    if "separate" in checks:
        n = sum(W.check_separates(B, w) for w in done)
        results["separate"] = {"passed": n, "of": len(done)}
    if "vsint" in checks:
        n = sum(W.single_hyperplane(B, w) for w in done)
        results["vsint"] = {"passed": n, "of": len(done)}
    if "qc" in checks:
        vals = [W.carrier_quasiconvexity(B, w) for w in done]
        results["qc"] = {"max_constant": max(vals, default=0), "bound": B.W_X,
                         "passed": sum(v <= B.W_X for v in vals), "of": len(vals)}
    if "linsep" in checks:
        core = B.core()
        pairs = [(x, y) for x in core for y in core if x < y]
        kappa, eps, rows = W.linear_separation_fit(B, pairs)
        results["linsep"] = {"kappa": kappa, "epsilon": eps, "pairs": len(rows),
                             "passed": 1 if kappa is not None and kappa > 0 else 0, "of": 1}
        if kappa is None:
            results["linsep"]["warning"] = "fewer than two distinct distances: degenerate fit"
        res.figures["linsep.png"] = ("linsep", rows, kappa, eps)
    if "qc" in results and (X.n is None or X.n < 4):
        results["qc"]["warning"] = "minimal exponent below 4: bound not asserted"
    for name, r in results.items():
        if "warning" not in r:
            res.check(name, r["passed"] == r["of"])
    rep["checks"] = results
    res.stats = {"vertices": len(B), "walls": len(allw), "complete_walls": len(done)}
    return res


def cmd_horoball(X, args) -> Result:
    from .horoball import (HoroballGraph, horoball_distance, hyperbolicity_estimate, line_horoball,
                           log_envelope, required_depth, vertex_space_distance)
    rng = random.Random(args.seed)
    if args.component is None:
        g = line_horoball(args.base_size, args.depth)
        names = list(range(g.n))
    else:
        B = _ball(X, args)
        members = [v for v in range(len(B)) if B.component[v] == args.component]
        if not members:
            raise UsageError(f"component {args.component} is not in the ball")
        dist = {(a, b): vertex_space_distance(B, members[a], members[b])
                for a in range(len(members)) for b in range(len(members))}
        g = HoroballGraph(len(members), lambda a, b: dist[(a, b)], args.depth)
        names = members
    if args.pairs:
        try:
            pairs = [tuple(int(x) for x in line.replace(",", " ").split())
                     for line in Path(args.pairs).read_text().splitlines() if line.strip()]
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read pairs: {exc}")
        index = {v: i for i, v in enumerate(names)}
        if any(len(p) != 2 or p[0] not in index or p[1] not in index for p in pairs):
            raise UsageError("pairs must be two base points per line")
        pairs = [(index[a], index[b]) for a, b in pairs]
    else:
        pairs = [(rng.randrange(g.n), rng.randrange(g.n)) for _ in range(args.random)]
    rows = [{"u": names[a], "v": names[b], "d_base": g.d_base(a, b),
             "d_horoball": horoball_distance(g, (a, 0), (b, 0))} for a, b in pairs]
    C = log_envelope(g, pairs) if pairs else 0.0
    delta, count = hyperbolicity_estimate(g.bfs, len(g.adj), samples=args.samples, seed=args.seed)
    rep = {"pairs": rows, "envelope_C": round(C, 6), "delta_estimate": delta,
           "delta_quadruples": count, "depth": args.depth, "base_points": g.n}
    res = Result(rep)
    diam = max((g.d_base(a, b) for a in range(g.n) for b in range(g.n)), default=0)
    res.check("depth spans the base", args.depth >= required_depth(diam) - 1)
    res.figures["horoball_envelope.png"] = ("envelope", rows)
    res.stats = {"base_points": g.n, "pairs": len(rows)}
    return res


def cmd_dual(X, args) -> Result:
    from .dual_cube import build_dual, dual_report, halfspace_system
    B = _ball(X, args)
    D = build_dual(halfspace_system(B), flip_margin=args.flip_margin)
    rep = dual_report(D)
    rep["link_violations"] = len(rep["link_violations"])
    lines = ["graph dual {"]
    lines += [f"  z{z};" for z in range(len(D.zero_cubes))]
    lines += [f'  z{a} -- z{b} [label="w{w}"];' for a, b, w in D.one_cubes]
    lines.append("}")
    res = Result(rep, "\n".join(lines) + "\n")
    res.check("connected", rep["connected"])
    res.check("link condition", rep["link_violations"] == 0)
    res.stats = {"zero_cubes": rep["zero_cubes"], "walls": rep["walls"]}
    return res


def cmd_diagram(X, args) -> Result:
    from .diagrams import (diagram_from_trace, diagram_to_dot, internal_cell_instance, mirror_pair,
                           reduce_diagram, relator_disk, spelling_audit)
    from .word_problem import dehn_reduce
    if args.from_word is not None:
        w = parse_word(X, args.from_word)
        trace = dehn_reduce(X, w)
        if trace.output:
            raise UsageError("the word is not trivial, so it bounds no diagram")
        D = diagram_from_trace(X, w, trace)
    else:
        if not X.relators:
            raise UsageError("the presentation has no relators")
        D = {"disk": relator_disk, "internal": internal_cell_instance}.get(args.instance, None)
        D = D(X) if D else reduce_diagram(mirror_pair(X))
    audit = spelling_audit(D)
    rep = {"boundary": X.format_word(D.boundary_word()), "area": D.area, "audit": audit}
    res = Result(rep, diagram_to_dot(D) + "\n")
    res.check("spelling audit", audit["ok"])
    res.stats = {"cells": D.area}
    return res


def cmd_check_all(X, args) -> Result:
    from .acceptance import run_all
    results = run_all(seed=args.seed, radius=args.radius, threads=threads(), only=args.only)
    for r in results:
        print(r.line(), file=sys.stderr)
    res = Result({"criteria": [r.as_dict() for r in results]})
    for r in results:
        res.check(f"criterion {r.number}", r.ok)
    res.stats = {"criteria": len(results), "passed": sum(r.ok for r in results)}
    return res


COMMANDS = {
    "validate": cmd_validate, "reduce": cmd_reduce, "ball": cmd_ball, "walls": cmd_walls,
    "horoball": cmd_horoball, "dual": cmd_dual, "diagram": cmd_diagram, "check-all": cmd_check_all,
}


# --------------------------------------------------------------------------
# figures


def render_figures(figures: Dict[str, object], out: Path) -> List[str]:
    if not figures:
        return []
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    for name, spec in sorted(figures.items()):
        fig, ax = plt.subplots(figsize=(5, 4))
        if spec[0] == "linsep":
            _, rows, kappa, eps = spec
            ds = [r[2] for r in rows]
            ax.scatter(ds, [r[3] for r in rows], s=8, alpha=0.5)
            if kappa is not None:
                xs = [0, max(ds)]
                ax.plot(xs, [kappa * x - eps for x in xs], color="C1", label=f"{kappa:g} d - {eps:g}")
                ax.legend()
            ax.set_xlabel("distance")
            ax.set_ylabel("separating walls")
        else:
            import math
            rows = spec[1]
            ax.scatter([r["d_base"] for r in rows], [r["d_horoball"] for r in rows], s=8)
            top = max((r["d_base"] for r in rows), default=1)
            xs = [i * top / 100 for i in range(101)]
            ax.plot(xs, [2 * math.log2(x + 1) for x in xs], color="C1", label="2 log2(d+1)")
            ax.legend()
            ax.set_xlabel("base distance")
            ax.set_ylabel("horoball distance")
        fig.tight_layout()
        fig.savefig(out / name, metadata={"Software": None})
        plt.close(fig)
        written.append(name)
    return written


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cubulate", description="Walls, horoballs and dual cube complexes for staggered presentations.")
    p.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("presentation_file", nargs="?", help="presentation file or built-in name")
    common.add_argument("-p", "--presentation", help="presentation file or built-in name (P0, P1, P2)")
    common.add_argument("--radius", type=int, default=8)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", "--out", dest="format", choices=("json", "dot"), default="json")
    common.add_argument("--out-dir", type=Path)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("validate", parents=[common], help="parse and check a presentation")
    r = sub.add_parser("reduce", parents=[common], help="Dehn-reduce a word")
    r.add_argument("--word")
    r.add_argument("--expect", choices=("trivial", "nontrivial"))
    sub.add_parser("ball", parents=[common], help="build a ball of the universal cover")
    w = sub.add_parser("walls", parents=[common], help="trace and check walls")
    w.add_argument("--trace", help="edge id and side, e.g. 12,+")
    w.add_argument("--check", action="append", choices=("embed", "separate", "vsint", "qc", "linsep"))
    h = sub.add_parser("horoball", parents=[common], help="horoball distances over a base")
    h.add_argument("--component", type=int, help="vertex-space component of the ball as base")
    h.add_argument("--base-size", type=int, default=64, help="points of the line base")
    h.add_argument("--depth", type=int, default=8)
    h.add_argument("--pairs", help="file with one pair of base points per line")
    h.add_argument("--random", type=int, default=100, help="number of random pairs")
    h.add_argument("--samples", type=int, default=2000, help="quadruples for the delta estimate")
    d = sub.add_parser("dual", parents=[common], help="build the dual cube complex")
    d.add_argument("--flip-margin", type=int, default=2)
    g = sub.add_parser("diagram", parents=[common], help="audit a reduced diagram")
    g.add_argument("--from-word")
    g.add_argument("--instance", choices=("disk", "mirror", "internal"), default="internal")
    g.add_argument("--emit", dest="format", choices=("json", "dot"))
    c = sub.add_parser("check-all", parents=[common], help="run the acceptance criteria")
    c.add_argument("--only", type=int, action="append", choices=range(1, 11), metavar="N")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        ref = args.presentation or args.presentation_file or "P1"
        X = load_presentation(ref)
        res = COMMANDS[args.command](X, args)
    except UsageError as exc:
        print(f"cubulate: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PresentationError as exc:
        print(f"cubulate: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"cubulate: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    flags = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
             if k not in ("command", "out_dir", "presentation", "presentation_file")}
    manifest = RunManifest(hashlib.sha256(serialize(X).encode()).hexdigest(), args.command, flags,
                           args.seed, stats=res.stats, assertions=res.assertions)
    report = dict(res.report) if isinstance(res.report, dict) else {"result": res.report}
    report["manifest"] = manifest.as_dict()

    fmt = args.format or "json"
    if fmt == "dot" and res.dot is None:
        print(f"cubulate: error: {args.command} has no DOT output", file=sys.stderr)
        return EXIT_INPUT
    text = res.dot if fmt == "dot" else dumps(report)
    sys.stdout.write(text)

    if args.out_dir is not None:
        out = args.out_dir
        out.mkdir(parents=True, exist_ok=True)
        stem = args.command.replace("-", "_")
        (out / f"{stem}.json").write_text(dumps(report))
        if res.dot is not None:
            (out / f"{stem}.dot").write_text(res.dot)
        manifest.stats["figures"] = render_figures(res.figures, out)
        (out / "manifest.json").write_text(dumps(manifest.as_dict()))
    return EXIT_OK if manifest.ok else EXIT_ASSERT


if __name__ == "__main__":
    sys.exit(main())
