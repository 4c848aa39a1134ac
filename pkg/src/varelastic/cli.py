"""Command-line front end: ``varelastic <subcommand> ...``.

Exit status: 0 success, 1 a check failed, 2 bad input.  Machine-readable
outputs go to files (JSON with 17 significant digits, CSV, PGM, SVG);
standard output carries a human summary with 6 significant digits.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import FORMAT_VERSION, __version__
from .curve import InvalidCurveError
from .graphcheck import (
    GraphAmbiguityError,
    boundary_marking,
    cusp_parity_check,
    extract_graph,
    graph_report,
    is_regular,
)
from .io import InputError, load_system, read_json, save_system, write_json
from .shapes import from_spec
from .varifold import CurveSystem, density_bound_check, monotonicity_profile, system_energy
from .winding import OnCurveError, reconstruct_set

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2


def fmt(x) -> str:
    return f"{float(x):.6g}"


# ---------------------------------------------------------------- argument types

def _pair(kind, count):
    def parse(text: str):
        parts = text.split(",")
        if len(parts) != count:
            raise argparse.ArgumentTypeError(f"expected {count} comma-separated values, got {text!r}")
        try:
            return tuple(kind(p) for p in parts)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad number in {text!r}") from None
    return parse


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _add_source(sp: argparse.ArgumentParser) -> None:
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="curve JSON file")
    src.add_argument("--gen", metavar="SPEC",
                     help="built-in generator: circle:r,n | ellipse:a,b,n | figure-eight:n | "
                          "figbm:n | square:s,n | drops:n | two-cusp:n | ex1:theta,n")


def _add_out(sp, flag="--out", required=False, help=None):
    sp.add_argument(flag, type=Path, required=required, help=help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varelastic",
        description="p-elastic energies, varifold checks, winding-parity reconstruction, "
                    "junction graphs and constrained minimization for planar curve systems.")
    parser.add_argument("--version", action="version",
                        version=f"varelastic {__version__} (curve format {FORMAT_VERSION})")
    parser.add_argument("--threads", type=_positive_int, default=1,
                        help="worker threads for parallel evaluation (default 1)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("energy", help="mass, E_p and F_p of a curve system")
    _add_source(sp)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    _add_out(sp, help="energy report JSON")

    sp = sub.add_parser("check", help="inequality, regularity and cusp-parity checks")
    _add_source(sp)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--samples", type=_positive_int, default=1000,
                    help="on-curve sample points for the density bound")
    sp.add_argument("--snap-tol", type=float, default=None)
    _add_out(sp, help="verdict list JSON")

    sp = sub.add_parser("monotonicity", help="p=2 monotonicity profile A(r) as CSV")
    _add_source(sp)
    sp.add_argument("--center", type=_pair(float, 2), default=None, help="x,y (default: bbox center)")
    sp.add_argument("--radii", type=_positive_int, default=200, help="number of radii")
    sp.add_argument("--rmin", type=float, default=None)
    sp.add_argument("--rmax", type=float, default=None, help="default: 10 x diameter")
    _add_out(sp, required=True, help="CSV with header r,A (a plot is written next to it)")

    sp = sub.add_parser("reconstruct", help="rasterize the parity set to PGM")
    _add_source(sp)
    sp.add_argument("--bbox", type=_pair(float, 4), required=True, help="x0,y0,x1,y1")
    sp.add_argument("--res", type=_pair(int, 2), required=True, help="NX,NY")
    _add_out(sp, required=True, help="PGM (P5) path; a .json sidecar is written next to it")

    sp = sub.add_parser("graph", help="intersection graph report")
    _add_source(sp)
    sp.add_argument("--snap-tol", type=float, default=None)
    sp.add_argument("--angular-tol", type=float, default=1e-3)
    _add_out(sp, "--report", required=True, help="graph report JSON")

    sp = sub.add_parser("cusps", help="halved-graph cusp parity")
    _add_source(sp)
    sp.add_argument("--snap-tol", type=float, default=None)
    sp.add_argument("--angular-tol", type=float, default=1e-3)
    _add_out(sp, help="cusp report JSON")

    sp = sub.add_parser("minimize", help="constrained descent on F_{lambda,p}")
    _add_source(sp)
    sp.add_argument("--freeze", type=Path, default=None,
                    help='JSON {"frozen": [[indices] per curve], "containment": {...}}')
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--iters", type=int, default=20000)
    sp.add_argument("--grad-tol", type=float, default=1e-8)
    _add_out(sp, required=True, help="optimized curve JSON")
    _add_out(sp, "--trace", help="CSV iter,energy,grad_norm,step (a plot is written next to it)")

    sp = sub.add_parser("inpaint", help="rank completions through the unit disc")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--res", type=_positive_int, default=32, help="nodes per unit length")
    sp.add_argument("--side", type=float, default=10.0, help="side of the datum squares")
    sp.add_argument("--corner-radius", type=float, default=0.5)
    sp.add_argument("--iters", type=int, default=3000)
    _add_out(sp, required=True, help="scenario report JSON")

    sp = sub.add_parser("bm-compare", help="four-petal set: cross against arc and return routings")
    sp.add_argument("--res", type=_positive_int, default=32, help="nodes per unit length")
    sp.add_argument("--iters", type=int, default=3000)
    _add_out(sp, required=True, help="scenario report JSON")

    sp = sub.add_parser("render", help="SVG with multiplicity-colored strokes")
    _add_source(sp)
    sp.add_argument("--title", default=None)
    _add_out(sp, required=True, help="SVG path")
    return parser


# ---------------------------------------------------------------- helpers

def _system(args) -> CurveSystem:
    if args.input is not None:
        return load_system(args.input)
    try:
        return from_spec(args.gen)
    except (ValueError, InvalidCurveError) as exc:
        raise InputError(str(exc)) from None


def _validate_paths(args) -> None:
    src = getattr(args, "input", None)
    if src is not None and not src.is_file():
        raise InputError(f"{src}: no such file")
    freeze = getattr(args, "freeze", None)
    if freeze is not None and not freeze.is_file():
        raise InputError(f"{freeze}: no such file")
    for name in ("out", "report", "trace"):
        path = getattr(args, name, None)
        if path is not None and not path.parent.resolve().is_dir():
            raise InputError(f"{path}: output directory does not exist")


def _print_verdicts(verdicts) -> None:
    for v in verdicts:
        status = "PASS" if v["pass"] else "FAIL"
        print(f"  [{status}] {v['name']}: {fmt(v['lhs'])} vs {fmt(v['rhs'])}")


def _on_curve_samples(system: CurveSystem, count: int) -> np.ndarray:
    """Segment midpoints spread evenly over the system (deterministic)."""
    pts = np.vstack([0.5 * (c.nodes + np.roll(c.nodes, -1, axis=0)) for c in system])
    if len(pts) <= count:
        return pts
    return pts[np.linspace(0, len(pts) - 1, count).round().astype(int)]


# ---------------------------------------------------------------- commands

def cmd_energy(args) -> int:
    system = _system(args)
    report = system_energy(system, args.p, args.lam)
    print(f"mass {fmt(report.mass)}")
    print(f"E_{fmt(args.p)} {fmt(report.elastic)}")
    print(f"F_{fmt(args.p)} {fmt(report.total)}")
    verdicts = [c.to_json() for c in report.checks]
    _print_verdicts(verdicts)
    if args.out:
        write_json(args.out, report.to_json())
    return EXIT_OK if all(v["pass"] for v in verdicts) else EXIT_CHECK


def cmd_check(args) -> int:
    system = _system(args)
    verdicts = [c.to_json() for c in system_energy(system, args.p).checks]
    density = density_bound_check(system, args.p, _on_curve_samples(system, args.samples))
    worst = max(density, key=lambda v: v.lhs - v.rhs)
    verdicts.append({"name": "density_bound", "lhs": worst.lhs, "rhs": worst.rhs,
                     "pass": all(v.passed for v in density),
                     "note": f"max multiplicity over {len(density)} on-curve samples"})
    graph = extract_graph(system, args.snap_tol)
    regular = is_regular(graph)
    verdicts.append({"name": "regularity", "lhs": float(len(regular.irregular_vertices)),
                     "rhs": 0.0, "pass": regular.regular, "note": regular.summary()})
    if regular.regular:
        cusps = cusp_parity_check(graph, boundary_marking(graph, system))
        verdicts.append({"name": "cusp_parity", "lhs": float(cusps.count), "rhs": 0.0,
                         "pass": cusps.even, "note": "odd-density vertex count must be even"})
    _print_verdicts(verdicts)
    print(regular.summary())
    if args.out:
        write_json(args.out, verdicts)
    return EXIT_OK if all(v["pass"] for v in verdicts) else EXIT_CHECK


def cmd_monotonicity(args) -> int:
    system = _system(args)
    if args.center is None:
        x0, y0, x1, y1 = system.bbox()
        center = (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    else:
        center = args.center
    diam = system.diameter()
    rmax = args.rmax if args.rmax is not None else 10.0 * diam
    rmin = args.rmin if args.rmin is not None else 1e-3 * diam
    if not 0 < rmin < rmax:
        raise InputError("need 0 < rmin < rmax")
    radii = np.geomspace(rmin, rmax, args.radii)
    profile = monotonicity_profile(system, center, radii)
    Path(args.out).write_text(profile.to_csv())
    from .plotting import plot_monotonicity
    plot_monotonicity(profile, Path(args.out).with_suffix(".svg"))
    print(f"A(r_max) {fmt(profile.values[-1])}  limit (mass+E_2)/2 {fmt(profile.limit_estimate)}")
    print(f"tolerance {fmt(profile.tolerance)}  violations {len(profile.violations)}")
    for a, b in profile.violations:
        print(f"  decrease between r={fmt(a)} and r={fmt(b)}")
    return EXIT_OK if profile.monotone else EXIT_CHECK


def cmd_reconstruct(args) -> int:
    system = _system(args)
    x0, y0, x1, y1 = args.bbox
    nx, ny = args.res
    if x1 <= x0 or y1 <= y0 or nx < 1 or ny < 1:
        raise InputError("bbox must be non-empty and resolution positive")
    grid = reconstruct_set(system, args.bbox, args.res, threads=args.threads)
    grid.write(args.out)
    print(f"parity area {fmt(grid.parity_area())}  cells inside {grid.count(255)} "
          f"boundary {grid.count(128)} outside {grid.count(0)}")
    return EXIT_OK


def cmd_graph(args) -> int:
    system = _system(args)
    report = graph_report(system, args.snap_tol, args.angular_tol)
    write_json(args.report, report)
    reg, cusps = report["regularity"], report["cusp_parity"]
    print(f"vertices {len(report['vertices'])}  edges {len(report['edges'])}")
    print(reg["summary"])
    if cusps["applicable"]:
        print(f"odd-density vertices {cusps['cusp_count']} ({'even' if cusps['even'] else 'ODD'})")
    return EXIT_OK if reg["regular"] else EXIT_CHECK


def cmd_cusps(args) -> int:
    system = _system(args)
    graph = extract_graph(system, args.snap_tol)
    report = cusp_parity_check(graph, boundary_marking(graph, system), args.angular_tol)
    if args.out:
        write_json(args.out, report.to_json())
    if not report.applicable:
        print(f"not applicable: {report.note}")
        return EXIT_CHECK
    print(f"odd-density vertices {report.count}: {report.odd_vertices}")
    print("even (handshake holds)" if report.even else "ODD count: handshake violated")
    return EXIT_OK if report.even else EXIT_CHECK


def cmd_minimize(args) -> int:
    from .relaxsolve import ConstraintSet, SolveOptions, minimize

    system = _system(args)
    try:
        options = SolveOptions(p=args.p, lam=args.lam, max_iters=args.iters, grad_tol=args.grad_tol)
        cons = None
        if args.freeze is not None:
            cons = ConstraintSet.from_json(read_json(args.freeze), system)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(str(exc)) from None
    result = minimize(system, cons, options)
    save_system(args.out, result.system)
    if args.trace:
        Path(args.trace).write_text(result.trace_csv())
        if result.trace:
            from .plotting import plot_trace
            plot_trace(result.trace, Path(args.trace).with_suffix(".svg"))
    print(f"status {result.status}  iterations {result.iterations}")
    print(f"mass {fmt(result.report.mass)}  E_{fmt(args.p)} {fmt(result.report.elastic)}  "
          f"F {fmt(result.report.total)}")
    return EXIT_CHECK if result.status.startswith("WARN") else EXIT_OK


def _scenario_summary(report) -> int:
    for c in report.candidates:
        print(f"  {c.name:<13} energy {fmt(c.completion_energy)}  ({c.status})")
    print(f"winner {report.winner}")
    _print_verdicts(report.checks)
    for note in report.notes:
        print(f"  note: {note}")
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_inpaint(args) -> int:
    from .scenarios import inpaint_scenario

    if not 0 < args.lam < math.pi / 2 or not args.p > 1:
        raise InputError("need 0 < lambda < pi/2 and p > 1")
    report = inpaint_scenario(args.lam, args.p, args.res, args.side, args.corner_radius, args.iters)
    write_json(args.out, report.to_json())
    return _scenario_summary(report)


def cmd_bm_compare(args) -> int:
    from .scenarios import bm_compare

    report = bm_compare(args.res, args.iters)
    write_json(args.out, report.to_json())
    return _scenario_summary(report)


def cmd_render(args) -> int:
    from .plotting import render_system

    system = _system(args)
    render_system(system, args.out, args.title)
    print(f"wrote {args.out}")
    return EXIT_OK


COMMANDS = {
    "energy": cmd_energy,
    "check": cmd_check,
    "monotonicity": cmd_monotonicity,
    "reconstruct": cmd_reconstruct,
    "graph": cmd_graph,
    "cusps": cmd_cusps,
    "minimize": cmd_minimize,
    "inpaint": cmd_inpaint,
    "bm-compare": cmd_bm_compare,
    "render": cmd_render,
}


_NUMERIC_LIST_FLAGS = {"--bbox", "--center", "--res"}


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--bbox -2,-2,2,2`` as ``--bbox=-2,-2,2,2`` so argparse does not
    mistake the leading minus for an option."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in _NUMERIC_LIST_FLAGS and nxt is not None and nxt[:1] == "-" and nxt[1:2].isdigit() | (nxt[1:2] == "."):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def run(argv=None) -> int:
    parser = build_parser()
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 0 for --help/--version, 2 for usage errors
        return int(exc.code or 0)
    try:
        _validate_paths(args)
        return COMMANDS[args.command](args)
    except (InputError, OnCurveError, GraphAmbiguityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


__all__ = ["run", "main", "build_parser"]
