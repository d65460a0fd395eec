"""
Command-line interface.

Subcommands: ``analyze`` (both flat detectors on a matrix file), ``family``
(construct a member of the two-flat family and print its predictions),
``verify`` (run the verification suites) and ``boundary`` (sampled
boundary only).  Exit codes: 0 success, 2 invalid input, 3 disagreement
between the two flat detectors, 1 failed verification.
"""

import argparse
import math
import sys

from . import __version__
from .boundary import extract_flats_geometric, render_svg, sample_boundary
from .family import (
    DomainError,
    FamilyParams,
    build_family_matrix,
    deltas,
    predicted_flats,
    trace_invariant,
    ymax,
)
from .fileio import MatrixFileError, atomic_write, dumps, matrix_to_json, read_matrix
from .flatdetect import analyze, angle_between
from .parallel import worker_count
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_MISMATCH = 3


class UsageError(ValueError):
    pass


def _positive_int(minimum):
    def parse(text):
        try:
            n = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if n < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {n}")
        return n
    return parse


def _finite(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return x


def _emit(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        atomic_write(path, text)


def _boundary_outputs(args, a, flats, axis):
    if not (args.out_csv or args.out_svg):
        return
    trace = sample_boundary(a, args.n_phi)
    if args.out_csv:
        atomic_write(args.out_csv, trace.to_csv())
    if args.out_svg:
        atomic_write(args.out_svg, render_svg(trace, flats, axis))


def cmd_analyze(args):
    a = read_matrix(args.path)
    if args.radius is not None and args.radius <= 0:
        raise UsageError("--radius must be positive")
    report = analyze(a, n_phi=args.n_phi, radius=args.radius, grid_n=args.grid_n)
    doc = report.to_json()
    doc["input"] = matrix_to_json(a)
    _emit(args.out_json, dumps(doc))
    _boundary_outputs(args, a, report.flats, report.symmetry_axis)
    if not report.matched:
        for d in report.discrepancies:
            print(f"cross-check: {d}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def _family_params(args):
    scale = math.pi / 180 if args.degrees else 1.0
    t = (args.t or 0.0) * scale
    given = {name for name in ("d", "theta", "x", "y", "k") if getattr(args, name) is not None}
    if args.k is not None:
        if given - {"k"} or args.maximal:
            raise UsageError("--k cannot be combined with --d/--theta/--x/--y/--maximal")
        params = FamilyParams.from_k(args.k)
        return FamilyParams(
            params.d, params.theta, params.x, params.y, t, params.swap_deltas != args.swap
        )
    if args.d is None or args.theta is None:
        raise UsageError(
            "give exactly one of: --d --theta --x --y, --k, or --d --theta --maximal"
        )
    theta = args.theta * scale
    if args.maximal:
        if args.x is not None or args.y is not None:
            raise UsageError("--maximal cannot be combined with --x/--y")
        return FamilyParams.maximal(args.d, theta, t, args.swap)
    if args.x is not None:
        # Reports a bad d, theta or x by the inequality it violates.
        ymax(args.d, theta, args.x)
    if args.x is None or args.y is None:
        raise UsageError("--d --theta needs both --x and --y, or --maximal")
    return FamilyParams(args.d, theta, args.x, args.y, t, args.swap)


def _format_matrix(a):
    rows = []
    for row in a:
        rows.append("  [" + ", ".join(f"{z.real:+.10f}{z.imag:+.10f}j" for z in row) + "]")
    return "\n".join(rows)


def cmd_family(args):
    params = _family_params(args)
    a = build_family_matrix(params)
    pred = predicted_flats(params)
    d1, d2 = deltas(params)
    lines = [
        f"d = {params.d:.12g}",
        f"theta = {params.theta:.12g} ({math.degrees(params.theta):.10g} deg)",
        f"x = {params.x:.12g}",
        f"y = {params.y:.12g}",
        f"t = {params.t:.12g}",
        f"delta1 = {d1:.12g}",
        f"delta2 = {d2:.12g}",
        "A =",
        _format_matrix(a),
        f"L = {pred.length:.12g}",
        f"angle between flat lines = {params.theta:.12g}",
        f"symmetry axis angle = {pred.symmetry_angle:.12g}",
        f"lines meet at {pred.intersection.real:.12g}{pred.intersection.imag:+.12g}i",
        f"tr(A^2 A*^2) = {trace_invariant(params):.12g}",
    ]
    for i, f in enumerate(pred.flats, 1):
        lines.append(
            f"flat {i}: line {f.line_u0:.12g} x {f.line_v0:+.12g} y + 1 = 0, "
            f"endpoints ({f.endpoint1[0]:.12g}, {f.endpoint1[1]:.12g}) "
            f"({f.endpoint2[0]:.12g}, {f.endpoint2[1]:.12g}), length {f.length:.12g}"
        )
    print("\n".join(lines))
    if args.out_matrix:
        atomic_write(args.out_matrix, dumps(matrix_to_json(a)))
    if args.out_json:
        atomic_write(args.out_json, dumps({
            "params": params.to_json(),
            "matrix": matrix_to_json(a),
            "delta1": d1,
            "delta2": d2,
            "length": pred.length,
            "symmetry_angle": pred.symmetry_angle,
            "intersection": pred.intersection,
            "trace_invariant": trace_invariant(params),
            "singularities": [s.to_json() for s in pred.singularities],
            "flats": [f.to_json() for f in pred.flats],
        }))
    _boundary_outputs(args, a, pred.flats, pred.symmetry_angle)
    return EXIT_OK


def cmd_verify(args):
    workers = worker_count()
    print("criterion\tstatus\tseconds\ttitle\tdetail")
    results = run_suite(
        args.suite, samples=args.samples, seed=args.seed, workers=workers,
        report=lambda r: print(r.line(), flush=True),
    )
    passed = all(r.passed for r in results)
    if args.out_json:
        atomic_write(args.out_json, dumps({
            "suite": args.suite,
            "samples": args.samples,
            "seed": args.seed,
            "passed": passed,
            "results": [r.to_json() for r in results],
        }))
    return EXIT_OK if passed else EXIT_FAILED


def cmd_boundary(args):
    a = read_matrix(args.path)
    trace = sample_boundary(a, args.n_phi)
    flats = extract_flats_geometric(trace)
    axis = None
    if len(flats) == 2 and abs(flats[0].distance - flats[1].distance) <= 1e-6 * trace.norm:
        axis = ((flats[0].angle_of_line + flats[1].angle_of_line) / 2) % math.pi
    if args.out_csv:
        atomic_write(args.out_csv, trace.to_csv())
    else:
        sys.stdout.write(trace.to_csv())
    if args.out_svg:
        atomic_write(args.out_svg, render_svg(trace, flats, axis))
    if args.out_json:
        doc = {
            "n_phi": args.n_phi,
            "norm": trace.norm,
            "samples": len(trace.samples),
            "flats": [f.to_json() for f in flats],
            "flat_angle": angle_between(*flats) if len(flats) == 2 else None,
            "symmetry_axis": axis,
        }
        atomic_write(args.out_json, dumps(doc))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nrflat",
        description="Flat portions on the boundary of the numerical range of 4x4 matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="detect flat portions of W(A) for a matrix file")
    p.add_argument("path", help='JSON file {"dim": n, "re": [[...]], "im": [[...]]}')
    p.add_argument("--out-json", metavar="PATH", help="report file (default: stdout)")
    p.add_argument("--out-csv", metavar="PATH", help="sampled boundary as CSV")
    p.add_argument("--out-svg", metavar="PATH", help="boundary plot")
    p.add_argument("--n-phi", type=_positive_int(360), default=2048,
                   help="directions in the eigenvalue sweep and the boundary sample")
    p.add_argument("--radius", type=_finite, help="singularity search radius in (u, v)")
    p.add_argument("--grid-n", type=_positive_int(8), default=64,
                   help="Newton seeds per axis in the singularity search")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("family", help="construct a two-flat family matrix")
    p.add_argument("--d", type=_finite, help="distance of both flat lines from the origin")
    p.add_argument("--theta", type=_finite, help="angle between the flat lines")
    p.add_argument("--x", type=_finite)
    p.add_argument("--y", type=_finite)
    p.add_argument("--t", type=_finite, help="rotation angle (default 0)")
    p.add_argument("--swap", action="store_true", help="exchange delta1 and delta2")
    p.add_argument("--k", type=_finite, help="build A_k (d = 1/sqrt 2, x = y = 1)")
    p.add_argument("--maximal", action="store_true", help="x = y = 2d/sqrt(1 + cos(theta/2))")
    p.add_argument("--degrees", action="store_true", help="--theta and --t are in degrees")
    p.add_argument("--out-matrix", metavar="PATH", help="write the matrix file")
    p.add_argument("--out-json", metavar="PATH", help="write the predictions")
    p.add_argument("--out-csv", metavar="PATH", help="sampled boundary as CSV")
    p.add_argument("--out-svg", metavar="PATH", help="boundary plot")
    p.add_argument("--n-phi", type=_positive_int(64), default=2048)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", choices=sorted(SUITES), default="all")
    p.add_argument("--samples", type=_positive_int(1), default=1000,
                   help="random matrices in the flat-count property run")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out-json", metavar="PATH")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("boundary", help="sample the boundary of W(A) only")
    p.add_argument("path")
    p.add_argument("--n-phi", type=_positive_int(64), default=2048)
    p.add_argument("--out-csv", metavar="PATH", help="CSV output (default: stdout)")
    p.add_argument("--out-svg", metavar="PATH")
    p.add_argument("--out-json", metavar="PATH", help="geometric flats and symmetry axis")
    p.set_defaults(func=cmd_boundary)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MatrixFileError, DomainError, UsageError, ValueError, OSError) as e:
        print(f"nrflat {args.command}: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
