"""Command-line surface.

Subcommands: boundary, fold-curves, verdict, plot, oracle, demo.  Exit codes:
0 success (for ``verdict``: theorem satisfied), 1 S/Z violation, 2 pipeline
or input errors, 3 cross-check failure.  Errors also emit one machine-
readable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .errors import (
    CrossCheckFailure,
    FamilyFileError,
    FoldParityError,
    NotParameterLinear,
    SZViolation,
    UnknownFamily,
)
from .families import BUILTIN_NAMES, builtin
from .famfile import parse_family_file
from .oracle import diff_against_continuation, parameter_linear_oracle
from .report import build_report, dumps_report, export_report
from .settings import Settings, load_settings
from .svg import render_svg

EXIT_OK = 0
EXIT_SZ = 1
EXIT_PIPELINE = 2
EXIT_CROSSCHECK = 3


def _error_block(kind: str, exc: Exception) -> None:
    block = {"error": kind, "type": type(exc).__name__, "detail": str(exc)}
    if isinstance(exc, SZViolation):
        block["reason"] = exc.reason
    if isinstance(exc, FamilyFileError) and exc.line is not None:
        block["line"] = exc.line
    print(json.dumps(block, sort_keys=True), file=sys.stderr)


def _load_family(spec: str):
    if spec in BUILTIN_NAMES:
        return builtin(spec)
    return parse_family_file(spec)


def _load_settings(args) -> Settings:
    settings = Settings()
    if args.settings:
        settings = load_settings(args.settings, settings)
    if args.seed is not None:
        settings = settings.with_overrides(seed=args.seed)
    return settings


def _print_sz(sz) -> None:
    print(f"S/Z edge: {sz.edge}")
    print(f"  folds at theta = {sz.folds[0].theta.tolist()} "
          f"and {sz.folds[1].theta.tolist()}")
    print(f"  arcs: {[arc.stability for arc in sz.arcs]}")
    print(f"  opposed: {sz.opposed} (method: {sz.opposed_method})")
    print(f"  other edges clean: {sz.other_edges_clean}")


def _print_curves(curves) -> None:
    print(f"{len(curves)} fold curve(s)")
    for rec in curves:
        shape = "closed" if rec.closed else f"open {rec.endpoints}"
        print(f"  curve {rec.curve_id}: {shape}, {len(rec.points)} points, "
              f"arclength {rec.arclength:.4f}")
        for c2 in rec.codim2_points:
            print(f"    {c2.kind} at theta = "
                  f"{[round(v, 8) for v in c2.theta.tolist()]}")


def _print_verdict(verdict) -> None:
    if verdict.fh_found:
        print("verdict: fold-Hopf branch")
        for loc in verdict.fh_locations:
            print(f"  fold-Hopf on curve {loc['curve_id']} at "
                  f"theta = {loc['theta']}")
    else:
        print(f"verdict: {verdict.cusp_count_total} cusp(s) on the saddle-"
              f"component boundary ({verdict.parity})")
        print(f"  main-curve cusps: {verdict.cusp_count_main}, traversal "
              f"switches: {verdict.switch_count} "
              f"(curve {verdict.curve_flips} + closing {verdict.arrival_flip})")
    print(f"  S/Z hypothesis valid: {verdict.sz_valid}")
    print(f"theorem satisfied: {verdict.theorem_satisfied}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="foldparity",
        description="Fold curves, codimension-2 points and cusp-parity "
                    "verdicts for 2-parameter ODE families.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, family=True):
        if family:
            p.add_argument("family",
                           help=f"family file path or builtin name "
                                f"({', '.join(BUILTIN_NAMES)})")
        p.add_argument("--settings", help="JSON file of settings overrides")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for the multi-start stages")

    p = sub.add_parser("boundary", help="scan the box boundary, print the S/Z report")
    add_common(p)
    p = sub.add_parser("fold-curves", help="enumerate fold curves with markers")
    add_common(p)
    p = sub.add_parser("verdict", help="run the full parity pipeline")
    add_common(p)
    p.add_argument("--report", help="write the run report JSON here")
    p = sub.add_parser("plot", help="render the bifurcation diagram")
    add_common(p)
    p.add_argument("--out", required=True, help="output SVG path")
    p = sub.add_parser("oracle", help="closed-form oracle vs continuation diff")
    add_common(p)
    p = sub.add_parser("demo", help="run a builtin end to end, write artifacts")
    p.add_argument("name", choices=list(BUILTIN_NAMES))
    p.add_argument("--outdir", default=None)
    p.add_argument("--settings", help="JSON file of settings overrides")
    p.add_argument("--seed", type=int, default=None)

    args = parser.parse_args(argv)

    try:
        settings = _load_settings(args)
        if args.command == "demo":
            family = builtin(args.name)
        else:
            family = _load_family(args.family)
    except (FamilyFileError, UnknownFamily, OSError, ValueError, KeyError) as exc:
        _error_block("input", exc)
        return EXIT_PIPELINE

    from . import szparity  # deferred import keeps --help fast
    from .continuation import enumerate_fold_curves

    try:
        if args.command == "boundary":
            sz = szparity.boundary_scan(family, settings)
            _print_sz(sz)
            return EXIT_OK

        if args.command == "fold-curves":
            curves = enumerate_fold_curves(family, settings)
            _print_curves(curves)
            return EXIT_OK

        if args.command == "verdict":
            verdict = szparity.theorem_verdict(family, settings)
            _print_verdict(verdict)
            if args.report:
                export_report(build_report(family, settings, verdict=verdict),
                              args.report)
                print(f"report written to {args.report}")
            return EXIT_OK if verdict.theorem_satisfied else EXIT_PIPELINE

        if args.command == "plot":
            verdict = szparity.theorem_verdict(family, settings)
            rep = build_report(family, settings, verdict=verdict)
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(render_svg(rep))
            print(f"diagram written to {args.out}")
            return EXIT_OK

        if args.command == "oracle":
            t0 = time.perf_counter()
            orc = parameter_linear_oracle(family, settings)
            curves = enumerate_fold_curves(family, settings)
            diff = diff_against_continuation(orc, curves, family)
            print(f"oracle sweep: {len(orc.fold_states)} in-box samples, "
                  f"{len(orc.cusps)} cusp(s), {orc.segments} segment(s)")
            _print_curves(curves)
            print(f"max fold-set deviation (box-scaled Hausdorff): "
                  f"{diff['hausdorff']:.3e}")
            print(f"cusp counts: oracle {diff['cusp_count_oracle']}, "
                  f"continuation {diff['cusp_count_continuation']}, "
                  f"max cusp deviation {diff['cusp_max_deviation']:.3e}")
            print(f"elapsed: {time.perf_counter() - t0:.2f}s")
            return EXIT_OK

        if args.command == "demo":
            import os

            outdir = args.outdir or f"out-{args.name}"
            os.makedirs(outdir, exist_ok=True)
            verdict = szparity.theorem_verdict(family, settings)
            _print_verdict(verdict)
            rep = build_report(family, settings, verdict=verdict)
            report_path = os.path.join(outdir, "report.json")
            export_report(rep, report_path)
            svg_path = os.path.join(outdir, "diagram.svg")
            with open(svg_path, "w", encoding="utf-8") as fh:
                fh.write(render_svg(rep))
            print(f"artifacts in {outdir}/: report.json, diagram.svg")
            return EXIT_OK if verdict.theorem_satisfied else EXIT_PIPELINE

    except SZViolation as exc:
        _error_block("sz_violation", exc)
        return EXIT_SZ
    except CrossCheckFailure as exc:
        _error_block("cross_check", exc)
        return EXIT_CROSSCHECK
    except NotParameterLinear as exc:
        _error_block("not_parameter_linear", exc)
        return EXIT_PIPELINE
    except FoldParityError as exc:
        _error_block("pipeline", exc)
        return EXIT_PIPELINE

    parser.error(f"unhandled command {args.command}")  # pragma: no cover
    return EXIT_PIPELINE  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
