"""Command-line entry point: ``neudir <subcommand> [options]``.

Exit codes: 0 success, 1 usage or geometry error, 2 a "violated" verdict,
3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analytic, report, verify
from .eig import DEFAULT_TOL
from .errors import NeudirError, SolverFailure
from .fem_scalar import scalar_spectrum
from .fem_vector import eigenfield_to_json, tangential_constraints, vector_spectrum
from .geometry import builtin_domain, load_polygon, make_polygon, triangulate

SUBCOMMANDS = ("mesh", "solve", "reference", "verify", "crosscheck", "certificate", "converge")
EXIT_OK, EXIT_USAGE, EXIT_VIOLATED, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad input, which collides with "violated"
    def error(self, message):
        raise UsageError(message)


def resolve_domain(source: str):
    """Polygon from ``builtin:<name>``, a JSON file path, or inline JSON."""
    if source.startswith("builtin:"):
        return builtin_domain(source.removeprefix("builtin:"))
    text = source.lstrip()
    if text.startswith("{") or text.startswith("["):
        data = json.loads(text)
        verts = data["vertices"] if isinstance(data, dict) else data
        name = data.get("name", "inline") if isinstance(data, dict) else "inline"
        return make_polygon(verts, name=name)
    path = Path(source)
    if not path.is_file():
        raise UsageError(f"domain {source!r} is neither builtin:<name>, inline JSON nor a file")
    return load_polygon(path)


def parse_levels(text: str, default_span: int) -> list[int]:
    """``"5"`` expands to the ``default_span`` finest levels ending at 5; ``"3,4,5"`` is literal."""
    try:
        if "," in text:
            levels = sorted(int(t) for t in text.split(","))
        else:
            top = int(text)
            levels = list(range(max(0, top - default_span + 1), top + 1))
    except ValueError as exc:
        raise UsageError(f"bad --levels {text!r}") from exc
    if not levels or min(levels) < 0:
        raise UsageError(f"bad --levels {text!r}")
    return levels


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="neudir", description="Neumann/Dirichlet eigenvalue comparison on polygons.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--domain", required=True,
                       help="builtin:{square,disk[:n],lshape,hexagon}, a JSON file or inline JSON")
        s.add_argument("--levels", default="3", help="refinement level L or a comma list")
        s.add_argument("--count", type=int, default=8)
        s.add_argument("--kmax", type=int, default=6)
        s.add_argument("--k", type=int, default=1, help="eigenvalue index (certificate, converge)")
        s.add_argument("--bc", default="both",
                       choices=["dirichlet", "neumann", "both", "vector"])
        s.add_argument("--tol", type=float, default=DEFAULT_TOL, help="solver residual tolerance")
        s.add_argument("--slack", type=float, default=None, help="verdict slack (default C h^2)")
        s.add_argument("--out", default=None, help="output file or directory (default stdout)")
        s.add_argument("--format", default="json", choices=["json", "csv", "svg"])
        s.add_argument("--no-timestamp", action="store_true")
    return p


# --------------------------------------------------------------------------- commands


def _cmd_mesh(args, poly):
    mesh = triangulate(poly, parse_levels(args.levels, 1)[-1])
    return {"domain": mesh.name, "level": mesh.level, "h": mesh.h, **mesh.to_json()}, None


def _cmd_solve(args, poly):
    mesh = triangulate(poly, parse_levels(args.levels, 1)[-1])
    out = {"domain": mesh.name, "level": mesh.level}
    bcs = ["neumann", "dirichlet"] if args.bc == "both" else [args.bc]
    rows = [("bc", "index", "value", "residual")]
    for bc in bcs:
        if bc == "vector":
            spec, fields = vector_spectrum(mesh, args.count, args.tol)
            cons = tangential_constraints(mesh)
            out[bc] = spec.to_json() | {"fields": [eigenfield_to_json(f, cons) for f in fields]}
        else:
            spec = scalar_spectrum(mesh, bc, args.count, args.tol)
            out[bc] = spec.to_json()
        rows += [(bc, i + 1, v, r) for i, (v, r) in enumerate(zip(spec.values, spec.residuals))]
    return out, rows


def _cmd_reference(args, poly):
    name = poly.name.partition(":")[0]
    if name not in ("square", "disk"):
        raise UsageError("reference spectra exist for builtin:square and builtin:disk only")
    fn = analytic.square_spectrum if name == "square" else analytic.disk_spectrum
    bcs = ["neumann", "dirichlet"] if args.bc == "both" else [args.bc]
    if "vector" in bcs:
        raise UsageError("reference has no vector spectrum; use --bc dirichlet|neumann|both")
    out = {"domain": name}
    specs = {bc: fn(bc, args.count) for bc in bcs}
    out.update({bc: s.to_json() for bc, s in specs.items()})
    if len(specs) == 2:
        out["merged"] = verify.merge_spectra(specs["neumann"], specs["dirichlet"]).to_json()
    rows = [("bc", "index", "value")]
    rows += [(bc, i + 1, v) for bc, s in specs.items() for i, v in enumerate(s.values)]
    return out, rows


def _cmd_verify(args, poly):
    levels = parse_levels(args.levels, 2)
    study = verify.inequality_study(poly, levels, args.kmax, args.tol, args.slack)
    mesh = triangulate(poly, levels[-1])
    neu, dir_ = verify.level_spectra(mesh, args.kmax + 3, args.kmax + 1, args.tol)
    merged = verify.merge_spectra(neu, dir_)
    counting = []
    for k in range(1, args.kmax + 1):
        try:
            counting.append(verify.counting_check(merged, dir_, k))
        except NeudirError:
            counting.append(None)
    out = {"domain": poly.name, "study": study.to_json(), "merged": merged.to_json(),
           "neumann": neu.to_json(), "dirichlet": dir_.to_json(), "counting": counting}
    svg = report.spectrum_svg(merged, study.finest, title=f"{poly.name}, level {levels[-1]}")
    return out, study.finest.csv_rows(), svg, study.violated


def _cmd_crosscheck(args, poly):
    rep = verify.min_max_crosscheck(poly, parse_levels(args.levels, 3), args.count, args.tol)
    rows = [("level", "h", "max_deviation", "label_match")]
    rows += [(lv.level, lv.h, lv.max_deviation, lv.label_match) for lv in rep.levels]
    return rep.to_json(), rows


def _cmd_certificate(args, poly):
    mesh = triangulate(poly, parse_levels(args.levels, 1)[-1])
    ks = range(1, args.k + 1)
    reps = [verify.test_space_certificate(mesh, k, solver_tol=args.tol) for k in ks]
    return {"domain": mesh.name, "level": mesh.level, "certificates": [r.to_json() for r in reps]}, None


def _cmd_converge(args, poly):
    bcs = ["dirichlet", "neumann"] if args.bc == "both" else [args.bc]
    if "vector" in bcs:
        raise UsageError("converge supports dirichlet and neumann only")
    levels = parse_levels(args.levels, 3)
    # Neumann indices count mu_1 = 0; with --bc both, lambda_k is paired with mu_{k+1}
    index = {"dirichlet": args.k, "neumann": args.k + 1 if args.bc == "both" else args.k}
    if index["neumann"] < 2 and "neumann" in bcs:
        raise UsageError("mu_1 = 0 has no convergence order; use --k >= 2 with --bc neumann")
    reps = [verify.convergence_study(poly, bc, index[bc], levels, args.tol) for bc in bcs]
    rows = [("bc", "level", "h", "value")]
    rows += [(r.bc, lv, h, v) for r in reps for lv, h, v in zip(r.levels, r.h, r.values)]
    return {"domain": poly.name, "studies": [r.to_json() for r in reps]}, rows


COMMANDS = {"mesh": _cmd_mesh, "solve": _cmd_solve, "reference": _cmd_reference,
            "verify": _cmd_verify, "crosscheck": _cmd_crosscheck,
            "certificate": _cmd_certificate, "converge": _cmd_converge}


def _emit(args, text: str):
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    if out.is_dir() or args.out.endswith(("/", "\\")):
        out.mkdir(parents=True, exist_ok=True)
        out = out / f"{args.command}.{args.format}"
    out.write_text(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.slack is not None and args.slack < 0:
            raise UsageError("--slack must be non-negative")
        if args.tol <= 0 or min(args.count, args.kmax, args.k) < 1:
            raise UsageError("--tol must be positive and --count, --kmax, --k at least 1")
        poly = resolve_domain(args.domain)
        result = COMMANDS[args.command](args, poly)
        payload, rows = result[0], result[1]
        svg = result[2] if len(result) > 2 else None
        violated = result[3] if len(result) > 3 else False
        if args.format == "json":
            text = report.to_json_text(payload, timestamp=not args.no_timestamp)
        elif args.format == "csv":
            if rows is None:
                raise UsageError(f"{args.command} has no CSV output")
            text = report.to_csv_text(rows)
        else:
            if svg is None:
                raise UsageError(f"{args.command} has no SVG output")
            text = svg
        _emit(args, text)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"neudir: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"neudir: solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (NeudirError, ValueError, KeyError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"neudir: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_VIOLATED if violated else EXIT_OK


def main():
    sys.exit(run())
