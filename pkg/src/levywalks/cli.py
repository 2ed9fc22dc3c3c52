"""Command-line interface: density tables, ensemble runs, comparisons and self-tests.

Exit codes: 0 success, 1 threshold violation, 2 usage or domain error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import densities
from .densities import Route, density_table, radius_normalization
from .errors import DomainError, LevyWalkError, NumericError
from .model import Parity, WalkKind, make_params
from .simulate import coupled_ensemble, default_threads
from .stats import SCHEMA_VERSION, analytic_cdf, ks_distance, summarize_ensemble

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_DOMAIN = 2
EXIT_NUMERIC = 3

KS_THRESHOLD = 0.02
ROUTE_THRESHOLD = 1e-8
NORM_THRESHOLD_BOUNDED = 1e-6
NORM_THRESHOLD_OVERSHOOT = 1e-4

_COLUMNS = {"radius": ("r", "phi_r"), "axis": ("x", "phi1")}
_ENSEMBLE_COLUMNS = ("radius", "first_coord", "kind", "alpha", "dim", "scale", "seed")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


@dataclass(frozen=True)
class GridSpec:
    start: float
    end: float
    points: int

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"grid must be start:end:points, got {text!r}")
        try:
            start, end, points = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise DomainError(f"grid must be start:end:points, got {text!r}") from None
        if points < 2 or not end > start or start < 0:
            raise DomainError(f"grid needs 0 <= start < end and at least two points, got {text!r}")
        return cls(start, end, points)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.end, self.points)


# -- writers and readers -----------------------------------------------------------------


def table_to_csv(table) -> str:
    xcol, ycol = _COLUMNS[table.mode]
    p = table.params
    buf = io.StringIO()
    buf.write(f"{xcol},{ycol},route,kind,alpha,dim\n")
    for x, y in zip(table.grid, table.values):
        buf.write(f"{_fmt(x)},{_fmt(y)},{table.route.value},{p.kind.value},{p.alpha!r},{p.dim}\n")
    return buf.getvalue()


def table_to_json(table) -> str:
    p = table.params
    doc = {
        "schemaVersion": SCHEMA_VERSION,
        "kind": p.kind.value,
        "alpha": p.alpha,
        "dim": p.dim,
        "route": table.route.value,
        "mode": table.mode,
        "clampMargin": table.clamp_margin,
        "grid": [float(v) for v in table.grid],
        "values": [float(v) for v in table.values],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


@dataclass
class LoadedTable:
    kind: str
    alpha: float
    dim: int
    route: str
    mode: str
    grid: np.ndarray
    values: np.ndarray


def read_table(path: Path) -> LoadedTable:
    text = path.read_text()
    if path.suffix.lower() == ".json":
        doc = json.loads(text)
        return LoadedTable(doc["kind"], float(doc["alpha"]), int(doc["dim"]), doc["route"], doc["mode"],
                           np.array(doc["grid"], dtype=float), np.array(doc["values"], dtype=float))
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise DomainError(f"{path} holds no rows")
    mode = "radius" if "r" in rows[0] else "axis"
    xcol, ycol = _COLUMNS[mode]
    first = rows[0]
    return LoadedTable(first["kind"], float(first["alpha"]), int(first["dim"]), first["route"], mode,
                       np.array([float(r[xcol]) for r in rows]), np.array([float(r[ycol]) for r in rows]))


def ensemble_to_csv(kind, alpha, dim, scale, seed, radii, first) -> str:
    buf = io.StringIO()
    buf.write(",".join(_ENSEMBLE_COLUMNS) + "\n")
    tail = f"{kind},{float(alpha)!r},{dim},{float(scale)!r},{seed}\n"
    for r, x in zip(radii, first):
        buf.write(f"{_fmt(r)},{_fmt(x)},{tail}")
    return buf.getvalue()


@dataclass
class LoadedEnsemble:
    kind: str
    alpha: float
    dim: int
    radii: np.ndarray
    first_coords: np.ndarray


def read_ensemble(path: Path) -> LoadedEnsemble:
    text = path.read_text()
    if path.suffix.lower() == ".json":
        doc = json.loads(text)
        if "radii" not in doc:
            raise DomainError(f"{path} has no samples; write it with --include-samples or as CSV")
        return LoadedEnsemble(doc["kind"], float(doc["alpha"]), int(doc["dim"]),
                              np.array(doc["radii"], dtype=float), np.array(doc["firstCoords"], dtype=float))
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise DomainError(f"{path} holds no samples")
    first = rows[0]
    return LoadedEnsemble(first["kind"], float(first["alpha"]), int(first["dim"]),
                          np.array([float(r["radius"]) for r in rows]),
                          np.array([float(r["first_coord"]) for r in rows]))


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands ------------------------------------------------------------------------------


def _params(args):
    return make_params(args.kind, args.alpha, args.dim)


def _locate_failure(params, grid, route, mode):
    """First abscissa at which pointwise evaluation fails, for error reports."""
    fn = densities.phi_r if mode == "radius" else densities.phi1
    for x in grid:
        try:
            v = fn(params, float(x), route)
        except NumericError:
            return x
        if not np.isfinite(v):
            return x
    return None


def cmd_density(args) -> int:
    params = _params(args)
    grid = None
    if args.grid:
        spec = GridSpec.parse(args.grid)
        if params.kind.bounded and spec.end > 1.0:
            raise DomainError(f"the {params.kind.value} law lives on [0, 1]; grid ends at {spec.end}")
        grid = spec.values()
    try:
        table = density_table(params, grid, args.route, args.mode)
    except NumericError as exc:
        where = _locate_failure(params, densities.clamp_grid(params, grid), args.route, args.mode) \
            if grid is not None else None
        suffix = f" (first failing abscissa {float(where)!r})" if where is not None else ""
        raise NumericError(f"{exc}{suffix}") from exc
    _emit(table_to_csv(table) if args.format == "csv" else table_to_json(table), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = _params(args)
    threads = args.threads or default_threads()
    t0 = time.perf_counter()
    ens = coupled_ensemble(params.dim, params.alpha, args.scale, args.samples, args.seed, threads)
    radii, first = ens.radii(params.kind), ens.first_coords(params.kind)
    if args.format == "csv":
        _emit(ensemble_to_csv(params.kind.value, params.alpha, params.dim, args.scale, args.seed, radii, first),
              args.output)
        return EXIT_OK
    summary = summarize_ensemble(params, radii, first, args.scale, args.seed)
    doc = summary.to_json_dict()
    if params.kind is WalkKind.OVERSHOOT:
        tail = 1.0 - float(densities.radial_cdf(params, 1.0 + densities.CLAMP_MARGIN))
        doc["analyticFractionAboveOne"] = tail
        doc["fractionAboveOneStdErr"] = float(np.sqrt(tail * (1.0 - tail) / summary.count))
    if args.include_samples:
        doc["radii"] = [float(v) for v in radii]
        doc["firstCoords"] = [float(v) for v in first]
    doc["runtime"] = {"seconds": time.perf_counter() - t0, "threads": threads}
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK


def _route_agreement(params, grid, route: Route, mode: str):
    """Max of |route - other| / (1 + |value|) against the other closed route, or None if there is none."""
    if params.parity is not Parity.ODD:
        return None
    other = Route.HYPER if route is Route.ELEMENTARY else Route.ELEMENTARY
    fn = densities.phi_r if mode == "radius" else densities.phi1
    a = fn(params, grid, route)
    b = fn(params, grid, other)
    return float(np.max(np.abs(a - b) / (1.0 + np.abs(a))))


def cmd_compare(args) -> int:
    if bool(args.table) != bool(args.ensemble):
        raise DomainError("--table and --ensemble go together")
    if args.table:
        table = read_table(Path(args.table))
        ens = read_ensemble(Path(args.ensemble))
        params = make_params(table.kind, table.alpha, table.dim)
        route, mode, grid = Route.parse(table.route), table.mode, table.grid
        radii, first = ens.radii, ens.first_coords
        mismatch = [name for name, a, b in (("kind", table.kind, ens.kind), ("alpha", table.alpha, ens.alpha),
                                            ("dim", table.dim, ens.dim)) if a != b]
    else:
        params = _params(args)
        route, mode = Route.parse(args.route), "radius"
        grid = densities.chebyshev_grid(params, 99)
        ensemble = coupled_ensemble(params.dim, params.alpha, args.scale, args.samples, args.seed, args.threads)
        radii, first = ensemble.radii(params.kind), ensemble.first_coords(params.kind)
        mismatch = []
    ks_r = ks_distance(np.sort(radii), analytic_cdf(params))
    ks_x = ks_distance(np.sort(first), analytic_cdf(params, axis=True).signed)
    agreement = _route_agreement(params, grid, route, mode)
    norm = abs(radius_normalization(params) - 1.0)
    norm_tol = NORM_THRESHOLD_BOUNDED if params.kind.bounded else NORM_THRESHOLD_OVERSHOOT
    checks = {
        "ksRadius": (ks_r, args.ks_threshold),
        "ksFirstCoord": (ks_x, args.ks_threshold),
        "normalizationResidual": (norm, norm_tol),
    }
    if agreement is not None:
        checks["routeAgreement"] = (agreement, args.route_threshold)
    report = {
        "schemaVersion": SCHEMA_VERSION,
        "kind": params.kind.value,
        "alpha": params.alpha,
        "dim": params.dim,
        "parameterMismatch": mismatch,
        "checks": {k: {"value": v, "threshold": t, "passed": bool(v <= t)} for k, (v, t) in checks.items()},
    }
    report["passed"] = all(c["passed"] for c in report["checks"].values())
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK if report["passed"] else EXIT_THRESHOLD


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(fault=args.inject_fault)
    if args.format == "json":
        doc = {"schemaVersion": SCHEMA_VERSION,
               "results": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]}
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
    else:
        width = max(len(r.name) for r in results)
        lines = [f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in results]
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if all(r.passed for r in results) else EXIT_THRESHOLD


# -- parser --------------------------------------------------------------------------------


def _add_model(p, required=True):
    p.add_argument("--kind", required=required, help="standard, undershoot or overshoot")
    p.add_argument("--alpha", type=float, required=required, help="tail exponent in (0, 1)")
    p.add_argument("--dim", type=int, required=required, help="spatial dimension, 2..25")


def _add_sim(p, required=True):
    p.add_argument("--scale", type=float, required=required, help="observation time n (>= 10)")
    p.add_argument("--samples", type=int, required=required, help="ensemble size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levywalks", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="tabulate the radius or first-coordinate density")
    _add_model(p)
    p.add_argument("--grid", help="start:end:points, clamped into the support")
    p.add_argument("--route", default="hyper", help="hyper, elementary or epsilon")
    p.add_argument("--mode", choices=("radius", "axis"), default="radius")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("simulate", help="simulate an ensemble and summarise it")
    _add_model(p)
    _add_sim(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--include-samples", action="store_true", help="embed raw samples in the JSON summary")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="check an ensemble against the analytic law")
    p.add_argument("--table", help="density table (CSV or JSON) fixing the parameters")
    p.add_argument("--ensemble", help="ensemble samples (CSV, or JSON written with --include-samples)")
    _add_model(p, required=False)
    _add_sim(p, required=False)
    p.add_argument("--route", default="hyper")
    p.add_argument("--ks-threshold", type=float, default=KS_THRESHOLD)
    p.add_argument("--route-threshold", type=float, default=ROUTE_THRESHOLD)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("selftest", help="run the built-in oracle checks")
    p.add_argument("--inject-fault", choices=("gamma-constant",), default=None, help=argparse.SUPPRESS)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "compare" and not args.table:
        missing = [f for f in ("kind", "alpha", "dim", "scale", "samples") if getattr(args, f) is None]
        if missing:
            parser.error("compare needs --table/--ensemble or --" + ", --".join(missing))
    try:
        return args.func(args)
    except (DomainError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NumericError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LevyWalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
