"""CLI supports"""

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from math import factorial
from pathlib import Path
from typing import Any, NoReturn

import numpy as np

from . import decoder, invariants, mafunc, stability
from ._version import __version__
from .consts import (
    BARYCENTER_TOL,
    BUILTIN_VERTICES,
    DEFAULT_SEED,
    DELTA_TOL,
    KR_TOL,
    MA_NODES,
    MA_RADIUS,
    MA_TOL,
    QUADRATURE_REL_TOL,
    SLOPE_TOL,
)
from .core import SchemaError, ToricGSError, version_info
from .encoder import RunReport, dumps, polytope_to_dict, weight_to_dict
from .err_msg import SchemaErr
from .polytope import LabelledPolytope, builtin
from .quadrature import WeightFunction, integrate, unit

logger = logging.getLogger(__name__)

COMMANDS = (
    "check-futaki",
    "solve-soliton",
    "sg",
    "delta",
    "ding-na",
    "dh",
    "solve-ma",
    "functionals",
    "inequalities",
    "report",
)
SOLITON_PREFIX = "soliton:"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class _Parser(argparse.ArgumentParser):
    """Argument parser raising usage errors as `SchemaError`."""

    def error(self, message: str) -> NoReturn:
        raise SchemaError("SchemaViolation", SchemaErr.bad_argument(message))


def positive_int(text: str) -> int:
    """Integer flag that must be at least one."""
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(SchemaErr.not_positive("value", value))
    return value


def grid_nodes(text: str) -> int:
    """Grid size flag, at least three nodes."""
    value = int(text)
    if value < 3:
        raise argparse.ArgumentTypeError(f"a grid needs at least 3 nodes, got {value}")
    return value


def positive_float(text: str) -> float:
    """Finite positive real flag."""
    value = float(text)
    if not 0 < value < float("inf"):
        raise argparse.ArgumentTypeError(SchemaErr.not_positive("value", value))
    return value


def _parents() -> dict[str, argparse.ArgumentParser]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=("json", "md"), default="json", help="report format"
    )
    common.add_argument(
        "--log-level", choices=LOG_LEVELS, default="WARNING", help="logging level on stderr"
    )
    common.add_argument("--tol", type=positive_float, default=None, help="override the tolerance")
    geometry = argparse.ArgumentParser(add_help=False)
    geometry.add_argument(
        "--polytope",
        required=True,
        help="polytope document, or builtin:NAME with NAME in " + ", ".join(BUILTIN_VERTICES),
    )
    weighted = argparse.ArgumentParser(add_help=False)
    weighted.add_argument(
        "--g",
        default="constant:1",
        help="weight: constant:C, affine:A0,B..., exp_affine:A0,B..., "
        + "soliton:kr, soliton:mabuchi or a weight document",
    )
    direction = argparse.ArgumentParser(add_help=False)
    direction.add_argument("--a", required=True, help="valuation direction, e.g. 1,-1/2")
    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed")
    return {
        "common": common,
        "geometry": geometry,
        "weighted": weighted,
        "direction": direction,
        "seeded": seeded,
    }


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="toric-gs",
        description="toric-gs computes weighted soliton invariants of toric Fano polytopes.",
    )
    parser.add_argument(
        "-v", "--version", action="store_true", help="show the version of toric-gs"
    )
    parser.add_argument(
        "-i", "--info", action="store_true", help="show version and os information"
    )
    p = _parents()
    sub = parser.add_subparsers(dest="command")
    geo = [p["common"], p["geometry"]]
    weighted = geo + [p["weighted"]]

    sub.add_parser("check-futaki", parents=weighted, help="weighted barycenter and Futaki invariant")
    soliton = sub.add_parser("solve-soliton", parents=geo, help="Kahler-Ricci or Mabuchi soliton")
    soliton.add_argument("--kind", choices=("kr", "mabuchi"), default="kr")
    sg = sub.add_parser("sg", parents=weighted + [p["direction"]], help="A, S_g and their ratio")
    sg.add_argument("--m", type=positive_int, default=None, help="also compute the lattice value at level m")
    sub.add_parser("delta", parents=weighted + [p["seeded"]], help="toric delta invariant")
    sub.add_parser("ding-na", parents=weighted + [p["direction"]], help="A - S_g of a valuation")
    dh = sub.add_parser("dh", parents=weighted, help="filtration Duistermaat-Heckman data")
    dh.add_argument("--pl-file", default=None, help="PL convex function document")
    dh.add_argument("--a", default=None, help="use the valuation function of this direction")
    dh.add_argument("--m", type=positive_int, default=20, help="filtration level")
    solve_ma = sub.add_parser("solve-ma", parents=weighted, help="1D Monge-Ampere solve")
    solve_ma.add_argument("--radius", type=positive_float, default=MA_RADIUS, help="window half width")
    solve_ma.add_argument("--nodes", type=grid_nodes, default=MA_NODES, help="grid nodes")
    solve_ma.add_argument(
        "--max-radius", type=positive_float, default=None, help="largest window the solver may grow to"
    )
    solve_ma.add_argument("--out", default=None, help="write the solution potential here")
    func = sub.add_parser("functionals", parents=weighted, help="Archimedean functionals of u")
    func.add_argument("--u", required=True, help="potential document")
    ineq = sub.add_parser(
        "inequalities", parents=weighted + [p["seeded"]], help="functional inequality suite"
    )
    ineq.add_argument("--samples", type=positive_int, default=100, help="number of random potentials")
    ineq.add_argument("--threads", type=positive_int, default=None, help="worker threads")
    report = sub.add_parser("report", parents=[p["common"]], help="checks over every builtin")
    report.add_argument("--m", type=positive_int, default=20, help="filtration level")
    return parser


def _weight(spec: str, poly: LabelledPolytope) -> WeightFunction:
    if spec.startswith(SOLITON_PREFIX):
        kind = spec[len(SOLITON_PREFIX) :]
        if kind == "kr":
            return invariants.solve_kr_soliton(poly).weight
        if kind == "mabuchi":
            return invariants.solve_mabuchi_soliton(poly).weight
        raise SchemaError("SchemaViolation", SchemaErr.bad_weight_spec(spec))
    weight = decoder.parse_weight(spec, poly.dim)
    weight.check_positive(poly)
    return weight


def _tol(args: argparse.Namespace, default: float) -> float:
    return default if args.tol is None else args.tol


def _sg_error(poly: LabelledPolytope, weight: WeightFunction, a: Sequence[Any]) -> float:
    """Quadrature error of S_g(a) = A(a) + <a, b_g> propagated from the moments."""
    mass = integrate(poly, weight)
    error = 0.0
    for i, coord in enumerate(a):
        first = integrate(poly, weight, unit(poly.dim, i))
        error += abs(float(coord)) * (
            first.error / mass.value + abs(first.value) * mass.error / mass.value**2
        )
    return error


def _geometry(args: argparse.Namespace) -> tuple[LabelledPolytope, WeightFunction, dict[str, Any]]:
    poly = decoder.parse_polytope(args.polytope)
    weight = _weight(args.g, poly)
    inputs = {"polytope": polytope_to_dict(poly), "weight": weight_to_dict(weight)}
    return poly, weight, inputs


def _direction(args: argparse.Namespace, poly: LabelledPolytope) -> tuple[Any, ...]:
    a = decoder.parse_vector(args.a)
    if len(a) != poly.dim:
        raise SchemaError(
            "SchemaViolation", SchemaErr.wrong_type(f"{poly.dim} coordinates", a), pointer="/a"
        )
    return a


def _check_futaki(args: argparse.Namespace) -> RunReport:
    poly, weight, inputs = _geometry(args)
    tol = _tol(args, BARYCENTER_TOL)
    mass = integrate(poly, weight)
    bary = invariants.weighted_barycenter(poly, weight)
    norm = float(np.linalg.norm(bary))
    basis = np.eye(poly.dim)
    results = {
        "barycenter": bary,
        "futaki": [invariants.futaki(poly, weight, e) for e in basis],
        "futaki_vanishes": norm < tol,
        "V_g": factorial(poly.dim) * mass.value,
    }
    diagnostics = {
        "tolerance": tol,
        "barycenter_norm": norm,
        "V_g_error": factorial(poly.dim) * mass.error,
    }
    return RunReport("check-futaki", inputs, results, diagnostics)


def _solve_soliton(args: argparse.Namespace) -> RunReport:
    poly = decoder.parse_polytope(args.polytope)
    inputs = {"polytope": polytope_to_dict(poly), "kind": args.kind}
    if args.kind == "kr":
        tol = _tol(args, KR_TOL)
        sol = invariants.solve_kr_soliton(poly, tol=tol)
        results: dict[str, Any] = {"xi": sol.xi}
    else:
        tol = 0.0
        sol = invariants.solve_mabuchi_soliton(poly)
        results = {"b": sol.b, "b_exact": sol.exact}
    results.update(
        {
            "residual": sol.residual,
            "feasible": sol.feasible,
            "V_g": invariants.weighted_volume(poly, sol.weight),
            "barycenter": invariants.weighted_barycenter(poly, sol.weight),
            "weight": weight_to_dict(sol.weight),
        }
    )
    diagnostics = {"tolerance": tol, "iterations": sol.iterations}
    return RunReport("solve-soliton", inputs, results, diagnostics)


def _sg(args: argparse.Namespace) -> RunReport:
    poly, weight, inputs = _geometry(args)
    a = _direction(args, poly)
    inputs["a"] = a
    val = stability.ToricValuation.of(poly, weight, a)
    results: dict[str, Any] = {
        "A": val.log_discrepancy,
        "S_g": val.s_g,
        "ratio": val.ratio,
        "ding_na": val.ding,
    }
    diagnostics: dict[str, Any] = {
        "tolerance": _tol(args, QUADRATURE_REL_TOL),
        "quadrature_error": _sg_error(poly, weight, a),
    }
    if args.m is not None:
        inputs["m"] = args.m
        lattice = stability.s_g_lattice(poly, weight, a, args.m)
        results["S_g_lattice"] = lattice
        diagnostics["lattice_delta"] = abs(lattice - val.s_g)
    return RunReport("sg", inputs, results, diagnostics)


def _delta(args: argparse.Namespace) -> RunReport:
    poly, weight, inputs = _geometry(args)
    tol = _tol(args, DELTA_TOL)
    res = stability.delta_toric(poly, weight, seed=args.seed, tol=tol)
    results = {
        "delta": res.value,
        "direction": res.direction,
        "oracle": res.oracle,
        "converged": res.converged,
    }
    diagnostics = {"tolerance": tol, "oracle_delta": abs(res.value - res.oracle)}
    return RunReport("delta", inputs, results, diagnostics, seed=args.seed)


def _ding_na(args: argparse.Namespace) -> RunReport:
    poly, weight, inputs = _geometry(args)
    a = _direction(args, poly)
    inputs["a"] = a
    val = stability.ToricValuation.of(poly, weight, a)
    results = {"ding_na": val.ding, "A": val.log_discrepancy, "S_g": val.s_g}
    diagnostics = {
        "tolerance": _tol(args, QUADRATURE_REL_TOL),
        "quadrature_error": _sg_error(poly, weight, a),
    }
    return RunReport("ding-na", inputs, results, diagnostics)


def _dh(args: argparse.Namespace) -> RunReport:
    poly, weight, inputs = _geometry(args)
    if args.pl_file is not None:
        f = decoder.pl_from_dict(decoder.load_document(args.pl_file), poly)
    elif args.a is not None:
        f = stability.valuation_function(poly, _direction(args, poly))
    else:
        f = stability.PLConvexFunction.normalized(poly, [])
    inputs.update({"pl": f.to_dict(), "m": args.m})
    sample = stability.dh_g_filtration(poly, weight, f, args.m)
    volume = invariants.weighted_volume(poly, weight)
    e_na = stability.e_g_na(poly, weight, f)
    results = {
        "total_mass": sample.total_mass,
        "V_g": volume,
        "barycenter": sample.barycenter,
        "e_g_na": e_na,
        "lambda_na": stability.lambda_na(f),
        "j_g_na": stability.j_g_na(poly, weight, f),
        "columns": sample.columns(),
    }
    diagnostics = {
        "mass_rel_error": abs(sample.total_mass - volume) / volume,
        "e_g_na_lattice_delta": abs(sample.barycenter - e_na),
    }
    return RunReport("dh", inputs, results, diagnostics)


def _solve_ma(args: argparse.Namespace) -> RunReport:
    poly, weight, inputs = _geometry(args)
    tol = _tol(args, MA_TOL)
    inputs["grid"] = {"R": args.radius, "N": args.nodes}
    if args.max_radius is not None:
        inputs["max_radius"] = args.max_radius
    sol = mafunc.solve_ma(
        poly,
        weight,
        radius=args.radius,
        nodes=args.nodes,
        tol=tol,
        max_radius=args.max_radius,
    )
    values = mafunc.functionals(sol.potential, weight, poly)
    results = {
        "residual": sol.residual,
        "normalization": sol.normalization,
        "futaki_defect": sol.futaki_defect,
        "futaki_vanishes": sol.futaki_vanishes,
        "barycenter": sol.barycenter,
        "ding_slope": sol.ding_slope,
        "window_gap": sol.window_gap,
        "functionals": values.to_dict(),
    }
    diagnostics = {
        "tolerance": tol,
        "iterations": sol.iterations,
        "damping": sol.damping,
        "grid": {"R": sol.potential.radius, "N": sol.potential.nodes},
    }
    if args.out is not None:
        Path(args.out).write_text(
            json.dumps(sol.potential.to_dict(), sort_keys=True) + "\n", encoding="utf8"
        )
    return RunReport("solve-ma", inputs, results, diagnostics)


def _functionals(args: argparse.Namespace) -> RunReport:
    poly, weight, inputs = _geometry(args)
    u = decoder.potential_from_dict(decoder.load_document(args.u), poly)
    inputs["u"] = u.to_dict()
    values = mafunc.functionals(u, weight, poly)
    diagnostics = {
        "tolerance": SLOPE_TOL,
        "clamped": values.clamped,
        "quadrature_error": integrate(poly, weight).error,
    }
    return RunReport("functionals", inputs, values.to_dict(), diagnostics)


def _inequalities(args: argparse.Namespace) -> RunReport:
    poly, weight, inputs = _geometry(args)
    inputs["samples"] = args.samples
    report = mafunc.inequality_suite(poly, weight, args.samples, args.seed, threads=args.threads)
    return RunReport("inequalities", inputs, report.to_dict(), seed=args.seed)


def _report(args: argparse.Namespace) -> RunReport:
    results: dict[str, Any] = {}
    for name in sorted(BUILTIN_VERTICES):
        poly = builtin(name)
        one = WeightFunction.constant(1, poly.dim)
        bary = invariants.weighted_barycenter(poly, one)
        kr = invariants.solve_kr_soliton(poly)
        mabuchi = invariants.solve_mabuchi_soliton(poly)
        sample = stability.dh_g_filtration(
            poly, one, stability.PLConvexFunction.normalized(poly, []), args.m
        )
        volume = invariants.weighted_volume(poly, one)
        results[name] = {
            "barycenter": bary,
            "futaki_vanishes": float(np.linalg.norm(bary)) < BARYCENTER_TOL,
            "kr_xi": kr.xi,
            "kr_residual": kr.residual,
            "mabuchi_b": mabuchi.exact,
            "mabuchi_feasible": mabuchi.feasible,
            "delta_oracle": stability.delta_from_barycenter(poly, bary)[0],
            "filtration_mass_rel_error": abs(sample.total_mass - volume) / volume,
        }
    return RunReport("report", {"m": args.m}, results)


HANDLERS: dict[str, Callable[[argparse.Namespace], RunReport]] = {
    "check-futaki": _check_futaki,
    "solve-soliton": _solve_soliton,
    "sg": _sg,
    "delta": _delta,
    "ding-na": _ding_na,
    "dh": _dh,
    "solve-ma": _solve_ma,
    "functionals": _functionals,
    "inequalities": _inequalities,
    "report": _report,
}


def _fail(err: dict[str, Any], code: int) -> int:
    sys.stderr.write(json.dumps({"error": err}, sort_keys=True) + "\n")
    return code


def main(test_args: Sequence[str] | None = None) -> int:
    """main cli function

    Returns:
        0 on success, 2 on invalid input, 1 on numerical failure
    """
    argv = list(sys.argv[1:] if test_args is None else test_args)
    command = next((arg for arg in argv if not arg.startswith("-")), None)
    if command is not None and command not in COMMANDS:
        err = SchemaError("UnknownCommand", SchemaErr.unknown_command(command))
        return _fail(err.to_dict(), 2)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SchemaError as e:
        return _fail(e.to_dict(), 2)
    if args.info:
        print(version_info())
        return 0
    if args.version:
        print(__version__)
        return 0
    if args.command is None:
        parser.print_help()
        return 0
    logging.basicConfig(
        level=args.log_level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        report = HANDLERS[args.command](args)
    except ToricGSError as e:
        logger.debug("%s failed: %s", args.command, e)
        return _fail(e.to_dict(), 1 if isinstance(e, ArithmeticError) else 2)
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        return _fail({"kind": "NumericalFailure", "message": str(e)}, 1)
    print(dumps(report, args.format).rstrip("\n"))
    return 0
