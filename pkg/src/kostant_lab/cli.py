"""Command-line driver: ``kostant-lab <subcommand> --in problem.json --out report.json``.

Every run produces a report document with ``"schema": "kostant-lab/1"``.
Exit status is 0 when the report status is ``ok``, 1 for solver or
verification errors and 2 when the problem document itself is rejected.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import KostantError, ModelError, ParseError, SchemaError
from .functions import SeparableFunction
from .hyperbolic2d import flat_section_build, solve_full_2d, solve_jets_closed_form, solve_jets_recursive
from .kostant import (
    PolarizedForm,
    apply_dnabla,
    solve_h1,
    solve_h2_dim6,
    solve_top,
)
from .literals import (
    SCHEMA_ID,
    Problem,
    build_payload,
    canonical_json,
    emit_series,
    emit_value,
    parse_grid,
    parse_problem,
)
from .normal_forms import build_model
from .series import TruncatedSeries, cohom_operator
from .verify import DerivativeProbe, GridSpec, ResidualReport, compare_series, flow_residual

SUBCOMMANDS = {
    "solve2d": "solve2d",
    "h1": "solve_h1",
    "top": "solve_top",
    "h2dim6": "solve_h2_dim6",
    "flat-section": "flat_section",
    "verify": "verify",
    "expand": "expand_jets",
}

SYMBOLIC_TOL = 1e-12
GRID_TOL = 1e-8
DEFAULT_ORDER = 12
INPUT_ERRORS = (ParseError, SchemaError, ModelError)


def _grid_for(problem: Problem) -> GridSpec:
    if "grid" in problem.options:
        g = parse_grid(problem.options["grid"], ("options", "grid"))
        if len(g.box) != 2 * problem.arity:
            raise SchemaError(f"grid box has {len(g.box)} intervals, need {2 * problem.arity}",
                              path=("options", "grid", "box"))
        return g
    # 41 points per axis in 2 dimensions; fewer per axis when the grid is a product of 2n axes
    points = {1: 41, 2: 9}.get(problem.arity, 5)
    return GridSpec.default(problem.arity, points)


def _tol(problem: Problem, default: float) -> float:
    return float(problem.options.get("tolerance", default))


def _symbolic(label: str, value: float, tol: float) -> ResidualReport:
    return ResidualReport(label, tol, symbolic_max=float(value), exact_zero=value == 0.0)


def _run_solve2d(problem: Problem, f):
    mode = problem.options.get("mode", "exact")
    tol = _tol(problem, SYMBOLIC_TOL)
    residuals = []
    if mode == "formal":
        order = problem.options.get("order", DEFAULT_ORDER)
        if isinstance(f, SeparableFunction):
            if f.has_transcendental():
                raise SchemaError("formal mode accepts polynomial/rational data only", path=("data",))
            f = f.taylor(order + 2)
        elif f.order < order + 2:
            raise SchemaError(f"series order {f.order} below the required {order + 2}", path=("data", "order"))
        else:
            f = f.truncate(order + 2)
        g = solve_jets_recursive(f, tol)
        res = (cohom_operator(1, g) - f.truncate(g.order)).max_abs()
        residuals.append(_symbolic("cohomological_equation", res, tol * max(1.0, f.max_abs())))
        return g, residuals
    if isinstance(f, TruncatedSeries):
        f = SeparableFunction.from_series(f)
    g = solve_full_2d(f)
    res = (g.cohom(1) - f).residual_max()
    residuals.append(_symbolic("cohomological_equation", res, tol * max(1.0, f.scale_max())))
    if "order" in problem.options and not f.has_transcendental():
        order = problem.options["order"]
        jets = solve_jets_recursive(f.taylor(order + 2))
        residuals.append(compare_series(g.taylor(order), jets, 1e-10, label="taylor_vs_recursion",
                                        abs_floor=1e-14 * max(1.0, jets.max_abs())))
    if g.has_transcendental():
        model = build_model(problem.model)
        residuals.append(flow_residual(model, 1, g, f, _grid_for(problem), tolerance=_tol(problem, GRID_TOL),
                                       label="grid_flow_residual"))
    return g, residuals


def _form_residual(beta: PolarizedForm, alpha: PolarizedForm, tol: float) -> ResidualReport:
    d = apply_dnabla(beta)
    worst = 0.0
    for t in d.tuples():
        a = alpha[t]
        if isinstance(a, TruncatedSeries):
            worst = max(worst, (d[t] - a.truncate(d.order)).max_abs())
        else:
            worst = max(worst, (d[t] - a).residual_max())
    return _symbolic("dnabla_beta_minus_alpha", worst, tol * max(1.0, alpha.scale_max()))


def _run_form(problem: Problem, alpha: PolarizedForm):
    tol = _tol(problem, SYMBOLIC_TOL)
    if problem.kind == "solve_h1":
        g = solve_h1(alpha, tol).value
        beta = PolarizedForm(0, alpha.arity, {(): g}, alpha.mode, getattr(g, "order", None))
        return g, [_form_residual(beta, alpha, tol)]
    solver = solve_top if problem.kind == "solve_top" else solve_h2_dim6
    beta = solver(alpha, tol)
    return beta, [_form_residual(beta, alpha, tol)]


def _run_flat_section(problem: Problem, kernel):
    u = flat_section_build(kernel)
    model = build_model(problem.model)
    residuals = [
        _symbolic("kernel_equation", u.cohom(1).residual_max(), _tol(problem, SYMBOLIC_TOL)),
        flow_residual(model, 1, u, None, _grid_for(problem), tolerance=_tol(problem, GRID_TOL),
                      label="grid_kernel_residual"),
    ]
    return u, residuals


def _run_verify(problem: Problem, payload):
    G, F, j = payload
    probe = DerivativeProbe(**problem.data.get("probe", {}))
    model = build_model(problem.model)
    rep = flow_residual(model, j, G, F, _grid_for(problem), probe, tolerance=_tol(problem, GRID_TOL),
                        label="grid_flow_residual")
    return None, [rep]


def _run_expand(problem: Problem, f):
    order = problem.options.get("order", DEFAULT_ORDER)
    if isinstance(f, SeparableFunction):
        if f.has_transcendental():
            raise SchemaError("jet expansion accepts polynomial/rational data only", path=("data",))
        f = f.taylor(order + 2)
    else:
        if f.order < order + 2:
            raise SchemaError(f"series order {f.order} below the required {order + 2}", path=("data", "order"))
        f = f.truncate(order + 2)
    tol = _tol(problem, SYMBOLIC_TOL)
    rec = solve_jets_recursive(f, tol)
    closed = solve_jets_closed_form(f, tol)
    table = []
    for k in range(order + 1):
        for l in range(order + 1 - k):
            a, b = rec[(k, l)], closed[(k, l)]
            table.append({"exponents": [k, l], "recursion": [a.real, a.imag], "closed_form": [b.real, b.imag]})
    solution = {"type": "jet_table", "order": order, "rows": table, "recursion": emit_series(rec)}
    return solution, [compare_series(rec, closed, tol, label="recursion_vs_closed_form",
                                     abs_floor=1e-14 * max(1.0, rec.max_abs()))]


_DISPATCH = {
    "solve2d": _run_solve2d,
    "solve_h1": _run_form,
    "solve_top": _run_form,
    "solve_h2_dim6": _run_form,
    "flat_section": _run_flat_section,
    "verify": _run_verify,
    "expand_jets": _run_expand,
}


def input_digest(doc) -> str:
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()


def _base_report(kind, digest) -> dict:
    return {
        "schema": SCHEMA_ID,
        "tool_version": __version__,
        "kind": kind,
        "input_digest": digest,
        "status": "ok",
        "error": None,
        "solution": None,
        "residuals": [],
        "timings": {},
    }


def _error(exc: Exception) -> dict:
    if isinstance(exc, KostantError):
        res = exc.residual
        return {"code": exc.code, "message": str(exc), "residual": None if res is None else float(res)}
    return {"code": "INTERNAL_ERROR", "message": f"{type(exc).__name__}: {exc}", "residual": None}


def run(problem: Problem) -> dict:
    """Solve and verify one problem; never raises for module errors."""
    report = _base_report(problem.kind, input_digest(problem.document))
    t0 = time.perf_counter()
    try:
        payload = build_payload(problem)
        t1 = time.perf_counter()
        report["timings"]["build"] = t1 - t0
        with np.errstate(all="ignore"):
            solution, residuals = _DISPATCH[problem.kind](problem, payload)
        report["timings"]["solve_and_verify"] = time.perf_counter() - t1
    except Exception as exc:  # noqa: BLE001 - every failure becomes an error report
        report["status"] = "error"
        report["error"] = _error(exc)
        report["timings"]["total"] = time.perf_counter() - t0
        return report
    if solution is not None and not isinstance(solution, dict):
        solution = emit_value(solution)
    report["solution"] = solution
    report["residuals"] = [r.to_dict() for r in residuals]
    failing = [r for r in residuals if not r.ok]
    if failing:
        worst = failing[0]
        value = worst.symbolic_max if worst.symbolic_max is not None else worst.grid_max
        report["status"] = "error"
        report["error"] = {
            "code": "RESIDUAL_EXCEEDED",
            "message": f"{worst.label} = {value:.3e} above tolerance {worst.tolerance_used:.1e}",
            "residual": value,
        }
    report["timings"]["total"] = time.perf_counter() - t0
    return report


def error_report(kind, exc: Exception, digest=None) -> dict:
    report = _base_report(kind, digest)
    report["status"] = "error"
    report["error"] = _error(exc)
    return report


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_atomic(path: Path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _apply_flags(doc: dict, args) -> dict:
    opts = dict(doc.get("options", {}))
    if args.order is not None:
        opts["order"] = args.order
    if args.mode is not None:
        opts["mode"] = args.mode
    if args.tol is not None:
        opts["tolerance"] = args.tol
    if args.grid is not None:
        try:
            opts["grid"] = json.loads(args.grid)
        except json.JSONDecodeError as exc:
            raise ParseError(f"--grid is not a JSON grid literal: {exc}") from exc
    if opts:
        doc = dict(doc, options=opts)
    return doc


def _exit_code(report: dict) -> int:
    if report["status"] == "ok":
        return 0
    return 2 if report["error"]["code"] in {e.code for e in INPUT_ERRORS} else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kostant-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kind in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run a '{kind}' problem")
        p.add_argument("--in", dest="inp", required=True, help="problem document (JSON)")
        p.add_argument("--out", help="report path (default: stdout)")
        p.add_argument("--order", type=int, help="truncation order of the result")
        p.add_argument("--mode", choices=("formal", "exact"))
        p.add_argument("--tol", type=float, help="tolerance for all residual checks")
        p.add_argument("--grid", help='grid literal, e.g. {"box": [[-1,1],[-1,1]], "points": 21}')
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kind = SUBCOMMANDS[args.command]
    digest = None
    try:
        problem = parse_problem(args.inp)
        doc = _apply_flags(problem.document, args)
        digest = input_digest(doc)
        if doc["kind"] != kind:
            raise SchemaError(f"document kind {doc['kind']!r} does not match subcommand {args.command!r}",
                              path=("kind",))
        problem = parse_problem(doc)
        report = run(problem)
        code = _exit_code(report)
    except INPUT_ERRORS as exc:
        report = error_report(kind, exc, digest)
        code = 2
    text = dumps_report(report)
    if args.out:
        write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
