"""Command-line front end: run a scenario's suites and write a JSON report.

Exit codes: 0 pass, 1 residual failure, 2 input error, 3 chart-validation
failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import platform
import sys

import numpy as np
import scipy

from . import __version__
from .exceptions import ChartValidationError, ImmersionError, ScenarioError
from .models import (
    Potential,
    embed_epsilon_complex_slice,
    embed_graph,
    embed_pq_slice,
    flat_space,
    projective_chart,
    sample_points,
)
from .scenario import bundled_scenarios, load_scenario
from .suites import SUITES, Context, NotApplicable

__all__ = ["build", "run_scenario", "render_report", "main"]

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_CHART = 0, 1, 2, 3


def _seed(sc) -> int:
    return int(sc["points"].get("seed", 0))


def build(sc: dict):
    """Chart, immersion (or ``None``) and domain points of a scenario."""
    amb = sc["ambient"]
    h = sc["fd_step"]
    if amb["kind"] == "flat":
        chart = flat_space(amb["n"], amb["epsilon"], amb["twist"], amb["tilt"])
    else:
        chart = projective_chart(amb["n"], amb["epsilon"], amb["scale"],
                                 gate_points=amb["gate_points"], seed=_seed(sc), h=h)
    im = sc["immersion"]
    if im["kind"] == "slice":
        imm = embed_epsilon_complex_slice(im["k"], chart)
    elif im["kind"] == "pq_slice":
        imm = embed_pq_slice(im["k"], chart)
    elif im["kind"] == "graph":
        terms = [(t["coeff"], t["powers"]) for t in im["potential"]]
        imm = embed_graph(Potential(terms, amb["n"], amb["epsilon"]), chart)
    else:
        imm = None
    dim = chart.dim if imm is None else imm.domain_dim
    pts = sc["points"]
    if "explicit" in pts:
        points = np.array(pts["explicit"], dtype=float)
        if points.shape[1] != dim:
            raise ScenarioError(f"explicit points must have {dim} coordinates")
    else:
        points = sample_points(dim, pts["count"], pts["seed"], pts["radius"])
    if imm is not None:
        for u in points:
            imm.check(u, h)
    return chart, imm, points


def _clean(obj):
    """JSON-ready copy: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def run_scenario(sc: dict) -> tuple:
    """Execute the suites of a loaded scenario; returns ``(report, exit_code)``.

    Raises :class:`ChartValidationError`, :class:`ImmersionError` and
    :class:`ScenarioError` from construction.
    """
    chart, imm, points = build(sc)
    ctx = Context(chart, imm, points, sc["fd_step"], _seed(sc), sc["expect"])
    results = []
    ok = True
    for name in sc["suites"]:
        suite = SUITES[name]
        tol = sc["tolerances"].get(name, suite.tolerance) * sc["tol_scale"]
        entry = {"name": name, "description": suite.description, "tolerance": tol}
        try:
            per, details = suite.run(ctx)
        except NotApplicable as exc:
            entry.update(status="not_applicable", reason=str(exc), passed=None)
            results.append(entry)
            continue
        mx = float(max(per))
        passed = mx <= tol
        ok &= passed
        entry.update(
            status="pass" if passed else "fail",
            passed=passed,
            per_point=per,
            max=mx,
            mean=float(np.mean(per)),
            details=details,
        )
        results.append(entry)
    gate = chart.meta.get("gate")
    report = {
        "report_format": 1,
        "scenario": sc,
        "seed": _seed(sc),
        "versions": {
            "parakahler": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "chart": {
            "name": chart.name,
            "nu_hat": float(np.mean(gate["nu_hat"])) if gate else 0.0,
            "gate": gate,
        },
        "immersion": None if imm is None else {"name": imm.name, "meta": imm.meta},
        "points": points,
        "suites": results,
        "passed": ok,
    }
    code = EXIT_PASS if ok else EXIT_FAIL
    report["exit_status"] = code
    return _clean(report), code


def render_report(report: dict, timestamp: str | None = None) -> str:
    """Canonical JSON text; ``timestamp`` is the only run-dependent field."""
    out = dict(report)
    out["timestamp"] = timestamp
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def _error_report(kind, message, extra=None):
    rep = {"report_format": 1, "error": {"kind": kind, "message": message}, "passed": False}
    if extra:
        rep["error"].update(extra)
    return _clean(rep)


def _parser():
    p = argparse.ArgumentParser(prog="parakahler", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run a scenario and write a report")
    v.add_argument("--scenario", help="scenario file or bundled scenario name")
    v.add_argument("--report", help="report path ('-' for stdout)")
    v.add_argument("--fd-step", type=float, help="override the finite-difference step")
    v.add_argument("--tol-scale", type=float, help="multiply every tolerance")
    v.add_argument("--seed", type=int, help="override the sampling seed")
    v.add_argument("--list-suites", action="store_true", help="list registered suites")
    v.add_argument("--list-scenarios", action="store_true", help="list bundled scenarios")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.list_suites:
        for name, s in SUITES.items():
            print(f"{name:26s} tol={s.tolerance:<8g} {s.description}")
        return EXIT_PASS
    if args.list_scenarios:
        print("\n".join(bundled_scenarios()))
        return EXIT_PASS
    if not args.scenario:
        print("error: --scenario is required", file=sys.stderr)
        return EXIT_INPUT
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    try:
        sc = load_scenario(args.scenario, {"fd_step": args.fd_step, "seed": args.seed,
                                           "tol_scale": args.tol_scale})
        report, code = run_scenario(sc)
    except ScenarioError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        report, code = _error_report("input", str(exc),
                                     {"line": exc.line, "column": exc.column}), EXIT_INPUT
    except ImmersionError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        report, code = _error_report("immersion", str(exc), {"point": exc.point}), EXIT_INPUT
    except ChartValidationError as exc:
        print(f"chart validation failed: {exc}", file=sys.stderr)
        report, code = _error_report("chart_validation", str(exc), {"gate": exc.gate}), EXIT_CHART
    else:
        for s in report["suites"]:
            status = s["status"].upper()
            value = f"max={s['max']:.3e}" if "max" in s else s.get("reason", "")
            print(f"{status:14s} {s['name']:26s} {value} tol={s['tolerance']:.1e}")
        print("PASS" if code == EXIT_PASS else "FAIL")
    text = render_report(report, stamp)
    if args.report == "-":
        sys.stdout.write(text)
    elif args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
