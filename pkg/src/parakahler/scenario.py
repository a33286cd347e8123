"""Scenario files: a JSON job description, validated and normalized.

Schema (keys not listed are rejected)::

    {
      "name": "flat_slice_kahler",            # optional, defaults to file stem
      "description": "...",                   # optional
      "ambient": {"kind": "flat" | "projective", "n": 1..3, "epsilon": -1 | 1,
                  "scale": 1.0,               # projective only, nonzero
                  "twist": 0.0, "tilt": 0.0,  # flat only
                  "gate_points": 5},          # projective only, >= 5
      "immersion": {"kind": "slice" | "pq_slice" | "graph" | "none",
                    "k": 2,                   # slice / pq_slice
                    "potential": [{"coeff": [re, im], "powers": [p1, ..., pn]}]},
      "points": {"count": 3, "seed": 0, "radius": 0.3}
                | {"explicit": [[u1, u2, ...], ...]},
      "fd_step": 0.001,
      "tolerances": {"<suite>": positive real},
      "expect": {"<predicate>": true | false},   # consumed by the classify suite
      "suites": ["<suite>", ...]
    }
"""

from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path

from .exceptions import ScenarioError

__all__ = ["load_scenario", "parse_scenario", "bundled_scenarios", "resolve_scenario"]

_TOP = {"name", "description", "ambient", "immersion", "points", "fd_step", "tolerances",
        "expect", "suites"}
_AMBIENT = {"kind", "n", "epsilon", "scale", "twist", "tilt", "gate_points"}
_IMMERSION = {"kind", "k", "potential"}
_PREDICATES = {"almost_hermitian", "kahler", "k2", "totally_complex", "para_quaternionic",
               "totally_geodesic", "almost_kahler", "integrable"}


def _position(text: str, path) -> tuple:
    """Best-effort (line, column) of the last key of ``path`` in ``text``."""
    pos, found = 0, None
    for key in path:
        if not isinstance(key, str):
            continue
        idx = text.find(json.dumps(key), pos)
        if idx < 0:
            break
        pos = found = idx
    if found is None:
        return None, None
    line = text.count("\n", 0, found) + 1
    col = found - (text.rfind("\n", 0, found) + 1) + 1
    return line, col


class _Checker:
    def __init__(self, text):
        self.text = text

    def fail(self, path, message):
        line, col = _position(self.text, path)
        where = ".".join(str(p) for p in path) or "<root>"
        raise ScenarioError(f"{where}: {message}", line, col)

    def obj(self, value, path, allowed):
        if not isinstance(value, dict):
            self.fail(path, "expected an object")
        for key in value:
            if key not in allowed:
                self.fail(path + [key], f"unknown key {key!r}")
        return value

    def number(self, value, path, positive=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, "expected a number")
        if positive and not value > 0:
            self.fail(path, "must be positive")
        return float(value)

    def integer(self, value, path, lo=None, hi=None):
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, "expected an integer")
        if (lo is not None and value < lo) or (hi is not None and value > hi):
            self.fail(path, f"must lie in [{lo}, {hi}]")
        return value


def parse_scenario(text: str, default_name: str = "scenario", suite_names=None) -> dict:
    """Parse and validate scenario text; returns the normalized scenario dict.

    Raises :class:`ScenarioError` carrying line/column where possible.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed scenario: {exc.msg}", exc.lineno, exc.colno) from None
    if suite_names is None:
        from .suites import SUITES

        suite_names = SUITES.keys()
    ck = _Checker(text)
    ck.obj(raw, [], _TOP)
    for key in ("ambient", "immersion", "suites"):
        if key not in raw:
            ck.fail([], f"missing required key {key!r}")

    amb = ck.obj(raw["ambient"], ["ambient"], _AMBIENT)
    kind = amb.get("kind")
    if kind not in ("flat", "projective"):
        ck.fail(["ambient", "kind"], "must be 'flat' or 'projective'")
    n = ck.integer(amb.get("n"), ["ambient", "n"], 1, 3)
    eps = amb.get("epsilon")
    if eps not in (-1, 1) or isinstance(eps, bool):
        ck.fail(["ambient", "epsilon"], "must be -1 or 1")
    ambient = {"kind": kind, "n": n, "epsilon": int(eps)}
    if kind == "projective":
        for key in ("twist", "tilt"):
            if key in amb:
                ck.fail(["ambient", key], "only valid for flat ambients")
        scale = ck.number(amb.get("scale", 1.0), ["ambient", "scale"])
        if scale == 0.0:
            ck.fail(["ambient", "scale"], "must be nonzero")
        ambient["scale"] = scale
        ambient["gate_points"] = ck.integer(amb.get("gate_points", 5),
                                            ["ambient", "gate_points"], 5, 50)
    else:
        for key in ("scale", "gate_points"):
            if key in amb:
                ck.fail(["ambient", key], "only valid for projective ambients")
        ambient["twist"] = ck.number(amb.get("twist", 0.0), ["ambient", "twist"])
        ambient["tilt"] = ck.number(amb.get("tilt", 0.0), ["ambient", "tilt"])

    im = ck.obj(raw["immersion"], ["immersion"], _IMMERSION)
    ikind = im.get("kind")
    if ikind not in ("slice", "pq_slice", "graph", "none"):
        ck.fail(["immersion", "kind"], "must be 'slice', 'pq_slice', 'graph' or 'none'")
    immersion = {"kind": ikind}
    if ikind in ("slice", "pq_slice"):
        default_k = n if ikind == "slice" else 1
        immersion["k"] = ck.integer(im.get("k", default_k), ["immersion", "k"], 1, n)
    if ikind == "graph":
        if kind != "flat":
            ck.fail(["immersion", "kind"], "graph immersions need a flat ambient")
        pot = im.get("potential")
        if not isinstance(pot, list) or not pot:
            ck.fail(["immersion", "potential"], "expected a nonempty list of terms")
        terms = []
        for i, term in enumerate(pot):
            path = ["immersion", "potential"]
            ck.obj(term, path, {"coeff", "powers"})
            coeff = term.get("coeff")
            powers = term.get("powers")
            if not (isinstance(coeff, list) and len(coeff) == 2):
                ck.fail(path + ["coeff"], f"term {i}: coeff must be [re, im]")
            if not (isinstance(powers, list) and len(powers) == n):
                ck.fail(path + ["powers"], f"term {i}: powers must have length {n}")
            terms.append({
                "coeff": [ck.number(c, path + ["coeff"]) for c in coeff],
                "powers": [ck.integer(p, path + ["powers"], 0, 6) for p in powers],
            })
        immersion["potential"] = terms
    elif "potential" in im:
        ck.fail(["immersion", "potential"], "only valid for graph immersions")

    pts = ck.obj(raw.get("points", {}), ["points"], {"count", "seed", "radius", "explicit"})
    if "explicit" in pts:
        ck.obj(pts, ["points"], {"explicit"})
        explicit = pts["explicit"]
        if not isinstance(explicit, list) or not explicit:
            ck.fail(["points", "explicit"], "expected a nonempty list of points")
        rows = []
        for row in explicit:
            if not isinstance(row, list):
                ck.fail(["points", "explicit"], "each point must be a list of numbers")
            rows.append([ck.number(v, ["points", "explicit"]) for v in row])
        points = {"explicit": rows}
    else:
        points = {
            "count": ck.integer(pts.get("count", 3), ["points", "count"], 1, 100),
            "seed": ck.integer(pts.get("seed", 0), ["points", "seed"], 0),
            "radius": ck.number(pts.get("radius", 0.3), ["points", "radius"], positive=True),
        }

    fd_step = ck.number(raw.get("fd_step", 1e-3), ["fd_step"], positive=True)

    suites = raw["suites"]
    if not isinstance(suites, list) or not suites:
        ck.fail(["suites"], "expected a nonempty list of suite names")
    known = set(suite_names)
    for s in suites:
        if s not in known:
            ck.fail(["suites"], f"unknown suite {s!r}")

    tol = ck.obj(raw.get("tolerances", {}), ["tolerances"], known)
    tolerances = {k: ck.number(v, ["tolerances", k], positive=True) for k, v in tol.items()}

    exp = ck.obj(raw.get("expect", {}), ["expect"], _PREDICATES)
    for k, v in exp.items():
        if not isinstance(v, bool):
            ck.fail(["expect", k], "expected true or false")

    name = raw.get("name", default_name)
    if not isinstance(name, str):
        ck.fail(["name"], "expected a string")
    description = raw.get("description", "")
    if not isinstance(description, str):
        ck.fail(["description"], "expected a string")
    return {
        "name": name,
        "description": description,
        "ambient": ambient,
        "immersion": immersion,
        "points": points,
        "fd_step": fd_step,
        "tolerances": tolerances,
        "expect": dict(exp),
        "suites": list(suites),
    }


def bundled_scenarios() -> list:
    """Names of the scenarios shipped with the package."""
    root = resources.files("parakahler") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_scenario(ref: str) -> tuple:
    """``(text, default_name)`` for a path or a bundled scenario name."""
    path = Path(ref)
    if path.is_file():
        try:
            return path.read_text(encoding="utf-8"), path.stem
        except (OSError, UnicodeDecodeError) as exc:
            raise ScenarioError(f"cannot read {ref}: {exc}") from None
    name = ref[:-5] if ref.endswith(".json") else ref
    if name in bundled_scenarios():
        res = resources.files("parakahler") / "scenarios" / f"{name}.json"
        return res.read_text(encoding="utf-8"), name
    raise ScenarioError(f"no scenario file or bundled scenario named {ref!r}")


def load_scenario(ref: str, overrides: dict | None = None) -> dict:
    """Load, validate and apply command-line overrides.

    ``overrides`` may hold ``fd_step``, ``seed`` and ``tol_scale``.
    """
    text, default = resolve_scenario(ref)
    sc = parse_scenario(text, default)
    sc = copy.deepcopy(sc)
    ov = overrides or {}
    if ov.get("fd_step") is not None:
        if not ov["fd_step"] > 0:
            raise ScenarioError("--fd-step must be positive")
        sc["fd_step"] = float(ov["fd_step"])
    if ov.get("seed") is not None:
        if ov["seed"] < 0:
            raise ScenarioError("--seed must be nonnegative")
        if "seed" in sc["points"]:
            sc["points"]["seed"] = int(ov["seed"])
    sc["tol_scale"] = 1.0
    if ov.get("tol_scale") is not None:
        if not ov["tol_scale"] > 0:
            raise ScenarioError("--tol-scale must be positive")
        sc["tol_scale"] = float(ov["tol_scale"])
    return sc
