"""Registry of verification suites run by the command-line front end.

Each suite maps a :class:`Context` to per-point residuals plus optional
details.  A suite passes when the maximum of its per-point residuals is at
most its tolerance.  New identities plug in by adding a registry entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import submanifold as sm
from .calculus import connection_one_forms, curvature_fd, structure_eq_residuals
from .curvature import (
    cc_properties,
    normal_block_residual,
    parallel_rtt_residual,
    ricci,
    space_form_blocks,
)
from .linear import random_s_prolongation, s_prolongation_basis

__all__ = ["Suite", "Context", "NotApplicable", "SUITES", "register"]


class NotApplicable(Exception):
    """The suite's preconditions do not hold for this scenario."""


@dataclass
class Context:
    """Everything a suite may need: chart, immersion, points and settings."""

    chart: object
    immersion: object
    points: np.ndarray
    h: float
    seed: int = 0
    expect: dict = field(default_factory=dict)
    _pd: dict = field(default_factory=dict, repr=False)

    @property
    def images(self) -> np.ndarray:
        if self.immersion is None:
            return self.points
        return np.array([self.immersion(u) for u in self.points])

    def need_immersion(self):
        if self.immersion is None:
            raise NotApplicable("scenario has no immersion")
        return self.immersion

    def point(self, i) -> sm.PointData:
        if i not in self._pd:
            self._pd[i] = sm.point_data(self.need_immersion(), self.points[i], self.h)
        return self._pd[i]

    def maximal_point(self, i) -> sm.PointData:
        pd = self.point(i)
        if pd.C is None:
            raise NotApplicable(
                f"needs a maximal totally epsilon-complex point (normal frame {pd.normal_kind!r})"
            )
        return pd


@dataclass(frozen=True)
class Suite:
    name: str
    run: Callable
    tolerance: float
    description: str


SUITES: dict = {}


def register(name, tolerance, description):
    def deco(fn):
        SUITES[name] = Suite(name, fn, tolerance, description)
        return fn

    return deco


def _each(ctx, fn):
    return [float(fn(i)) for i in range(len(ctx.points))]


def _split(records):
    """Per-point maxima of dict records plus per-key lists as details."""
    keys = sorted(records[0]) if records else []
    per = [max(float(r[k]) for k in keys) for r in records]
    return per, {k: [float(r[k]) for r in records] for k in keys}


# --- ambient ---------------------------------------------------------------------


@register("chart_gate", 1e-3, "ambient curvature equals nu_hat R0 and is Einstein")
def _chart_gate(ctx):
    gate = ctx.chart.meta.get("gate")
    if gate is not None:
        per = [max(r, e) for r, e in zip(gate["rel"], gate["einstein"])]
        return per, {"nu_hat": gate["nu_hat"], "rel": gate["rel"],
                     "einstein": gate["einstein"], "nu_spread": gate["nu_spread"]}
    per = [curvature_fd(ctx.chart, x, ctx.h).norm() for x in ctx.images]
    return per, {"curvature_norm": per}


@register("connection_forms", 1e-4, "nabla J_a is a combination of J_b, J_c")
def _connection_forms(ctx):
    per = [connection_one_forms(ctx.chart, x, ctx.h).residual for x in ctx.images]
    return per, {}


@register("structure_equations", 1e-3, "curvature of Q and its integrability condition")
def _structure(ctx):
    nu = sm.ambient_nu(ctx.chart, ctx.images[0], ctx.h)
    recs = []
    for x in ctx.images:
        r = structure_eq_residuals(ctx.chart, x, nu, ctx.h)
        recs.append({"curvature": max(r["curvature"]), "integrability": max(r["integrability"])})
    return _split(recs)


# --- classification ----------------------------------------------------------------


@register("classify", 0.5, "verdicts match the scenario's expectations; exclusivity holds")
def _classify(ctx):
    v = sm.classify(ctx.need_immersion(), ctx.points, h=ctx.h)
    mismatches = sorted(k for k, want in ctx.expect.items() if v.verdicts.get(k) is not want)
    bad = len(mismatches) + int(v.exclusivity_violation)
    details = v.as_dict()
    details["expected"] = dict(sorted(ctx.expect.items()))
    details["mismatches"] = mismatches
    return [float(bad)], details


@register("nijenhuis_psi", 1e-3, "Nijenhuis tensor against its psi reconstruction")
def _nijenhuis(ctx):
    recs = [sm.nijenhuis_psi_residual(ctx.need_immersion(), u, ctx.h) for u in ctx.points]
    per = [r["residual"] for r in recs]
    return per, {"norm_N": [r["norm_N"] for r in recs], "norm_psi": [r["norm_psi"] for r in recs]}


@register("kahler_form_differential", 1e-4,
          "dF1 on M equals -(F2 ^ omega3 + eps F3 ^ omega2)")
def _kahler_differential(ctx):
    recs = [sm.kahler_form_differential_residual(ctx.need_immersion(), u, ctx.h)
            for u in ctx.points]
    return [r["residual"] for r in recs], {"dF": [r["dF"] for r in recs]}


# --- second fundamental form ---------------------------------------------------------


@register("fundamental_identity", 1e-5, "h(X, JY) = J1 h(X, Y) and h(JX, JY) = eps h(X, Y)")
def _fundamental(ctx):
    imm = ctx.need_immersion()
    recs = []
    for i, u in enumerate(ctx.points):
        pd = ctx.point(i)
        if pd.residuals["almost_hermitian"] > 1e-6:
            raise NotApplicable("tangent spaces are not J1-invariant")
        recs.append(sm.fundamental_identity_residual(imm, u, ctx.h, pd))
    per, det = _split(recs)
    det["h_norm"] = [ctx.point(i).residuals["totally_geodesic"] for i in range(len(per))]
    return per, det


@register("shape_tensor", 1e-5, "shape tensor identities, minimality and AJ + JA = 0")
def _shape(ctx):
    imm = ctx.need_immersion()
    recs = [sm.shape_tensor_checks(imm, u, ctx.h, ctx.maximal_point(i))
            for i, u in enumerate(ctx.points)]
    return _split(recs)


@register("weingarten", 1e-4, "<A^xi X, Y> = <h(X, Y), xi> over the normal frame")
def _weingarten(ctx):
    imm = ctx.need_immersion()
    return _each(ctx, lambda i: sm.weingarten_residual(imm, ctx.points[i], ctx.h, ctx.point(i))), {}


@register("gauss_codazzi_ricci", 1e-3, "Gauss, Codazzi and Ricci equations")
def _gcr(ctx):
    imm = ctx.need_immersion()
    for i in range(len(ctx.points)):
        ctx.maximal_point(i)
    return _split([sm.gcr_residuals(imm, u, ctx.h) for u in ctx.points])


@register("ricci_gauss_trace", 1e-3, "Ric_M = Ric(R^TT) + tr <C, C>")
def _ricci_gauss_trace(ctx):
    for i in range(len(ctx.points)):
        ctx.maximal_point(i)
    per = sm.ricci_check(ctx.need_immersion(), ctx.points, ctx.h)["gauss_trace"]
    return per, {}


@register("ricci_space_form", 1e-3, "Ric_M = (nu_hat/2)(n+1) g + tr C^2")
def _ricci_sf(ctx):
    for i in range(len(ctx.points)):
        ctx.maximal_point(i)
    per = sm.ricci_check(ctx.need_immersion(), ctx.points, ctx.h)["space_form"]
    return per, {"nu_hat": sm.ambient_nu(ctx.chart, ctx.images[0], ctx.h)}


@register("domega", 1e-3, "d omega = nu_hat F on M")
def _domega(ctx):
    for i in range(len(ctx.points)):
        ctx.maximal_point(i)
    return sm.domega_check(ctx.need_immersion(), ctx.points, ctx.h), {}


@register("space_form_blocks", 1e-9,
          "closed-form curvature blocks, Ricci of R^TT, Ricci-from-Gauss and the R^TT identity")
def _blocks(ctx):
    rng = np.random.default_rng(ctx.seed)
    nu = sm.ambient_nu(ctx.chart, ctx.images[0], ctx.h)
    n = ctx.chart.n
    recs = []
    for i in range(len(ctx.points)):
        pd = ctx.maximal_point(i)
        basis = ctx.chart.basis(pd.x)
        blk = space_form_blocks(basis, pd.G, nu, pd.E)
        m = pd.dim
        gT = pd.g_frame
        cols = [pd.E[:, a] for a in range(m)]
        r = {"tt_closed": 0.0, "nn_closed": 0.0, "nt_zero": 0.0, "normal_block": 0.0, "parallel_rtt": 0.0}
        for a in range(m):
            for b in range(m):
                res = blk.residuals(cols[a], cols[b])
                r["tt_closed"] = max(r["tt_closed"], res["tt_closed"])
                r["nn_closed"] = max(r["nn_closed"], res["nn_closed"])
                r["nt_zero"] = max(r["nt_zero"], res["nt_zero"], res["tn_zero"])
                r["normal_block"] = max(r["normal_block"], normal_block_residual(blk, cols[a], cols[b]))
        ric = ricci(blk.r_tt_tensor())
        r["ricci_tt"] = float(np.abs(ric - 0.5 * nu * (n + 1) * gT).max())
        left = pd.mu[:, None] * (pd.E.T @ pd.G)
        C = random_s_prolongation(gT, pd.Jc, rng, s_prolongation_basis(gT, pd.Jc))
        for _ in range(3):
            x, y, z = rng.normal(size=(3, m))
            CX = pd.E @ np.einsum("i,ijk->jk", x, C) @ left
            r["parallel_rtt"] = max(r["parallel_rtt"], parallel_rtt_residual(blk, CX, pd.E @ x, pd.E @ y, pd.E @ z))
        recs.append(r)
    return _split(recs)


# --- shape tensor algebra and parallelism -----------------------------------------------


@register("cc_properties", 1e-9, "[C, C] commutes with J, is skew and satisfies Bianchi")
def _cc(ctx):
    recs = []
    for i in range(len(ctx.points)):
        pd = ctx.maximal_point(i)
        recs.append(cc_properties(pd.C, pd.g_frame, pd.Jc))
    return _split(recs)


@register("cubic_transform", 1e-9, "cubic-form parts under frame rotations fixing J1")
def _cubic(ctx):
    thetas = np.linspace(-1.0, 1.0, 9)
    recs = []
    for i in range(len(ctx.points)):
        pd = ctx.maximal_point(i)
        recs.append(sm.cubic_transform_check(pd.C, pd.g_frame, pd.Jc, pd.epsilon, thetas))
    return _split(recs)


@register("parallelism", 1e-3, "(nabla_X C)_Y + eps omega(X) J C_Y = 0")
def _parallel(ctx):
    imm = ctx.need_immersion()
    for i in range(len(ctx.points)):
        ctx.maximal_point(i)
    return _each(ctx, lambda i: sm.parallelism_residual(imm, ctx.points[i], h=ctx.h)), {}


@register("cc_parallel", 1e-3, "nabla [C, C] = 0 (local symmetry on space forms)")
def _cc_parallel(ctx):
    imm = ctx.need_immersion()
    for i in range(len(ctx.points)):
        ctx.maximal_point(i)
    return _each(ctx, lambda i: sm.cc_parallel_residual(imm, ctx.points[i], ctx.h)), {}


@register("cubic_parallel", 1e-3, "parallel cubic forms on parallel submanifolds")
def _cubic_parallel(ctx):
    imm = ctx.need_immersion()
    for i in range(len(ctx.points)):
        ctx.maximal_point(i)
    return _each(ctx, lambda i: sm.cubic_parallel_residual(imm, ctx.points[i], ctx.h)), {}
