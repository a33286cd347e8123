"""Finite-difference Levi-Civita calculus on coordinate charts.

All derivatives use the fourth-order central stencil
``f'(x) ~ (-f(x+2h) + 8 f(x+h) - 8 f(x-h) + f(x-2h)) / 12h``; second
derivatives nest it.  The step is scaled by ``max(1, |x|_inf)``.

Index conventions: ``Gamma[k, i, j]`` is ``Gamma^k_{ij}``; partial derivative
arrays carry the differentiation index first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .curvature import CurvatureTensor, scal
from .exceptions import ChartValidationError
from .linear import AdaptedBasis, signature

__all__ = [
    "DEFAULT_STEP",
    "TOL_ALGEBRAIC",
    "TOL_FD1",
    "TOL_FD2",
    "Chart",
    "ConnectionForms",
    "partials",
    "christoffel",
    "curvature_fd",
    "estimate_nu",
    "connection_one_forms",
    "structure_eq_residuals",
    "covariant_derivative_field",
    "d_one_form",
    "d_two_form",
    "wedge11",
    "wedge21",
]

DEFAULT_STEP = 1e-3
TOL_ALGEBRAIC = 1e-10
TOL_FD1 = 1e-4
TOL_FD2 = 1e-3


def _step(x, h):
    return h * max(1.0, float(np.abs(x).max(initial=0.0)))


def partials(fn, x, h=DEFAULT_STEP) -> np.ndarray:
    """Stack of ``d fn / d x^i`` with the new index first."""
    x = np.asarray(x, dtype=float)
    hh = _step(x, h)
    out = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = hh
        out.append((-fn(x + 2 * e) + 8 * fn(x + e) - 8 * fn(x - e) + fn(x - 2 * e)) / (12 * hh))
    return np.array(out)


@dataclass(frozen=True)
class Chart:
    """A coordinate chart of a para-quaternionic Kaehler manifold.

    ``metric(x)`` returns the Gram matrix and ``J_fields(x)`` a ``(3, d, d)``
    stack of a pointwise adapted basis.  ``nu`` is the declared reduced
    scalar curvature; it is informational, consumers re-estimate it.
    """

    dim: int
    metric: Callable
    J_fields: Callable
    eps: tuple
    nu: Optional[float] = None
    name: str = "chart"
    domain_radius: float = np.inf
    singularity: Optional[Callable] = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.dim // 4

    @property
    def epsilon(self) -> int:
        return self.eps[0]

    def basis(self, x) -> AdaptedBasis:
        J = self.J_fields(np.asarray(x, dtype=float))
        return AdaptedBasis(J[0], J[1], J[2], self.eps)

    def check_point(self, x, margin=0.0) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"point must have shape ({self.dim},), got {x.shape}")
        if np.linalg.norm(x) + margin > self.domain_radius:
            raise ValueError(f"point {x} outside the chart domain")
        if self.singularity is not None and abs(self.singularity(x)) < 1e-6:
            raise ValueError(f"chart singularity at {x}")
        if signature(self.metric(x))[2]:
            raise ValueError(f"metric degenerate at {x}")


def _metric_fn(obj):
    return obj.metric if isinstance(obj, Chart) else obj


def christoffel(chart, x, h=DEFAULT_STEP) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[k, i, j]``; symmetric in ``(i, j)`` by construction."""
    metric = _metric_fn(chart)
    x = np.asarray(x, dtype=float)
    g = metric(x)
    dg = partials(metric, x, h)  # dg[i, j, l] = d_i g_jl
    T = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    return 0.5 * np.einsum("kl,ijl->kij", np.linalg.inv(g), T)


def curvature_fd(chart, x, h=DEFAULT_STEP) -> CurvatureTensor:
    """Curvature ``R(e_i, e_j) = [nabla_i, nabla_j]`` from nested differences."""
    metric = _metric_fn(chart)
    x = np.asarray(x, dtype=float)
    G = christoffel(metric, x, h)
    dG = partials(lambda y: christoffel(metric, y, h), x, h)  # dG[i, l, j, k]
    op = (
        np.einsum("iljk->ijlk", dG)
        - np.einsum("jlik->ijlk", dG)
        + np.einsum("lim,mjk->ijlk", G, G)
        - np.einsum("ljm,mik->ijlk", G, G)
    )
    return CurvatureTensor(op, metric(x))


def estimate_nu(R: CurvatureTensor) -> float:
    """Reduced scalar curvature ``scal / (4n (n + 2))`` for ``dim = 4n``."""
    n = R.dim / 4.0
    return scal(R) / (4.0 * n * (n + 2.0))


@dataclass(frozen=True)
class ConnectionForms:
    """``omega[a, i] = omega_{a+1}(e_i)`` and the least-squares residual."""

    omega: np.ndarray
    residual: float


_CYCLES = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def _design_matrix(basis: AdaptedBasis) -> np.ndarray:
    """Linear map ``(w1, w2, w3) -> stack_a (-eps_b w_c J_b + eps_c w_b J_c)``."""
    eps, Js = basis.eps, basis.Js
    d = basis.dim
    D = np.zeros((3, d, d, 3))
    for a, b, c in _CYCLES:
        D[a, :, :, c] += -eps[b] * Js[b]
        D[a, :, :, b] += eps[c] * Js[c]
    return D.reshape(3 * d * d, 3)


def nabla_J(chart: Chart, x, h=DEFAULT_STEP) -> np.ndarray:
    """``nJ[a, i] = nabla_{e_i} J_a`` as matrices, shape ``(3, d, d, d)``."""
    x = np.asarray(x, dtype=float)
    G = christoffel(chart, x, h)
    J = chart.J_fields(x)
    dJ = partials(chart.J_fields, x, h)  # dJ[i, a]
    Gi = G.transpose(1, 0, 2)  # Gi[i] = matrix (k, j) of Gamma^k_ij
    return (
        dJ.transpose(1, 0, 2, 3)
        + np.einsum("ikj,ajl->aikl", Gi, J)
        - np.einsum("akj,ijl->aikl", J, Gi)
    )


def connection_one_forms(chart: Chart, x, h=DEFAULT_STEP, tol=None) -> ConnectionForms:
    """Solve ``nabla J_a = -eps_b omega_c J_b + eps_c omega_b J_c`` for the ``omega``.

    The residual is the largest Frobenius misfit over coordinate
    directions.  When ``tol`` is given and the residual exceeds ``10 * tol``
    the structure is not parallel and :class:`ChartValidationError` is
    raised.
    """
    x = np.asarray(x, dtype=float)
    nJ = nabla_J(chart, x, h)
    d = chart.dim
    D = _design_matrix(chart.basis(x))
    Y = nJ.transpose(0, 2, 3, 1).reshape(3 * d * d, d)
    W, *_ = np.linalg.lstsq(D, Y, rcond=None)
    resid = float(np.linalg.norm(D @ W - Y, axis=0).max())
    if tol is not None and resid > 10 * tol:
        raise ChartValidationError(
            f"connection one-forms do not reproduce nabla J (residual {resid:.3e}); "
            "the chart's Q is not parallel"
        )
    return ConnectionForms(W, resid)


def wedge11(a, b) -> np.ndarray:
    """``(a ^ b)(X, Y) = a(X) b(Y) - a(Y) b(X)``."""
    return np.outer(a, b) - np.outer(b, a)


def wedge21(F, w) -> np.ndarray:
    """``(F ^ w)(X, Y, Z)`` = cyclic sum of ``F(X, Y) w(Z)``."""
    t = np.einsum("ij,k->ijk", F, w)
    return t + t.transpose(1, 2, 0) + t.transpose(2, 0, 1)


def d_one_form(fn, x, h=DEFAULT_STEP) -> np.ndarray:
    """``dw(X, Y) = X w(Y) - Y w(X) - w([X, Y])`` in coordinates."""
    dw = partials(fn, x, h)  # dw[i, j] = d_i w_j
    return dw - dw.T


def d_two_form(fn, x, h=DEFAULT_STEP) -> np.ndarray:
    dF = partials(fn, x, h)  # dF[i, j, k] = d_i F_jk
    return dF + dF.transpose(1, 2, 0) + dF.transpose(2, 0, 1)


def structure_eq_residuals(chart: Chart, x, nu=None, h=DEFAULT_STEP) -> dict:
    """Residuals of the structure equations and their integrability conditions.

    ``curvature[a]``: ``nu F'_a - eps_3 (d omega_a - eps_a omega_b ^ omega_c)``;
    ``integrability[a]``: ``nu [dF'_a - eps_a (-F'_b ^ omega_c + omega_b ^ F'_c)]``;
    both as max-abs over components.  ``nu`` defaults to the estimate from
    the finite-difference curvature at ``x``.
    """
    x = np.asarray(x, dtype=float)
    if nu is None:
        nu = estimate_nu(curvature_fd(chart, x, h))
    eps = chart.eps

    def omega_at(y):
        return connection_one_forms(chart, y, h).omega

    def fprime_at(y):
        J = chart.J_fields(y)
        g = chart.metric(y)
        return np.array([-eps[a] * J[a].T @ g for a in range(3)])

    om = omega_at(x)
    dom = partials(omega_at, x, h)  # dom[i, a, j]
    Fp = fprime_at(x)
    dFp = partials(fprime_at, x, h)  # dFp[i, a, j, k]
    curv, integ = [], []
    for a, b, c in _CYCLES:
        d_om = dom[:, a, :] - dom[:, a, :].T
        lhs = nu * Fp[a]
        rhs = eps[2] * (d_om - eps[a] * wedge11(om[b], om[c]))
        curv.append(float(np.abs(lhs - rhs).max()))
        dF = dFp[:, a]
        dF = dF + dF.transpose(1, 2, 0) + dF.transpose(2, 0, 1)
        rest = -wedge21(Fp[b], om[c]) + wedge21(Fp[c], om[b])
        integ.append(float(np.abs(nu * (dF - eps[a] * rest)).max()))
    return {"curvature": curv, "integrability": integ, "nu": float(nu)}


def covariant_derivative_field(chart, field, pattern: str, x, X=None, h=DEFAULT_STEP):
    """Levi-Civita derivative of a tensor field given in coordinates.

    ``pattern`` has one letter per index of ``field(x)``: ``"u"`` for an
    upper (vector) index and ``"d"`` for a lower one; e.g. ``"ud"`` for an
    endomorphism field, ``"dd"`` for a bilinear form.  Returns the array
    ``nabla[m, ...] = (nabla_{e_m} T)`` or, when ``X`` is given, the
    contraction with ``X``.  Complex-valued fields are supported.
    """
    metric = _metric_fn(chart)
    x = np.asarray(x, dtype=float)
    G = christoffel(metric, x, h)
    T = np.asarray(field(x))
    if T.ndim != len(pattern):
        raise ValueError(f"pattern {pattern!r} does not match field rank {T.ndim}")
    out = partials(field, x, h).astype(np.result_type(T, float))
    letters = "abcdefghijkl"
    src = letters[: T.ndim]
    for slot, kind in enumerate(pattern):
        if kind == "u":
            # + Gamma^{s}_{m c} T^{..c..}
            tgt = src[:slot] + "s" + src[slot + 1 :]
            expr = f"s m {src[slot]},{src}->m{tgt}".replace(" ", "")
            out = out + np.einsum(expr, G, T)
        elif kind == "d":
            # - Gamma^{c}_{m s} T_{..c..}
            tgt = src[:slot] + "s" + src[slot + 1 :]
            expr = f"{src[slot]}ms,{src}->m{tgt}"
            out = out - np.einsum(expr, G, T)
        else:
            raise ValueError(f"unknown index kind {kind!r}")
    if X is not None:
        return np.tensordot(np.asarray(X, dtype=float), out, axes=(0, 0))
    return out
