"""First- and second-order data of immersed submanifolds and their identities.

Conventions.  An :class:`~parakahler.models.Immersion` ``f`` maps domain
coordinates ``u`` into chart coordinates.  Tensors are handled in two
bases: *domain* coordinates (``d/du^a``) for anything differentiated along
the submanifold, and a pseudo-orthonormal *frame* ``E_i`` (with signs
``mu_i``) for pointwise identities.  ``E = Df @ A``.

The second fundamental form is the normal part of
``d^2 f(X, Y) + Gamma(X, Y)`` (Gauss formula).  The shape tensor is
``C_X Y = J2 h(X, Y)``; it is only formed at maximal totally
epsilon-complex points, where the normal frame is ``J2`` of the tangent
frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import null_space

from .calculus import (
    DEFAULT_STEP,
    christoffel,
    connection_one_forms,
    covariant_derivative_field,
    curvature_fd,
    d_one_form,
    d_two_form,
    estimate_nu,
    partials,
    wedge21,
)
from .curvature import ricci
from .exceptions import DegenerateSubspaceError, ImmersionError
from .linear import (
    cubic_form,
    decompose_S_prolongation,
    invariant_subspace,
    pseudo_orthonormalize,
    s_prolongation_residuals,
    signature,
    total_symmetry_residual,
)

__all__ = [
    "DEFAULT_TOLERANCES",
    "PointData",
    "ClassificationVerdict",
    "point_data",
    "weingarten_operator",
    "weingarten_residual",
    "nijenhuis",
    "psi_form",
    "nijenhuis_psi_residual",
    "predicate_residuals",
    "classify",
    "fundamental_identity_residual",
    "shape_tensor_checks",
    "gcr_residuals",
    "ricci_check",
    "domega_check",
    "wedge_residual_from_forms",
    "almost_kahler_wedge_residual",
    "kahler_form_differential_residual",
    "cubic_forms",
    "cubic_transform_check",
    "parallelism_residual",
    "cubic_parallel_residual",
    "cc_parallel_residual",
    "shape_tensor_field",
]

DEFAULT_TOLERANCES = {
    "almost_hermitian": 1e-6,
    "totally_complex": 1e-6,
    "para_quaternionic": 1e-6,
    "totally_geodesic": 1e-6,
    "kahler": 1e-4,
    "k2": 1e-4,
    "almost_kahler": 1e-4,
    "integrable": 1e-3,
}


def _rel(V, W):
    return float(np.linalg.norm(V) / max(np.linalg.norm(W), 1e-300))


def _max(a) -> float:
    return float(np.abs(a).max(initial=0.0))


# --- pointwise geometry in domain coordinates --------------------------------


def _geom(imm, u, h):
    """Df, ambient metric, left inverse, projectors and raw ``d^2 f + Gamma``."""
    chart = imm.ambient
    x = imm(u)
    Df = imm.jacobian(u, h)
    G = chart.metric(x)
    gind = Df.T @ G @ Df
    Dfp = np.linalg.solve(gind, Df.T @ G)
    P_T = Df @ Dfp
    P_N = np.eye(chart.dim) - P_T
    d2 = partials(lambda v: imm.jacobian(v, h), u, h)  # d2[a, :, b]
    Gam = christoffel(chart, x, h)
    Hraw = d2.transpose(0, 2, 1) + np.einsum("kij,ia,jb->abk", Gam, Df, Df)
    return {"x": x, "Df": Df, "G": G, "gind": gind, "Dfp": Dfp, "P_T": P_T,
            "P_N": P_N, "Hraw": Hraw, "Gamma": Gam}


def _induced_metric_fn(imm, h):
    def gind(v):
        Df = imm.jacobian(v, h)
        return Df.T @ imm.ambient.metric(imm(v)) @ Df
    return gind


def _J_dom_fn(imm, h, alpha=0):
    """Domain-coordinate matrix of ``P_T J_alpha`` restricted to ``TM``."""
    def J(v):
        Df = imm.jacobian(v, h)
        G = imm.ambient.metric(imm(v))
        Dfp = np.linalg.solve(Df.T @ G @ Df, Df.T @ G)
        return Dfp @ imm.ambient.J_fields(imm(v))[alpha] @ Df
    return J


def _omega_dom_fn(imm, h):
    def om(v):
        return connection_one_forms(imm.ambient, imm(v), h).omega @ imm.jacobian(v, h)
    return om


@dataclass(frozen=True)
class PointData:
    """Submanifold data at one domain point.

    Frame arrays: ``h[i, j]`` (ambient vector ``h(E_i, E_j)``), ``Jc``
    (matrix of ``J1`` on ``TM``), ``F[i, j] = g(J E_i, E_j)``,
    ``omega[a, i] = omega_{a+1}(E_i)``, ``psi``, ``C[i]`` (matrix of
    ``C_{E_i}``, or ``None``), ``shape[c]`` (matrix of ``A^{xi_c}``).
    """

    u: np.ndarray
    x: np.ndarray
    epsilon: int
    Df: np.ndarray
    G: np.ndarray
    E: np.ndarray
    mu: np.ndarray
    A: np.ndarray
    N: np.ndarray
    kappa: np.ndarray
    normal_kind: str
    P_T: np.ndarray
    P_N: np.ndarray
    Js: tuple
    h: np.ndarray
    h_dom: np.ndarray
    Jc: np.ndarray
    F: np.ndarray
    omega: np.ndarray
    omega_residual: float
    psi: np.ndarray
    C: Optional[np.ndarray]
    shape: np.ndarray
    residuals: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.E.shape[1]

    @property
    def g_ind(self) -> np.ndarray:
        return self.Df.T @ self.G @ self.Df

    @property
    def g_frame(self) -> np.ndarray:
        return np.diag(self.mu)

    @property
    def maximal(self) -> bool:
        return 2 * self.dim == self.G.shape[0]

    def to_frame(self, v):
        """Frame components of an ambient tangent vector."""
        return self.mu * (self.E.T @ self.G @ v)


def point_data(imm, u, h=DEFAULT_STEP, tol=1e-6) -> PointData:
    """Compute tangent/normal frames, ``h``, ``C``, ``F``, ``omega`` and ``psi`` at ``u``.

    Raises :class:`DegenerateSubspaceError` (with a witness) when the
    induced metric is degenerate and :class:`ImmersionError` when the
    differential loses rank.
    """
    u = np.asarray(u, dtype=float)
    chart = imm.ambient
    Df = imm.jacobian(u, h)
    m, d = Df.shape[1], Df.shape[0]
    if np.linalg.matrix_rank(Df, tol=1e-8) < m:
        raise ImmersionError(f"{imm.name}: differential loses rank at {u}", point=u)
    x = imm(u)
    G = chart.metric(x)
    E, mu = pseudo_orthonormalize(Df, G)
    geo = _geom(imm, u, h)
    P_T, P_N = geo["P_T"], geo["P_N"]
    A = np.linalg.solve(geo["gind"], Df.T @ G @ E)
    Js = tuple(chart.J_fields(x))
    J1, J2, J3 = Js

    res_ah = _rel(P_N @ J1 @ E, J1 @ E)
    res_tc = _max(E.T @ G @ J2 @ E)
    res_pq = max(_rel(P_N @ J2 @ E, J2 @ E), _rel(P_N @ J3 @ E, J3 @ E))

    if m == d:
        N, kappa, kind = np.zeros((d, 0)), np.zeros(0), "none"
    elif res_ah <= tol and res_tc <= tol:
        N1, k1 = J2 @ E, -mu
        rest = null_space(np.column_stack([E, N1]).T @ G)
        if rest.shape[1]:
            N2, k2 = pseudo_orthonormalize(rest, G)
            N, kappa = np.column_stack([N1, N2]), np.concatenate([k1, k2])
        else:
            N, kappa = N1, k1
        kind = "J2"
    else:
        N, kappa = pseudo_orthonormalize(null_space(E.T @ G), G)
        kind = "complement"

    h_dom = np.einsum("kl,abl->abk", P_N, geo["Hraw"])
    hf = np.einsum("abk,ai,bj->ijk", h_dom, A, A)
    shape = np.array([mu[:, None] * np.einsum("ijk,kl,l->ij", hf, G, N[:, c])
                      for c in range(N.shape[1])]).reshape(N.shape[1], m, m)
    Jc = mu[:, None] * (E.T @ G @ J1 @ E)
    F = (J1 @ E).T @ G @ E
    cf = connection_one_forms(chart, x, h)
    omega = cf.omega @ E
    psi = omega[2] @ Jc - omega[1]

    C = None
    res_ct = None
    if kind == "J2" and 2 * m == d:
        V = np.einsum("kl,ijl->ijk", J2, hf)
        coords = np.einsum("k,lk,lp,ijp->ijk", mu, E, G, V)
        C = coords.transpose(0, 2, 1)
        res_ct = _max(np.einsum("kl,ijl->ijk", P_N, V))

    residuals = {
        "almost_hermitian": res_ah,
        "totally_complex": res_tc,
        "para_quaternionic": res_pq,
        "totally_geodesic": _max(hf),
        "normality": _max(np.einsum("ijk,kl,lp->ijp", hf, G, E)),
        "h_symmetry": _max(hf - hf.transpose(1, 0, 2)),
    }
    if res_ct is not None:
        residuals["C_tangent"] = res_ct
    return PointData(
        u=u, x=x, epsilon=chart.epsilon, Df=Df, G=G, E=E, mu=mu, A=A, N=N,
        kappa=kappa, normal_kind=kind, P_T=P_T, P_N=P_N, Js=Js, h=hf, h_dom=h_dom,
        Jc=Jc, F=F, omega=omega, omega_residual=cf.residual, psi=psi, C=C,
        shape=shape, residuals=residuals,
    )


# --- Weingarten map from differentiating a normal field -----------------------


def weingarten_operator(imm, u, xi, h=DEFAULT_STEP, field_fn=None) -> np.ndarray:
    """Domain-coordinate matrix of ``A^xi`` from ``A^xi X = -(D_X eta)^T``.

    ``eta(v) = P_N(v) xi`` extends the normal vector ``xi`` (or
    ``P_N(v) field_fn(v)`` when a vector field is given), and ``D`` is the
    ambient Levi-Civita derivative.  Independent of the second fundamental
    form computation.
    """
    u = np.asarray(u, dtype=float)

    def eta(v):
        geo_Df = imm.jacobian(v, h)
        G = imm.ambient.metric(imm(v))
        P_T = geo_Df @ np.linalg.solve(geo_Df.T @ G @ geo_Df, geo_Df.T @ G)
        w = xi if field_fn is None else field_fn(v)
        return w - P_T @ w

    Df = imm.jacobian(u, h)
    x = imm(u)
    G = imm.ambient.metric(x)
    Dfp = np.linalg.solve(Df.T @ G @ Df, Df.T @ G)
    Gam = christoffel(imm.ambient, x, h)
    e0 = eta(u)
    deta = partials(eta, u, h)  # deta[a, k]
    cov = deta + np.einsum("kij,ia,j->ak", Gam, Df, e0)
    return -(Dfp @ cov.T)


def weingarten_residual(imm, u, h=DEFAULT_STEP, pd: PointData | None = None) -> float:
    """``max |<A^xi X, Y> - <h(X, Y), xi>|`` over frame normals and coordinate pairs."""
    pd = pd if pd is not None else point_data(imm, u, h)
    G, gind = pd.G, pd.g_ind
    out = 0.0
    for c in range(pd.N.shape[1]):
        xi = pd.N[:, c]
        Aop = weingarten_operator(imm, pd.u, xi, h)
        lhs = gind @ Aop  # lhs[b, a] = <A e_a, e_b>
        rhs = np.einsum("abk,kl,l->ab", pd.h_dom, G, xi)
        out = max(out, _max(lhs.T - rhs))
    return out


# --- Nijenhuis tensor and psi ---------------------------------------------------


def nijenhuis(imm, u, h=DEFAULT_STEP) -> np.ndarray:
    """``N[l, a, b]`` of ``J = J1|TM`` in domain coordinates.

    ``N(X, Y) = [JX, JY] - J[JX, Y] - J[X, JY] + eps [X, Y]`` evaluated on
    coordinate fields, with the derivative of the restricted ``J`` field by
    finite differences.
    """
    u = np.asarray(u, dtype=float)
    Jf = _J_dom_fn(imm, h)
    J = Jf(u)
    dJ = partials(Jf, u, h)  # dJ[k, l, b]
    return (
        np.einsum("ka,klb->lab", J, dJ)
        - np.einsum("kb,kla->lab", J, dJ)
        + np.einsum("lm,bma->lab", J, dJ)
        - np.einsum("lm,amb->lab", J, dJ)
    )


def psi_form(imm, u, h=DEFAULT_STEP) -> np.ndarray:
    """``psi = omega3 o J - omega2`` in domain coordinates."""
    u = np.asarray(u, dtype=float)
    om = _omega_dom_fn(imm, h)(u)
    J = _J_dom_fn(imm, h)(u)
    return om[2] @ J - om[1]


def nijenhuis_psi_residual(imm, u, h=DEFAULT_STEP) -> dict:
    """Compare ``N`` with ``-J2 {psi(X) Y + eps psi(JX) JY - psi(Y) X - eps psi(JY) JX}``.

    Both sides are pushed to ambient vectors.  Returns the max-abs residual
    and the size of ``N`` over coordinate pairs.
    """
    u = np.asarray(u, dtype=float)
    Df = imm.jacobian(u, h)
    x = imm(u)
    J1, J2, _ = imm.ambient.J_fields(x)
    eps = imm.ambient.epsilon
    Nt = np.einsum("kl,lab->kab", Df, nijenhuis(imm, u, h))
    psi = psi_form(imm, u, h)
    J = _J_dom_fn(imm, h)(u)
    psiJ = psi @ J  # psi(J e_a)
    JDf = J1 @ Df
    m = Df.shape[1]
    rhs = np.zeros_like(Nt)
    for a in range(m):
        for b in range(m):
            v = psi[a] * Df[:, b] + eps * psiJ[a] * JDf[:, b]
            v = v - psi[b] * Df[:, a] - eps * psiJ[b] * JDf[:, a]
            rhs[:, a, b] = -J2 @ v
    return {"residual": _max(Nt - rhs), "norm_N": _max(Nt), "norm_psi": _max(psi)}


# --- classification ------------------------------------------------------------


def predicate_residuals(imm, u, h=DEFAULT_STEP, tol=1e-6) -> dict:
    """All classification residuals at one point (frame-normalized)."""
    pd = point_data(imm, u, h, tol)
    r = {k: pd.residuals[k] for k in
         ("almost_hermitian", "totally_complex", "para_quaternionic", "totally_geodesic")}
    A = pd.A
    Ainv = np.linalg.inv(A)
    gind_fn = _induced_metric_fn(imm, h)
    Jf = _J_dom_fn(imm, h)
    nJ = covariant_derivative_field(gind_fn, Jf, "ud", pd.u, h=h)  # [c, l, b]
    r["kahler"] = _max(np.einsum("clb,ci,pl,bj->ipj", nJ, A, Ainv, A))
    r["k2"] = _max(pd.omega[1:])
    dF = d_two_form(lambda v: Jf(v).T @ gind_fn(v), pd.u, h)
    r["almost_kahler"] = _max(np.einsum("abc,ai,bj,ck->ijk", dF, A, A, A))
    Nn = nijenhuis(imm, pd.u, h)
    r["nijenhuis"] = _max(np.einsum("lab,pl,ai,bj->pij", Nn, Ainv, A, A))
    r["psi"] = _max(pd.psi)
    G = pd.G
    tbar, _ = invariant_subspace(pd.Df, imm.ambient.basis(pd.x), G)
    r["tbar_dim"] = int(tbar.shape[1])
    r["tbar_degenerate"] = bool(tbar.shape[1] and signature(tbar.T @ G @ tbar)[2])
    return r


@dataclass(frozen=True)
class ClassificationVerdict:
    """Per-point residuals, their maxima and the derived verdicts.

    ``verdicts`` maps predicate names to ``True``/``False``, or ``None``
    when not applicable (``J``-dependent predicates on non-``J1``-invariant
    submanifolds, or every predicate on the degenerate stratum).
    """

    residuals: dict
    aggregated: dict
    verdicts: dict
    tolerances: dict
    nu_hat: float
    degenerate_stratum: bool
    exclusivity_violation: bool

    def as_dict(self) -> dict:
        return {
            "residuals": self.residuals,
            "aggregated": self.aggregated,
            "verdicts": self.verdicts,
            "tolerances": self.tolerances,
            "nu_hat": self.nu_hat,
            "degenerate_stratum": self.degenerate_stratum,
            "exclusivity_violation": self.exclusivity_violation,
        }


_NUMERIC = ("almost_hermitian", "totally_complex", "para_quaternionic", "totally_geodesic",
            "kahler", "k2", "almost_kahler", "nijenhuis", "psi")


def ambient_nu(chart, x=None, h=DEFAULT_STEP) -> float:
    """Estimated reduced scalar curvature: gate mean, or an estimate at ``x``."""
    gate = chart.meta.get("gate")
    if gate:
        return float(np.mean(gate["nu_hat"]))
    if chart.meta.get("kind") == "flat":
        return 0.0
    return float(estimate_nu(curvature_fd(chart, x, h)))


def classify(imm, points, tolerances=None, h=DEFAULT_STEP) -> ClassificationVerdict:
    """Evaluate every classification predicate at ``points`` and aggregate.

    Verdicts compare the worst residual with its tolerance.  On ambients
    with nonzero ``nu`` a simultaneous epsilon-Kaehler and para-quaternionic
    pass is an internal inconsistency and is flagged in
    ``exclusivity_violation``.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0 or points.shape[1] == 0:
        raise ValueError("classify needs at least one valid point")
    per = {k: [] for k in _NUMERIC}
    degenerate = False
    for u in points:
        r = predicate_residuals(imm, u, h, tol["almost_hermitian"])
        for k in _NUMERIC:
            per[k].append(r[k])
        degenerate |= r["tbar_degenerate"]
    agg = {k: float(max(v)) for k, v in per.items()}
    nu = ambient_nu(imm.ambient, imm(points[0]), h)
    verdicts = {}
    if degenerate:
        verdicts = {k: None for k in
                    ("almost_hermitian", "kahler", "k2", "totally_complex", "para_quaternionic",
                     "totally_geodesic", "almost_kahler", "integrable")}
    else:
        ah = agg["almost_hermitian"] <= tol["almost_hermitian"]
        verdicts["almost_hermitian"] = ah
        for k in ("totally_complex", "para_quaternionic", "totally_geodesic"):
            verdicts[k] = agg[k] <= tol[k]
        for k in ("kahler", "k2", "almost_kahler"):
            verdicts[k] = (agg[k] <= tol[k]) if ah else None
        verdicts["integrable"] = (
            max(agg["nijenhuis"], agg["psi"]) <= tol["integrable"] if ah else None
        )
    excl = bool(
        abs(nu) > 1e-6 and verdicts.get("kahler") and verdicts.get("para_quaternionic")
    )
    return ClassificationVerdict(per, agg, verdicts, tol, nu, degenerate, excl)


# --- identities of epsilon-Kaehler submanifolds ------------------------------------


def fundamental_identity_residual(imm, u, h=DEFAULT_STEP, pd: PointData | None = None) -> dict:
    """Residuals of ``h(X, JY) = h(JX, Y) = J1 h(X, Y)`` and ``h(JX, JY) = eps h(X, Y)``."""
    pd = pd if pd is not None else point_data(imm, u, h)
    H, Jc, J1 = pd.h, pd.Jc, pd.Js[0]
    hXJY = np.einsum("ikl,kj->ijl", H, Jc)
    hJXY = np.einsum("kjl,ki->ijl", H, Jc)
    J1h = np.einsum("lk,ijk->ijl", J1, H)
    hJJ = np.einsum("klp,ki,lj->ijp", H, Jc, Jc)
    return {
        "h_XJY": _max(hXJY - J1h),
        "h_JXY": _max(hJXY - J1h),
        "h_JXJY": _max(hJJ - pd.epsilon * H),
    }


def _require_maximal(pd: PointData, what: str):
    if pd.C is None:
        raise ValueError(
            f"{what} needs a maximal totally epsilon-complex point "
            f"(dim {pd.dim}, normal frame {pd.normal_kind!r})"
        )


def shape_tensor_checks(imm, u, h=DEFAULT_STEP, pd: PointData | None = None) -> dict:
    """Residuals of the shape-tensor identities at a maximal point.

    Keys: ``symmetric`` (``C_X`` g-symmetric), ``weingarten`` (``C_X =
    -A^{J2 X}``, with ``A`` from :func:`weingarten_operator`),
    ``anticommute``, ``trace`` (``sum mu_i C_{E_i} E_i``), ``gC_symmetric``,
    ``gCJ_symmetric``, ``prolongation`` (``C_X Y = C_Y X``), ``minimal``
    (``tr_g h``) and ``AJ`` (``A J + J A`` over the normal frame).
    """
    pd = pd if pd is not None else point_data(imm, u, h)
    _require_maximal(pd, "shape_tensor_checks")
    C, Jc, mu = pd.C, pd.Jc, pd.mu
    g = pd.g_frame
    J2 = pd.Js[1]
    # C_X = -A^{J2 X}, A^{J2 E_i} from the Weingarten map of the J2-image field
    Ainv = np.linalg.inv(pd.A)
    wres = 0.0
    for i in range(pd.dim):
        Ei = pd.E[:, i]
        xi_field = _J2_image_field(imm, pd.u, Ei, h)
        Aop = weingarten_operator(imm, pd.u, None, h, field_fn=xi_field)
        Af = Ainv @ Aop @ pd.A
        wres = max(wres, _max(C[i] + Af))
    res = s_prolongation_residuals(C, g, Jc)
    gC = cubic_form(C, g)
    gCJ = np.einsum("li,ljk->ijk", Jc, gC)
    trace = sum(mu[i] * C[i][:, i] for i in range(pd.dim))
    minimal = sum(mu[i] * pd.h[i, i] for i in range(pd.dim))
    AJ = max((_max(S @ Jc + Jc @ S) for S in pd.shape), default=0.0)
    return {
        "symmetric": res["symmetric"],
        "weingarten": wres,
        "anticommute": res["anticommute"],
        "prolongation": res["prolongation"],
        "trace": _max(trace),
        "gC_symmetric": total_symmetry_residual(gC),
        "gCJ_symmetric": total_symmetry_residual(gCJ),
        "minimal": _max(minimal),
        "AJ": AJ,
        "C_tangent": pd.residuals.get("C_tangent", 0.0),
    }


def _J2_image_field(imm, u0, Ei, h):
    """Vector field ``v -> J2(v) P_T(v) Ei``: equals ``J2 Ei`` at ``u0``."""
    def field_fn(v):
        Df = imm.jacobian(v, h)
        G = imm.ambient.metric(imm(v))
        P_T = Df @ np.linalg.solve(Df.T @ G @ Df, Df.T @ G)
        return imm.ambient.J_fields(imm(v))[1] @ (P_T @ Ei)
    return field_fn


def shape_tensor_field(imm, h=DEFAULT_STEP):
    """``v -> C[a, l, b]``: domain-coordinate components of ``C_{d_a} d_b``."""
    def C_dom(v):
        geo = _geom(imm, v, h)
        J2 = imm.ambient.J_fields(geo["x"])[1]
        V = np.einsum("kl,lp,abp->abk", J2, geo["P_N"], geo["Hraw"])
        return np.einsum("lk,abk->alb", geo["Dfp"], V)
    return C_dom


def _P_tensor(imm, u, h):
    """``P[X, Y] = (nabla_X C)_Y + eps omega(X) J C_Y`` in domain coordinates."""
    gind_fn = _induced_metric_fn(imm, h)
    C_dom = shape_tensor_field(imm, h)
    nC = covariant_derivative_field(gind_fn, C_dom, "dud", u, h=h)  # [X, Y, l, b]
    om = _omega_dom_fn(imm, h)(u)[0]
    J = _J_dom_fn(imm, h)(u)
    C = C_dom(u)
    eps = imm.ambient.epsilon
    return nC + eps * np.einsum("x,lk,ykb->xylb", om, J, C), C, J, om


def _ambient_curvature(imm, x, h):
    return curvature_fd(imm.ambient, x, h)


def gcr_residuals(imm, u, h=DEFAULT_STEP) -> dict:
    """Gauss, Codazzi and Ricci equations at a maximal epsilon-Kaehler point.

    ``gauss``: ``R^TT_XY - R_XY - [C_X, C_Y]``; ``ricci``:
    ``J2 R^NN_XY J2 - R_XY - [C_X, C_Y] + eps domega(X, Y) J``; ``codazzi``:
    ``J2 R^NT_XY - (P_XY - P_YX)``.  ``R`` is the intrinsic curvature by
    finite differences of the induced metric; all residuals are max-abs in
    domain coordinates.
    """
    u = np.asarray(u, dtype=float)
    pd = point_data(imm, u, h)
    _require_maximal(pd, "gcr_residuals")
    geo = _geom(imm, u, h)
    Df, Dfp, P_N = geo["Df"], geo["Dfp"], geo["P_N"]
    J2 = pd.Js[1]
    Rt = _ambient_curvature(imm, geo["x"], h)
    Rint = curvature_fd(_induced_metric_fn(imm, h), u, h).op  # [a, b, l, k]
    P, C, J, om = _P_tensor(imm, u, h)
    dom = d_one_form(lambda v: _omega_dom_fn(imm, h)(v)[0], u, h)
    eps = imm.ambient.epsilon
    m = Df.shape[1]
    gauss = codazzi = ric = 0.0
    for a in range(m):
        for b in range(m):
            Rab = Rt(Df[:, a], Df[:, b])
            CC = C[a] @ C[b] - C[b] @ C[a]
            rtt = Dfp @ Rab @ Df
            gauss = max(gauss, _max(rtt - Rint[a, b] - CC))
            rnn = Dfp @ J2 @ P_N @ Rab @ J2 @ Df
            ric = max(ric, _max(rnn - Rint[a, b] - CC + eps * dom[a, b] * J))
            rnt = Dfp @ J2 @ P_N @ Rab @ Df
            codazzi = max(codazzi, _max(rnt - (P[a, b] - P[b, a])))
    return {"gauss": gauss, "codazzi": codazzi, "ricci": ric}


def ricci_check(imm, points, h=DEFAULT_STEP) -> dict:
    """Intrinsic Ricci tensor against its expressions through ``R^TT`` and ``C``.

    ``gauss_trace``: ``Ric_M - Ric(R^TT) - sum mu_i <C_{E_i} ., C_{E_i} .>``.
    ``space_form``: ``Ric_M - (nu/2)(n+1) g - sum mu_i <C_{E_i} ., C_{E_i} .>``
    with the estimated ``nu`` of the ambient (meaningful on space forms).
    Residuals are per point, max-abs in the frame.
    """
    out = {"gauss_trace": [], "space_form": []}
    for u in np.atleast_2d(points):
        pd = point_data(imm, u, h)
        _require_maximal(pd, "ricci_check")
        Ric_dom = ricci(curvature_fd(_induced_metric_fn(imm, h), pd.u, h))
        Ric = pd.A.T @ Ric_dom @ pd.A
        Rt = _ambient_curvature(imm, pd.x, h)
        m = pd.dim
        RTT = np.array([[pd.mu[:, None] * (pd.E.T @ pd.G @ Rt(pd.E[:, i], pd.E[:, j]) @ pd.E)
                         for j in range(m)] for i in range(m)])
        ric_tt = np.einsum("ijik->jk", RTT)
        g = pd.g_frame
        cc = sum(pd.mu[i] * pd.C[i].T @ g @ pd.C[i] for i in range(m))
        nu = ambient_nu(imm.ambient, pd.x, h)
        n = imm.ambient.n
        out["gauss_trace"].append(_max(Ric - ric_tt - cc))
        out["space_form"].append(_max(Ric - 0.5 * nu * (n + 1) * g - cc))
    return out


def domega_check(imm, points, h=DEFAULT_STEP) -> list:
    """Per-point ``max |domega - nu_hat F|`` in the frame, ``omega = omega1|TM``."""
    out = []
    for u in np.atleast_2d(points):
        pd = point_data(imm, u, h)
        dom = d_one_form(lambda v: _omega_dom_fn(imm, h)(v)[0], pd.u, h)
        nu = ambient_nu(imm.ambient, pd.x, h)
        out.append(_max(pd.A.T @ dom @ pd.A - nu * pd.F))
    return out


def wedge_residual_from_forms(F2, F3, w2, w3, epsilon, form="closed") -> float:
    """3-form residual between ``F2 ^ w3`` and ``s eps F3 ^ w2``.

    ``form="closed"`` uses ``s = -1``: then the difference equals
    ``-dF1`` on restricted data, so it vanishes exactly when the Kaehler
    form is closed.  ``form="printed"`` uses ``s = +1``, the variant whose
    zero set is ``omega3 = eps omega2 o J``.
    """
    if form not in ("closed", "printed"):
        raise ValueError(f"unknown form {form!r}")
    s = -1.0 if form == "closed" else 1.0
    return _max(wedge21(F2, w3) - s * epsilon * wedge21(F3, w2))


def almost_kahler_wedge_residual(imm, u, h=DEFAULT_STEP, form="closed",
                                 pd: PointData | None = None) -> float:
    """Wedge residual of the restricted forms ``F_a^T``, ``omega_a^T`` in the frame."""
    pd = pd if pd is not None else point_data(imm, u, h)
    _, J2, J3 = pd.Js
    F2 = (J2 @ pd.E).T @ pd.G @ pd.E
    F3 = (J3 @ pd.E).T @ pd.G @ pd.E
    return wedge_residual_from_forms(F2, F3, pd.omega[1], pd.omega[2], pd.epsilon, form)


def kahler_form_differential_residual(imm, u, h=DEFAULT_STEP) -> dict:
    """Compare ``dF1`` on ``M`` with ``-(F2 ^ omega3 + eps F3 ^ omega2)``.

    Returns the residual and ``|dF1|`` (both frame max-abs).  The identity
    holds on any submanifold; it makes ``dF1 = 0`` equivalent to the
    ``"closed"`` wedge condition.
    """
    pd = point_data(imm, u, h)
    gind_fn = _induced_metric_fn(imm, h)
    Jf = _J_dom_fn(imm, h)
    dF = d_two_form(lambda v: Jf(v).T @ gind_fn(v), pd.u, h)
    dFf = np.einsum("abc,ai,bj,ck->ijk", dF, pd.A, pd.A, pd.A)
    _, J2, J3 = pd.Js
    F2 = (J2 @ pd.E).T @ pd.G @ pd.E
    F3 = (J3 @ pd.E).T @ pd.G @ pd.E
    W = wedge21(F2, pd.omega[2]) + pd.epsilon * wedge21(F3, pd.omega[1])
    return {"residual": _max(dFf + W), "dF": _max(dFf)}


# --- cubic forms -------------------------------------------------------------------


def cubic_forms(imm, u, h=DEFAULT_STEP, pd: PointData | None = None):
    """Pure-type parts of ``gC`` at a maximal point (frame components)."""
    pd = pd if pd is not None else point_data(imm, u, h)
    _require_maximal(pd, "cubic_forms")
    return decompose_S_prolongation(pd.C, pd.g_frame, pd.Jc, pd.epsilon)


def cubic_transform_check(C, g, Jc, epsilon, thetas) -> dict:
    """Check how the cubic-form parts change under a frame rotation fixing ``J1``.

    ``C' = cos(t) C + sin(t) J C`` (hyperbolic functions when epsilon=+1)
    must give ``q' = (cos t - i sin t) q`` (and the conjugate), or
    ``q+' = (cosh t - sinh t) q+`` and ``q-' = (cosh t + sinh t) q-``.
    Returns the worst residuals and the modulus drift for epsilon=-1.
    """
    C = np.asarray(C, dtype=float)
    base = decompose_S_prolongation(C, g, Jc, epsilon)
    JC = np.einsum("kl,ilj->ikj", Jc, C)
    plus_res = minus_res = modulus = 0.0
    for t in np.atleast_1d(thetas):
        if epsilon == -1:
            c, s = np.cos(t), np.sin(t)
            fp, fm = c - 1j * s, c + 1j * s
        else:
            c, s = np.cosh(t), np.sinh(t)
            fp, fm = c - s, c + s
        new = decompose_S_prolongation(c * C + s * JC, g, Jc, epsilon)
        plus_res = max(plus_res, _max(new.plus - fp * base.plus))
        minus_res = max(minus_res, _max(new.minus - fm * base.minus))
        if epsilon == -1:
            modulus = max(modulus, abs(np.linalg.norm(new.plus) - np.linalg.norm(base.plus)))
    return {"plus": plus_res, "minus": minus_res, "modulus": modulus}


def parallelism_residual(imm, u, X=None, h=DEFAULT_STEP) -> float:
    """``max_Y |(nabla_X C)_Y + eps omega(X) J C_Y|`` (all coordinate X if omitted)."""
    u = np.asarray(u, dtype=float)
    P, *_ = _P_tensor(imm, u, h)
    if X is None:
        return _max(P)
    return _max(np.einsum("x,xylb->ylb", np.asarray(X, dtype=float), P))


def cubic_parallel_residual(imm, u, h=DEFAULT_STEP) -> float:
    """Residual of ``nabla q = -i omega q`` (eps=-1) or ``nabla q+ = omega q+`` (eps=+1).

    Only meaningful where the submanifold is parallel with ``h != 0``.
    Domain-coordinate components.
    """
    u = np.asarray(u, dtype=float)
    eps = imm.ambient.epsilon
    gind_fn = _induced_metric_fn(imm, h)
    C_dom = shape_tensor_field(imm, h)
    Jf = _J_dom_fn(imm, h)

    def q_field(v):
        J = Jf(v)
        eye = np.eye(J.shape[0])
        P = 0.5 * (eye - 1j * J) if eps == -1 else 0.5 * (eye + J)
        gC = np.einsum("alb,lk->abk", C_dom(v), gind_fn(v))
        return np.einsum("abc,ai,bj,ck->ijk", gC, P, P, P)

    nq = covariant_derivative_field(gind_fn, q_field, "ddd", u, h=h)
    om = _omega_dom_fn(imm, h)(u)[0]
    q = q_field(u)
    factor = -1j if eps == -1 else 1.0
    return _max(nq - factor * np.einsum("x,ijk->xijk", om, q))


def cc_parallel_residual(imm, u, h=DEFAULT_STEP) -> float:
    """``max |nabla [C, C]|`` in domain coordinates (local-symmetry test on space forms)."""
    C_dom = shape_tensor_field(imm, h)

    def cc(v):
        C = C_dom(v)
        return np.einsum("alk,bkj->ablj", C, C) - np.einsum("blk,akj->ablj", C, C)

    return _max(covariant_derivative_field(_induced_metric_fn(imm, h), cc, "ddud",
                                           np.asarray(u, dtype=float), h=h))
