"""Model charts and immersions: flat space, the projective chart, slices and graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import SPLIT_METRIC, left_matrix, sq_mul_array, sq_norm_array
from .calculus import DEFAULT_STEP, Chart, curvature_fd, estimate_nu, partials
from .curvature import r0_eval, ricci, scal
from .exceptions import ChartValidationError, ImmersionError
from .linear import make_standard_basis, rotation_matrix, signature, tilt_matrix

__all__ = [
    "GATE_TOL",
    "Immersion",
    "flat_space",
    "projective_chart",
    "validate_chart",
    "sample_points",
    "embed_epsilon_complex_slice",
    "embed_pq_slice",
    "embed_graph",
    "Potential",
    "GRAPH_CONVENTIONS",
]

GATE_TOL = 1e-3
_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


def sample_points(dim: int, count: int, seed: int = 0, radius: float = 0.3) -> np.ndarray:
    """Seeded points uniformly distributed in the ball of given radius."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(count, 1)) ** (1.0 / dim)
    return v * r


def _unit_indices(epsilon):
    """Coordinate slots of the epsilon-complex unit and of the graph unit."""
    return (1, 2) if epsilon == -1 else (2, 3)


def flat_space(n: int, epsilon: int = -1, twist: float = 0.0, tilt: float = 0.0) -> Chart:
    """Flat model of split-quaternionic dimension ``n``.

    ``twist`` rotates the adapted basis about ``J1`` by the angle
    ``twist * sum(x)``; ``tilt`` then mixes ``J1`` and ``J2`` by
    ``tilt * sum((-1)^i x_i)``.  The structure ``Q`` is unchanged but the
    connection one-forms no longer vanish, and with ``tilt`` the field
    ``J1`` varies.
    """
    space, basis = make_standard_basis(n, epsilon)
    g = space.g
    stack = np.stack(basis.Js)
    signs = (-1.0) ** np.arange(4 * n)

    if twist == 0.0 and tilt == 0.0:
        def J_fields(x):
            return stack
    else:
        def J_fields(x):
            M = tilt_matrix(tilt * float(signs @ x), epsilon) @ rotation_matrix(
                twist * float(np.sum(x)), epsilon
            )
            return np.einsum("ab,aij->bij", M, stack)

    extra = "".join(f", {k}={v:g}" for k, v in (("twist", twist), ("tilt", tilt)) if v)
    return Chart(
        dim=4 * n,
        metric=lambda x: g,
        J_fields=J_fields,
        eps=basis.eps,
        nu=0.0,
        name=f"flat(n={n}, eps={epsilon:+d}{extra})",
        meta={"kind": "flat", "n": n, "epsilon": epsilon, "twist": twist, "tilt": tilt},
    )


def _projective_metric(n: int, c: float):
    G0 = np.kron(np.eye(n), SPLIT_METRIC)

    def metric(x):
        q = np.asarray(x, dtype=float).reshape(n, 4)
        lam = 1.0 + c * float(np.sum(sq_norm_array(q)))
        # S maps a tangent vector Y to sum_i conj(q_i) Y_i
        S = np.hstack([left_matrix(qi * _CONJ) for qi in q])
        M = S.T @ SPLIT_METRIC @ S
        return G0 / lam - c * M / lam**2

    def lam(x):
        q = np.asarray(x, dtype=float).reshape(n, 4)
        return 1.0 + c * float(np.sum(sq_norm_array(q)))

    return metric, lam


def validate_chart(chart: Chart, points, h=DEFAULT_STEP, tol=GATE_TOL) -> dict:
    """Curvature gate: ``R_fd`` must be ``nu_hat R0`` and Einstein at every point.

    Returns ``{"nu_hat": [...], "rel": [...], "einstein": [...]}``; raises
    :class:`ChartValidationError` if any value exceeds ``tol``.
    """
    out = {"nu_hat": [], "rel": [], "einstein": []}
    for x in np.atleast_2d(points):
        R = curvature_fd(chart, x, h)
        nu = estimate_nu(R)
        R0 = r0_eval(chart.basis(x), R.g, nu)
        rel = (R - R0).norm() / max(R.norm(), 1e-300)
        g = R.g
        ein = float(np.abs(ricci(R) - scal(R) / chart.dim * g).max())
        out["nu_hat"].append(float(nu))
        out["rel"].append(float(rel))
        out["einstein"].append(ein)
    bad = max(out["rel"]) > tol or max(out["einstein"]) > tol
    spread = np.ptp(out["nu_hat"]) / max(abs(np.mean(out["nu_hat"])), 1e-300)
    out["nu_spread"] = float(spread)
    if bad or spread > tol:
        raise ChartValidationError(
            f"{chart.name}: curvature gate failed "
            f"(max rel {max(out['rel']):.3e}, Einstein {max(out['einstein']):.3e}, "
            f"nu spread {spread:.3e})",
            gate=out,
        )
    return out


def projective_chart(
    n: int,
    epsilon: int = -1,
    scale: float = 1.0,
    gate_points: int = 5,
    seed: int = 0,
    radius: float = 0.3,
    h: float = DEFAULT_STEP,
) -> Chart:
    """Affine chart of the para-quaternionic projective space.

    ``g = G0 / lam - scale * M / lam^2`` with ``lam = 1 + scale * sum N(q_i)``
    and ``M(X, Y) = Re(conj(<q, X>) <q, Y>)``.  A negative ``scale`` gives the
    dual space of negative ``nu``.  The chart must pass
    :func:`validate_chart` at ``gate_points`` seeded points before it is
    returned; the gate record is stored in ``chart.meta["gate"]``.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if scale == 0.0:
        raise ValueError("scale must be nonzero; use flat_space for the flat model")
    if gate_points < 5:
        raise ValueError("the validation gate needs at least 5 points")
    n = int(n)
    _, basis = make_standard_basis(n, epsilon)
    stack = np.stack(basis.Js)
    metric, lam = _projective_metric(n, float(scale))
    pts = sample_points(4 * n, gate_points, seed, radius)
    for p in pts:
        if abs(lam(p)) < 1e-6:
            raise ValueError(f"chart singularity at sample point {p}")
    chart = Chart(
        dim=4 * n,
        metric=metric,
        J_fields=lambda x: stack,
        eps=basis.eps,
        nu=4.0 * scale,
        name=f"projective(n={n}, eps={epsilon:+d}, scale={scale:g})",
        domain_radius=np.inf if scale > 0 else 0.95 / np.sqrt(abs(scale)),
        singularity=lam,
        meta={"kind": "projective", "n": n, "epsilon": epsilon, "scale": scale},
    )
    gate = validate_chart(chart, pts, h)
    chart.meta["gate"] = gate
    return chart


@dataclass(frozen=True)
class Immersion:
    """Smooth map from an open set of ``R^domain_dim`` into chart coordinates."""

    map: Callable
    domain_dim: int
    ambient: Chart
    name: str = "immersion"
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, u) -> np.ndarray:
        return self.map(np.asarray(u, dtype=float))

    def jacobian(self, u, h=DEFAULT_STEP) -> np.ndarray:
        """``Df`` as a ``(dim, domain_dim)`` matrix."""
        return partials(self.map, np.asarray(u, dtype=float), h).T

    def check(self, u, h=DEFAULT_STEP) -> None:
        """Full rank and nondegenerate induced metric at ``u``."""
        u = np.asarray(u, dtype=float)
        Df = self.jacobian(u, h)
        if np.linalg.matrix_rank(Df, tol=1e-8) < self.domain_dim:
            raise ImmersionError(f"{self.name}: differential loses rank at {u}", point=u)
        g = self.ambient.metric(self(u))
        G = Df.T @ g @ Df
        if signature(G, scale=np.linalg.norm(Df, 2) ** 2 * np.abs(g).max())[2]:
            raise ImmersionError(f"{self.name}: induced metric degenerate at {u}", point=u)

    def sample_points(self, count: int, seed: int = 0, radius: float = 0.3) -> np.ndarray:
        pts = sample_points(self.domain_dim, count, seed, radius)
        for u in pts:
            self.check(u)
        return pts


def embed_epsilon_complex_slice(k: int, ambient: Chart, epsilon: int | None = None) -> Immersion:
    """First ``k`` slots epsilon-complex (``x + y I`` or ``x + y J``), the rest zero.

    Domain coordinates are ``(x_1, y_1, ..., x_k, y_k)``.  The image is
    ``J1``-invariant; in the projective chart it is the affine part of the
    corresponding (para-)complex projective subspace.
    """
    epsilon = ambient.epsilon if epsilon is None else epsilon
    if epsilon != ambient.epsilon:
        raise ValueError("slice type must match the ambient's J1 type")
    n = ambient.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n={n}, got k={k}")
    unit, _ = _unit_indices(epsilon)

    def f(u):
        q = np.zeros((n, 4))
        z = u.reshape(k, 2)
        q[:k, 0] = z[:, 0]
        q[:k, unit] = z[:, 1]
        return q.ravel()

    return Immersion(f, 2 * k, ambient, f"eps-complex slice k={k}", {"kind": "slice", "k": k})


def embed_pq_slice(k: int, ambient: Chart) -> Immersion:
    """First ``k`` split-quaternionic slots free, the rest zero."""
    n = ambient.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n={n}, got k={k}")

    def f(u):
        q = np.zeros((n, 4))
        q[:k] = u.reshape(k, 4)
        return q.ravel()

    return Immersion(f, 4 * k, ambient, f"pq slice k={k}", {"kind": "pq_slice", "k": k})


@dataclass(frozen=True)
class Potential:
    """Polynomial ``F(z) = sum c_t z^p_t`` in ``n`` epsilon-complex variables.

    ``terms`` is a sequence of ``(coeff, powers)`` with ``coeff = (re, im)``
    and ``powers`` a length-``n`` tuple of nonnegative integers.
    """

    terms: Sequence
    n: int
    epsilon: int = -1

    def gradient(self, z) -> np.ndarray:
        """``dF/dz_i`` as an ``(n, 2)`` array of (re, im) pairs; ``z`` is ``(n, 2)``."""
        e = self.epsilon
        out = np.zeros((self.n, 2))
        for coeff, powers in self.terms:
            powers = tuple(int(p) for p in powers)
            if len(powers) != self.n or min(powers) < 0:
                raise ValueError(f"bad powers {powers} for n={self.n}")
            for i in range(self.n):
                if powers[i] == 0:
                    continue
                val = (powers[i] * float(coeff[0]), powers[i] * float(coeff[1]))
                for j in range(self.n):
                    p = powers[j] - (1 if j == i else 0)
                    for _ in range(p):
                        val = _ec_mul(val, z[j], e)
                out[i] += val
        return out


def _ec_mul(a, b, e):
    return (a[0] * b[0] + e * a[1] * b[1], a[0] * b[1] + a[1] * b[0])


# (name, antiholomorphic, placement)
GRAPH_CONVENTIONS = (
    ("right-antiholomorphic", True, "right"),
    ("left-holomorphic", False, "left"),
    ("right-holomorphic", False, "right"),
    ("left-antiholomorphic", True, "left"),
)


def _graph_map(potential: Potential, n: int, epsilon: int, anti: bool, placement: str):
    unit, gunit = _unit_indices(epsilon)
    U = np.zeros(4)
    U[gunit] = 1.0

    def f(u):
        z = u.reshape(n, 2)
        w = potential.gradient(z)
        if anti:
            w = w * np.array([1.0, -1.0])
        wq = np.zeros((n, 4))
        wq[:, 0] = w[:, 0]
        wq[:, unit] = w[:, 1]
        wq = sq_mul_array(wq, U) if placement == "right" else sq_mul_array(U, wq)
        wq[:, 0] += z[:, 0]
        wq[:, unit] += z[:, 1]
        return wq.ravel()

    return f


def _j1_invariance(imm: Immersion, u) -> float:
    Df = imm.jacobian(u)
    J1 = imm.ambient.J_fields(imm(u))[0]
    Q, _ = np.linalg.qr(Df)
    V = J1 @ Df
    return float(np.linalg.norm(V - Q @ (Q.T @ V)) / max(np.linalg.norm(V), 1e-300))


def embed_graph(
    potential: Potential,
    ambient: Chart,
    epsilon: int | None = None,
    points=None,
    tol: float = 1e-6,
) -> Immersion:
    """Graph ``z -> z + w(z) U`` over the maximal epsilon-complex slice of flat space.

    ``w`` is built from the gradient of ``potential`` and ``U`` is the unit
    of ``J2`` (``J`` or ``K``).  Whether ``w`` is the gradient or its
    conjugate, and whether ``U`` multiplies on the left or right, is decided
    by testing all four conventions for ``J1``-invariance of the tangent
    spaces at ``points``.  The first passing convention (in
    :data:`GRAPH_CONVENTIONS` order) is used and recorded in
    ``meta["convention"]`` together with the full list of passing ones.
    """
    if ambient.meta.get("kind") != "flat":
        raise ValueError("graph immersions require a flat ambient")
    epsilon = ambient.epsilon if epsilon is None else epsilon
    if epsilon != ambient.epsilon:
        raise ValueError("graph type must match the ambient's J1 type")
    n = ambient.n
    if potential.n != n or potential.epsilon != epsilon:
        raise ValueError("potential must have n and epsilon matching the ambient")
    if points is None:
        points = sample_points(2 * n, 5, seed=12345, radius=0.3)
    results, offenders = {}, {}
    for name, anti, placement in GRAPH_CONVENTIONS:
        imm = Immersion(_graph_map(potential, n, epsilon, anti, placement), 2 * n, ambient)
        res = [_j1_invariance(imm, u) for u in points]
        results[name] = max(res)
        offenders[name] = points[int(np.argmax(res))]
    passing = [name for name, *_ in GRAPH_CONVENTIONS if results[name] <= tol]
    if not passing:
        best = min(results, key=results.get)
        raise ImmersionError(
            f"no graph convention gives J1-invariant tangent spaces: {results}",
            point=offenders[best],
        )
    name = passing[0]
    _, anti, placement = next(c for c in GRAPH_CONVENTIONS if c[0] == name)
    return Immersion(
        _graph_map(potential, n, epsilon, anti, placement),
        2 * n,
        ambient,
        f"graph ({name})",
        {"kind": "graph", "convention": name, "passing": passing, "j1_residuals": results},
    )
