"""Algebraic curvature tensors of the model spaces and pointwise identities.

Sign convention: ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y]`` and the
bivector ``X ^ Y`` acts as ``Z -> <Y, Z> X - <X, Z> Y``; the round sphere
then has ``g(R(X, Y) Y, X) > 0``.

A :class:`CurvatureTensor` stores the operator view ``op[a, b] = R(e_a, e_b)``
as a ``(d, d, d, d)`` array, so ``(R(X, Y) Z)^m = X^a Y^b op[a, b, m, k] Z^k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linear import AdaptedBasis

__all__ = [
    "CurvatureTensor",
    "wedge",
    "r0_operator",
    "r0_eval",
    "r_cpn_eval",
    "kahler_forms",
    "q_invariance_residual",
    "ricci",
    "scal",
    "SpaceFormBlocks",
    "tangent_projector",
    "space_form_blocks",
    "normal_block_residual",
    "parallel_rtt_residual",
    "cc_bracket",
    "cc_tensor",
    "cc_properties",
]


@dataclass(frozen=True)
class CurvatureTensor:
    """Dense curvature tensor with its metric."""

    op: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "op", np.asarray(self.op, dtype=float))
        object.__setattr__(self, "g", np.asarray(self.g, dtype=float))

    @classmethod
    def from_operator(cls, fn, g) -> "CurvatureTensor":
        """Build from a bilinear map ``(X, Y) -> R(X, Y)`` (a matrix)."""
        g = np.asarray(g, dtype=float)
        d = g.shape[0]
        eye = np.eye(d)
        op = np.array([[fn(eye[a], eye[b]) for b in range(d)] for a in range(d)])
        return cls(op, g)

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    def __call__(self, X, Y) -> np.ndarray:
        return np.einsum("a,b,abmk->mk", X, Y, self.op)

    def covariant(self) -> np.ndarray:
        """``R(X, Y, Z, W) = g(R(X, Y) Z, W)`` indexed ``[X, Y, Z, W]``."""
        return np.einsum("abmk,ml->abkl", self.op, self.g)

    def __add__(self, other):
        return CurvatureTensor(self.op + other.op, self.g)

    def __sub__(self, other):
        return CurvatureTensor(self.op - other.op, self.g)

    def __mul__(self, s):
        return CurvatureTensor(float(s) * self.op, self.g)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.op))

    def symmetry_residuals(self) -> dict:
        """Max-abs violations of the four algebraic curvature symmetries."""
        cov = self.covariant()
        op = self.op
        bianchi = (
            np.einsum("abmc->abcm", op)
            + np.einsum("bcma->abcm", op)
            + np.einsum("camb->abcm", op)
        )
        return {
            "antisym_xy": float(np.abs(cov + cov.transpose(1, 0, 2, 3)).max()),
            "antisym_zw": float(np.abs(cov + cov.transpose(0, 1, 3, 2)).max()),
            "pair": float(np.abs(cov - cov.transpose(2, 3, 0, 1)).max()),
            "bianchi": float(np.abs(bianchi).max()),
        }


def wedge(X, Y, g) -> np.ndarray:
    """Matrix of ``Z -> <Y, Z> X - <X, Z> Y``."""
    return np.outer(X, g @ Y) - np.outer(Y, g @ X)


def r0_operator(X, Y, basis: AdaptedBasis, g) -> np.ndarray:
    """Projective-model curvature operator ``R0(X, Y)`` (reduced scalar curvature 1)."""
    g = np.asarray(g, dtype=float)
    out = 0.25 * wedge(X, Y, g)
    for e, J in zip(basis.eps, basis.Js):
        JX = J @ X
        out = out + 0.5 * e * (JX @ g @ Y) * J - 0.25 * e * wedge(JX, J @ Y, g)
    return out


def r0_eval(basis: AdaptedBasis, g, nu: float = 1.0) -> CurvatureTensor:
    """``nu * R0`` as a :class:`CurvatureTensor`."""
    R = CurvatureTensor.from_operator(lambda X, Y: r0_operator(X, Y, basis, g), g)
    return R * nu


def r_cpn_eval(J, g, epsilon: int) -> CurvatureTensor:
    """Epsilon-complex projective curvature, holomorphic curvature 1.

    ``R(X, Y) = (-eps X^Y + JX^JY - 2 <JX, Y> J) / 4``.
    """
    J = np.asarray(J, dtype=float)
    g = np.asarray(g, dtype=float)

    def fn(X, Y):
        JX = J @ X
        return 0.25 * (-epsilon * wedge(X, Y, g) + wedge(JX, J @ Y, g) - 2.0 * (JX @ g @ Y) * J)

    return CurvatureTensor.from_operator(fn, g)


def kahler_forms(basis: AdaptedBasis, g):
    """Matrices of ``F_a(X, Y) = g(J_a X, Y)``, so ``F_a(X, Y) = X @ F[a] @ Y``."""
    return tuple(J.T @ np.asarray(g, dtype=float) for J in basis.Js)


_CYCLES = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def q_invariance_rhs(basis: AdaptedBasis, g, nu, X, Y, alpha: int) -> np.ndarray:
    """Right side of the Q-invariance identity for ``[R(X, Y), J_alpha]``."""
    a, b, c = _CYCLES[alpha]
    eps = basis.eps
    F = kahler_forms(basis, g)
    Fp = [-eps[i] * (X @ F[i] @ Y) for i in range(3)]
    Js = basis.Js
    return eps[2] * nu * (-eps[b] * Fp[c] * Js[b] + eps[c] * Fp[b] * Js[c])


def q_invariance_residual(R, basis: AdaptedBasis, g, nu, X, Y, alpha: int) -> float:
    """Frobenius norm of ``[R(X, Y), J_alpha]`` minus its closed form.

    ``R`` is a :class:`CurvatureTensor` (closed-form or finite-difference);
    ``alpha`` is 0, 1 or 2.
    """
    M = R(X, Y)
    J = basis.Js[alpha]
    lhs = M @ J - J @ M
    return float(np.linalg.norm(lhs - q_invariance_rhs(basis, g, nu, X, Y, alpha)))


def ricci(R: CurvatureTensor) -> np.ndarray:
    """``Ric(X, Y) = tr(Z -> R(Z, X) Y)``."""
    return np.einsum("abak->bk", R.op)


def scal(R: CurvatureTensor) -> float:
    return float(np.trace(np.linalg.solve(R.g, ricci(R))))


# --- blocks along a totally epsilon-complex subspace ------------------------


def tangent_projector(T, g) -> np.ndarray:
    """g-orthogonal projector onto ``span(T)`` (``T`` nondegenerate)."""
    g = np.asarray(g, dtype=float)
    return T @ np.linalg.solve(T.T @ g @ T, T.T @ g)


@dataclass(frozen=True)
class SpaceFormBlocks:
    """Block decomposition of ``nu R0`` along ``T (+) J2 T``.

    ``tt``, ``nn`` and ``nt`` are callables ``(X, Y) -> matrix`` giving the
    ambient-sized operators ``P_T R(X, Y) P_T``, ``P_N R(X, Y) P_N`` and
    ``P_N R(X, Y) P_T`` for tangent ``X, Y``.  ``tt_closed`` and
    ``nn_closed`` are the closed forms projected the same way.
    """

    T: np.ndarray
    P_T: np.ndarray
    P_N: np.ndarray
    nu: float
    epsilon: int
    R: CurvatureTensor
    basis: AdaptedBasis

    def tt(self, X, Y):
        return self.P_T @ self.R(X, Y) @ self.P_T

    def nn(self, X, Y):
        return self.P_N @ self.R(X, Y) @ self.P_N

    def nt(self, X, Y):
        return self.P_N @ self.R(X, Y) @ self.P_T

    def tn(self, X, Y):
        return self.P_T @ self.R(X, Y) @ self.P_N

    def tt_closed(self, X, Y):
        g, J1, e, nu = self.R.g, self.basis.J1, self.epsilon, self.nu
        J1X = J1 @ X
        M = e * nu / 4.0 * (
            e * wedge(X, Y, g) - wedge(J1X, J1 @ Y, g) + 2.0 * (J1X @ g @ Y) * J1
        )
        return self.P_T @ M @ self.P_T

    def nn_closed(self, X, Y):
        g, e, nu = self.R.g, self.epsilon, self.nu
        J1, J2, J3 = self.basis.Js
        M = nu / 4.0 * (
            -wedge(J2 @ X, J2 @ Y, g)
            + e * wedge(J3 @ X, J3 @ Y, g)
            + 2.0 * e * ((J1 @ X) @ g @ Y) * J1
        )
        return self.P_N @ M @ self.P_N

    def r_tt_tensor(self) -> CurvatureTensor:
        """``R^TT`` as a curvature tensor on ``T`` in the coordinates of ``T``."""
        return restrict_to(self.T, self.R.g, self.tt)

    def residuals(self, X, Y) -> dict:
        return {
            "tt_closed": float(np.abs(self.tt(X, Y) - self.tt_closed(X, Y)).max()),
            "nn_closed": float(np.abs(self.nn(X, Y) - self.nn_closed(X, Y)).max()),
            "nt_zero": float(np.abs(self.nt(X, Y)).max()),
            "tn_zero": float(np.abs(self.tn(X, Y)).max()),
        }


def restrict_to(T, g, fn) -> CurvatureTensor:
    """Curvature-type tensor on ``span(T)`` from ambient operators ``fn(X, Y)``."""
    g = np.asarray(g, dtype=float)
    gT = T.T @ g @ T
    left = np.linalg.solve(gT, T.T @ g)
    k = T.shape[1]
    op = np.array([[left @ fn(T[:, a], T[:, b]) @ T for b in range(k)] for a in range(k)])
    return CurvatureTensor(op, gT)


def space_form_blocks(basis: AdaptedBasis, g, nu: float, T) -> SpaceFormBlocks:
    """Blocks of ``nu R0`` along a totally epsilon-complex subspace ``span(T)``.

    ``T`` must be ``J1``-invariant with ``J2 T`` g-orthogonal to ``T``;
    the normal space is ``J2 T``.
    """
    g = np.asarray(g, dtype=float)
    T = np.asarray(T, dtype=float)
    P_T = tangent_projector(T, g)
    P_N = tangent_projector(basis.J2 @ T, g)
    return SpaceFormBlocks(T, P_T, P_N, float(nu), basis.epsilon, r0_eval(basis, g, nu), basis)


def normal_block_residual(blocks: SpaceFormBlocks, X, Y) -> float:
    """Residual of ``R^perpperp = J2 R^TT J2 + eps nu F(X, Y) J1`` on the normal space."""
    g = blocks.R.g
    J1, J2, _ = blocks.basis.Js
    F = (J1 @ X) @ g @ Y
    rhs = J2 @ blocks.tt(X, Y) @ J2 + blocks.epsilon * blocks.nu * F * J1
    rhs = blocks.P_N @ rhs @ blocks.P_N
    return float(np.linalg.norm(blocks.nn(X, Y) - rhs))


def parallel_rtt_residual(blocks: SpaceFormBlocks, C_X, X, Y, Z, form: str = "commutator") -> float:
    """Residual of the parallel-``R^TT`` identity for one shape endomorphism.

    ``C_X`` is the ambient-sized matrix of ``C_X`` on ``T`` (zero on the
    normal space).  Checks

    ``[C_X, R^TT(Y, Z)] + nu eps F(Y, Z) J1 C_X
    = [J2 (R(J2 C_X Y, Z) + R(Y, J2 C_X Z))]^TT``.

    ``form="anticommutator"`` evaluates the variant with
    ``C_X R^TT + R^TT C_X`` instead; it does not hold in general and is kept
    only to report that fact.
    """
    if form not in ("commutator", "anticommutator"):
        raise ValueError(f"unknown form {form!r}")
    g = blocks.R.g
    J1, J2, _ = blocks.basis.Js
    R, P_T = blocks.R, blocks.P_T
    rtt = blocks.tt(Y, Z)
    F = (J1 @ Y) @ g @ Z
    sign = -1.0 if form == "commutator" else 1.0
    lhs = C_X @ rtt + sign * rtt @ C_X + blocks.nu * blocks.epsilon * F * (J1 @ C_X)
    rhs = P_T @ (J2 @ (R(J2 @ C_X @ Y, Z) + R(Y, J2 @ C_X @ Z))) @ P_T
    return float(np.linalg.norm(P_T @ lhs @ P_T - rhs))


def cc_bracket(C, X, Y) -> np.ndarray:
    """``[C_X, C_Y]`` for a family ``C`` (``C[i]`` the matrix of ``C_{e_i}``)."""
    CX = np.einsum("i,ijk->jk", X, C)
    CY = np.einsum("i,ijk->jk", Y, C)
    return CX @ CY - CY @ CX


def cc_tensor(C, g) -> CurvatureTensor:
    """The 2-form ``[C, C]`` packaged as a curvature-type tensor."""
    C = np.asarray(C, dtype=float)
    op = np.einsum("ajk,bkl->abjl", C, C) - np.einsum("bjk,akl->abjl", C, C)
    return CurvatureTensor(op, g)


def cc_properties(C, g, Jc) -> dict:
    """Residuals showing ``[C, C]`` is a unitary-algebra curvature tensor.

    Keys: ``commutes_J`` (``[[C_X, C_Y], J]``), ``skew`` (g-skewness of
    ``[C_X, C_Y]``) and ``bianchi`` (cyclic sum of ``[C_X, C_Y] Z``).
    """
    g = np.asarray(g, dtype=float)
    Jc = np.asarray(Jc, dtype=float)
    R = cc_tensor(C, g)
    comm = np.einsum("abjk,kl->abjl", R.op, Jc) - np.einsum("jk,abkl->abjl", Jc, R.op)
    skew = np.einsum("lj,abjk->ablk", g, R.op)
    skew = skew + skew.transpose(0, 1, 3, 2)
    sym = R.symmetry_residuals()
    return {
        "commutes_J": float(np.abs(comm).max(initial=0.0)),
        "skew": float(np.abs(skew).max(initial=0.0)),
        "bianchi": sym["bianchi"],
    }
