"""Para-quaternionic Hermitian linear algebra on a single tangent space.

Conventions
-----------
* Vectors are columns; a basis of a subspace is a ``(dim, k)`` array.
* An endomorphism ``A`` is a ``(dim, dim)`` matrix acting by ``A @ v``.
* ``g`` is the Gram matrix of the metric, ``<u, v> = u @ g @ v``.
* A family ``C`` in the first prolongation is a ``(m, m, m)`` array with
  ``C[i]`` the matrix of ``C_{e_i}``; so ``C[i][k, j]`` is the ``k``-th
  component of ``C_{e_i} e_j``.

Rank decisions use singular values relative to the largest one, with
threshold ``RANK_TOL``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import null_space

from .algebra import SPLIT_METRIC, right_matrix
from .exceptions import DegenerateSubspaceError

__all__ = [
    "RANK_TOL",
    "PseudoEuclideanSpace",
    "AdaptedBasis",
    "CubicDecomposition",
    "make_standard_basis",
    "q_norm",
    "q_element",
    "rotate_basis",
    "rotation_matrix",
    "tilt_basis",
    "tilt_matrix",
    "invariant_subspace",
    "pseudo_orthonormalize",
    "signature",
    "orth",
    "intersect",
    "s_prolongation_basis",
    "random_s_prolongation",
    "s_prolongation_residuals",
    "cubic_form",
    "total_symmetry_residual",
    "decompose_S_prolongation",
]

RANK_TOL = 1e-8


def signature(g, tol=RANK_TOL, scale=None):
    """Eigen-sign count ``(n_plus, n_minus, n_zero)`` of a symmetric matrix.

    Eigenvalues below ``tol * scale`` in modulus count as zero; ``scale``
    defaults to the largest eigenvalue modulus.
    """
    g = np.asarray(g, dtype=float)
    if g.size == 0:
        return (0, 0, 0)
    w = np.linalg.eigvalsh(0.5 * (g + g.T))
    if scale is None:
        scale = np.abs(w).max()
    scale = max(scale, 1e-300)
    plus = int(np.sum(w > tol * scale))
    minus = int(np.sum(w < -tol * scale))
    return (plus, minus, len(w) - plus - minus)


def orth(A, tol=RANK_TOL):
    """Orthonormal (Euclidean) basis of the column space of ``A``."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], 0))
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((A.shape[0], 0))
    rank = int(np.sum(s > tol * s[0]))
    return u[:, :rank]


def intersect(*spaces, tol=RANK_TOL):
    """Orthonormal basis of the intersection of column spaces."""
    bases = [orth(S, tol) for S in spaces]
    dim = bases[0].shape[0]
    out = bases[0]
    for B in bases[1:]:
        if out.shape[1] == 0 or B.shape[1] == 0:
            return np.zeros((dim, 0))
        # v in out and in B  <=>  (I - B B^T) v = 0 for v = out @ c
        resid = out - B @ (B.T @ out)
        _, s, vt = np.linalg.svd(resid, full_matrices=True)
        s_full = np.zeros(out.shape[1])
        s_full[: s.size] = s
        keep = s_full <= tol * max(1.0, np.linalg.norm(out, 2))
        out = orth(out @ vt[keep].T, tol)
    return out


@dataclass(frozen=True)
class PseudoEuclideanSpace:
    """A real vector space with a nondegenerate symmetric bilinear form."""

    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("metric must be a square matrix")
        if np.abs(g - g.T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(g).max()):
            raise ValueError("metric must be symmetric")
        if signature(g)[2]:
            raise DegenerateSubspaceError("metric is degenerate", signature=signature(g))
        object.__setattr__(self, "g", g)

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    def signature(self):
        p, q, _ = signature(self.g)
        return (p, q)

    def inner(self, u, v) -> float:
        return float(np.asarray(u) @ self.g @ np.asarray(v))


@dataclass(frozen=True)
class AdaptedBasis:
    """A standard basis ``(J1, J2, J3)`` of a para-quaternionic structure.

    ``eps`` holds the squares ``J_a^2 = eps[a] Id``; it is ``(-1, 1, 1)`` in
    the complex case and ``(1, 1, -1)`` in the para-complex case.
    """

    J1: np.ndarray
    J2: np.ndarray
    J3: np.ndarray
    eps: tuple

    def __post_init__(self):
        eps = tuple(int(e) for e in self.eps)
        if sorted(eps) != [-1, 1, 1]:
            raise ValueError(f"eps must be a permutation of (-1, 1, 1), got {self.eps}")
        object.__setattr__(self, "eps", eps)
        for name in ("J1", "J2", "J3"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    @property
    def Js(self):
        return (self.J1, self.J2, self.J3)

    @property
    def epsilon(self) -> int:
        """Type of ``J1``: -1 (complex) or +1 (para-complex)."""
        return self.eps[0]

    @property
    def dim(self) -> int:
        return self.J1.shape[0]

    def residuals(self, g) -> dict:
        """Max-abs residuals of the defining relations of an adapted basis."""
        g = np.asarray(g, dtype=float)
        Js, eps = self.Js, self.eps
        eye = np.eye(self.dim)
        square = max(np.abs(J @ J - e * eye).max() for J, e in zip(Js, eps))
        anti = max(
            np.abs(Js[a] @ Js[b] + Js[b] @ Js[a]).max()
            for a, b in itertools.combinations(range(3), 2)
        )
        cyclic = max(
            np.abs(Js[a] @ Js[b] - eps[2] * eps[c] * Js[c]).max()
            for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1))
        )
        skew = max(np.abs(g @ J + J.T @ g).max() for J in Js)
        return {"square": square, "anticommute": anti, "cyclic": cyclic, "skew": skew}

    def check(self, g, tol=1e-10) -> None:
        bad = {k: v for k, v in self.residuals(g).items() if not v <= tol}
        if bad:
            raise ValueError(f"not an adapted basis (tol={tol:g}): {bad}")

    def transform(self, M) -> "AdaptedBasis":
        """New basis ``J'_b = sum_a M[a, b] J_a`` (columns are the new elements)."""
        M = np.asarray(M, dtype=float)
        stack = np.stack(self.Js)
        new = np.einsum("ab,aij->bij", M, stack)
        return AdaptedBasis(new[0], new[1], new[2], self.eps)

    def restrict(self, g):
        """Kaehler forms ``F_a(X, Y) = g(J_a X, Y)`` as matrices."""
        g = np.asarray(g, dtype=float)
        return tuple(J.T @ g for J in self.Js)


def make_standard_basis(n: int, epsilon: int = -1):
    """Flat model of split-quaternionic dimension ``n``.

    Coordinates are ``(a, b, c, d)`` per split-quaternion slot; the metric
    is ``Re(conj(q) q)`` slot-wise, i.e. ``diag(1, 1, -1, -1)`` blocks.  The
    ``J_a`` act by right multiplication by unit split quaternions, so that
    left scalar multiplication commutes with them.

    Returns ``(PseudoEuclideanSpace, AdaptedBasis)``.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if epsilon not in (-1, 1):
        raise ValueError(f"epsilon must be -1 or +1, got {epsilon!r}")
    n = int(n)
    unit = np.eye(4)
    if epsilon == -1:
        r1, r2, eps = right_matrix(unit[1]), right_matrix(unit[2]), (-1, 1, 1)
    else:
        r1, r2, eps = right_matrix(unit[2]), right_matrix(unit[3]), (1, 1, -1)
    eye = np.eye(n)
    J1 = np.kron(eye, r1)
    J2 = np.kron(eye, r2)
    space = PseudoEuclideanSpace(np.kron(eye, SPLIT_METRIC))
    return space, AdaptedBasis(J1, J2, J1 @ J2, eps)


def _eps_triple(epsilon):
    if np.ndim(epsilon) == 0:
        return (-1, 1, 1) if int(epsilon) == -1 else (1, 1, -1)
    return tuple(int(e) for e in epsilon)


def q_norm(coeffs, epsilon) -> float:
    """``||L||^2`` with ``L^2 = -||L||^2 Id`` for ``L = a J1 + b J2 + c J3``.

    ``epsilon`` is the type of ``J1`` or the full triple of squares.
    """
    eps = _eps_triple(epsilon)
    a = np.asarray(coeffs, dtype=float)
    return float(-(eps[0] * a[0] ** 2 + eps[1] * a[1] ** 2 + eps[2] * a[2] ** 2))


def q_element(coeffs, basis: AdaptedBasis) -> np.ndarray:
    a, b, c = (float(v) for v in coeffs)
    return a * basis.J1 + b * basis.J2 + c * basis.J3


def rotation_matrix(theta: float, epsilon: int) -> np.ndarray:
    """The frame change fixing ``J1``: circular for epsilon=-1, hyperbolic for +1."""
    if epsilon == -1:
        c, s = np.cos(theta), np.sin(theta)
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    c, s = np.cosh(theta), np.sinh(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, s, c]])


def rotate_basis(basis: AdaptedBasis, theta: float) -> AdaptedBasis:
    """Rotate ``(J2, J3)`` keeping ``J1``; the result is again adapted."""
    return basis.transform(rotation_matrix(theta, basis.epsilon))


def tilt_matrix(phi: float, epsilon: int) -> np.ndarray:
    """Frame change mixing ``J1`` with ``J2`` and fixing ``J3``.

    Boost for epsilon=-1 (``J1``, ``J2`` of opposite norm sign), circular
    rotation for epsilon=+1.
    """
    if epsilon == -1:
        c, s = np.cosh(phi), np.sinh(phi)
        return np.array([[c, s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def tilt_basis(basis: AdaptedBasis, phi: float) -> AdaptedBasis:
    """Apply :func:`tilt_matrix`; ``J1`` no longer restricts to the same ``J``."""
    return basis.transform(tilt_matrix(phi, basis.epsilon))


def _gram_rank_check(W, g, what="subspace"):
    G = W.T @ g @ W
    sig = signature(G)
    if sig[2]:
        raise DegenerateSubspaceError(
            f"{what} is degenerate: Gram signature (+{sig[0]}, -{sig[1]}, 0x{sig[2]})",
            signature=sig,
        )


def pseudo_orthonormalize(W, g, tol=RANK_TOL):
    """Gram-Schmidt for an indefinite metric.

    Returns ``(E, mu)`` with ``E.T @ g @ E = diag(mu)`` and ``mu`` in
    ``{-1, +1}``; ``span(E) = span(W)``.  Pivots are taken in input order
    among the vectors whose squared norm is within a factor two of the
    largest one; when every remaining vector is null, a pair with nonzero
    product is combined.  Raises :class:`DegenerateSubspaceError` with an
    isotropic witness in the radical when the span is degenerate.
    """
    W = np.array(W, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    g = np.asarray(g, dtype=float)
    k = W.shape[1]
    if k == 0:
        return np.zeros((W.shape[0], 0)), np.zeros(0)
    if orth(W, tol).shape[1] < k:
        raise ValueError("input vectors are linearly dependent")
    gscale = np.abs(g).max()
    remaining = [W[:, i].copy() for i in range(k)]
    out, mus = [], []
    while remaining:
        sq = np.array([v @ g @ v for v in remaining])
        size = np.array([v @ v for v in remaining]) * gscale
        rel = np.abs(sq) / size
        if rel.max() > tol:
            i = int(np.flatnonzero(rel >= 0.5 * rel.max())[0])
        else:
            best, pair = 0.0, None
            for a, b in itertools.combinations(range(len(remaining)), 2):
                va, vb = remaining[a], remaining[b]
                r = abs(va @ g @ vb) / (np.sqrt(size[a] * size[b]))
                if r > best:
                    best, pair = r, (a, b)
            if pair is None or best <= tol:
                witness = remaining[0] / np.linalg.norm(remaining[0])
                gram = W.T @ g @ W
                raise DegenerateSubspaceError(
                    "degenerate span: isotropic vector orthogonal to the whole span",
                    witness=witness,
                    signature=signature(gram),
                )
            a, b = pair
            s = np.sign(remaining[a] @ g @ remaining[b])
            remaining[a] = remaining[a] + s * remaining[b]
            continue
        v = remaining.pop(i)
        nv = v @ g @ v
        e = v / np.sqrt(abs(nv))
        mu = float(np.sign(nv))
        remaining = [w - mu * (e @ g @ w) * e for w in remaining]
        out.append(e)
        mus.append(mu)
    return np.column_stack(out), np.array(mus)


def invariant_subspace(W, basis: AdaptedBasis, g, tol=RANK_TOL):
    """Split ``span(W)`` into its maximal Q-invariant part and a complement.

    Returns ``(tbar, pure)``: orthonormal-column bases of the maximal
    Q-invariant subspace (``W cap J2 W`` when ``W`` is ``J1``-invariant)
    and of a ``J1``-invariant supplement.  The supplement is the
    g-orthogonal complement when ``tbar`` is nondegenerate, otherwise an
    algorithmic one built from ``{v, J1 v}`` pairs.
    """
    g = np.asarray(g, dtype=float)
    W = orth(np.asarray(W, dtype=float), tol)
    _gram_rank_check(W, g)
    dim = W.shape[0]
    V = W
    while True:
        images = [orth(J @ V, tol) for J in basis.Js]
        nxt = intersect(V, *images, tol=tol)
        if nxt.shape[1] == V.shape[1]:
            break
        V = nxt
        if V.shape[1] == 0:
            break
    tbar = V
    if tbar.shape[1] == W.shape[1]:
        return tbar, np.zeros((dim, 0))
    if tbar.shape[1] == 0:
        return tbar, W
    if signature(tbar.T @ g @ tbar)[2] == 0:
        coeffs = null_space(tbar.T @ g @ W)
        return tbar, orth(W @ coeffs, tol)
    # degenerate tbar: greedy J1-invariant complement
    span = tbar
    pure = np.zeros((dim, 0))
    target = W.shape[1]
    for v in W.T:
        if span.shape[1] >= target:
            break
        cand = np.column_stack([v, basis.J1 @ v])
        trial = orth(np.column_stack([span, cand]), tol)
        if trial.shape[1] == span.shape[1] + 2:
            span = trial
            pure = np.column_stack([pure, cand])
    return tbar, orth(pure, tol)


# --- first prolongation of S_J and cubic forms -------------------------------


def _prolongation_constraints(C, g, Jc):
    sym = np.einsum("kl,ilj->ikj", g, C)
    sym = sym - sym.transpose(0, 2, 1)
    anti = np.einsum("ikl,lj->ikj", C, Jc) + np.einsum("kl,ilj->ikj", Jc, C)
    # C[i][:, j] - C[j][:, i]
    prol = C.transpose(0, 2, 1) - C.transpose(2, 0, 1)
    return sym, anti, prol


def s_prolongation_basis(g, Jc):
    """Basis (as ``(N, m, m, m)``) of the first prolongation of ``S_J``.

    ``S_J`` is the space of ``g``-symmetric endomorphisms anticommuting
    with ``Jc``; the prolongation adds ``C_X Y = C_Y X``.
    """
    g = np.asarray(g, dtype=float)
    Jc = np.asarray(Jc, dtype=float)
    m = g.shape[0]
    cols = []
    for idx in range(m**3):
        e = np.zeros(m**3)
        e[idx] = 1.0
        parts = _prolongation_constraints(e.reshape(m, m, m), g, Jc)
        cols.append(np.concatenate([p.ravel() for p in parts]))
    A = np.column_stack(cols)
    ns = null_space(A)
    return ns.T.reshape(-1, m, m, m)


def random_s_prolongation(g, Jc, rng=None, basis=None):
    rng = np.random.default_rng(rng)
    if basis is None:
        basis = s_prolongation_basis(g, Jc)
    return np.einsum("n,nijk->ijk", rng.normal(size=len(basis)), basis)


def s_prolongation_residuals(C, g, Jc) -> dict:
    sym, anti, prol = _prolongation_constraints(np.asarray(C, dtype=float), g, Jc)
    return {
        "symmetric": float(np.abs(sym).max(initial=0.0)),
        "anticommute": float(np.abs(anti).max(initial=0.0)),
        "prolongation": float(np.abs(prol).max(initial=0.0)),
    }


def cubic_form(C, g):
    """``gC(X, Y, Z) = g(C_X Y, Z)`` as a ``(m, m, m)`` array."""
    return np.einsum("ilj,lk->ijk", np.asarray(C), np.asarray(g, dtype=float))


def total_symmetry_residual(T) -> float:
    T = np.asarray(T)
    return float(
        max(np.abs(T - T.transpose(p)).max(initial=0.0) for p in itertools.permutations(range(3)))
    )


class CubicDecomposition(NamedTuple):
    """Splitting ``gC = plus + minus``.

    For epsilon=+1 the parts are real cubic forms supported on the
    ``(+1)``/``(-1)`` eigenspaces of ``J``.  For epsilon=-1 they are the
    holomorphic part ``q`` and its conjugate, stored as complex arrays.
    """

    plus: np.ndarray
    minus: np.ndarray


def eigen_projectors(Jc, epsilon):
    """Projectors onto the two eigenspaces of ``Jc``.

    epsilon=+1: real ``(Id +- J)/2``.  epsilon=-1: complex ``(Id -+ iJ)/2``
    onto the ``+i`` / ``-i`` eigenspaces.
    """
    Jc = np.asarray(Jc, dtype=float)
    eye = np.eye(Jc.shape[0])
    if epsilon == 1:
        return 0.5 * (eye + Jc), 0.5 * (eye - Jc)
    return 0.5 * (eye - 1j * Jc), 0.5 * (eye + 1j * Jc)


def _project3(T, P):
    return np.einsum("abc,ai,bj,ck->ijk", T, P, P, P)


def decompose_S_prolongation(C, g, Jc, epsilon, tol=1e-8) -> CubicDecomposition:
    """Split the cubic form of ``C`` into its two pure-type parts.

    Raises ``ValueError`` when ``C`` does not anticommute with ``Jc`` (or
    otherwise leaves the first prolongation) beyond ``tol`` relative to its
    size.
    """
    C = np.asarray(C, dtype=float)
    scale = max(1.0, np.abs(C).max(initial=0.0))
    res = s_prolongation_residuals(C, g, Jc)
    if max(res.values()) > tol * scale:
        raise ValueError(f"C is not in the first prolongation of S_J: {res}")
    gC = cubic_form(C, g)
    p_plus, p_minus = eigen_projectors(Jc, epsilon)
    plus = _project3(gC, p_plus)
    if epsilon == 1:
        minus = _project3(gC, p_minus)
    else:
        minus = np.conj(plus)
    return CubicDecomposition(plus, minus)
