"""Split quaternions and epsilon-complex numbers.

Split quaternions are written ``a + b I + c J + d K`` with
``-I^2 = J^2 = K^2 = 1`` and ``IJ = -JI = K``.  Epsilon-complex numbers are
``x + e y`` with ``e^2 = epsilon`` and ``epsilon`` in ``{-1, +1}``, carried as
a field on every value.

Besides the value classes, the module exposes array kernels working on the
last axis of ``(..., 4)`` arrays.  The model-space metrics are built from
them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SplitQuaternion",
    "EpsilonComplex",
    "sq_mul",
    "sq_conj",
    "sq_norm",
    "sq_mul_array",
    "sq_conj_array",
    "sq_norm_array",
    "left_matrix",
    "right_matrix",
    "ec_mul",
    "SPLIT_METRIC",
]

# Re(conj(p) q) as a bilinear form on coordinates (a, b, c, d).
SPLIT_METRIC = np.diag([1.0, 1.0, -1.0, -1.0])

_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


def sq_mul_array(p, q):
    """Product of split quaternions stored along the last axis."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            a1 * a2 - b1 * b2 + c1 * c2 + d1 * d2,
            a1 * b2 + b1 * a2 - c1 * d2 + d1 * c2,
            a1 * c2 + c1 * a2 - b1 * d2 + d1 * b2,
            a1 * d2 + d1 * a2 + b1 * c2 - c1 * b2,
        ],
        axis=-1,
    )


def sq_conj_array(q):
    return np.asarray(q, dtype=float) * _CONJ


def sq_norm_array(q):
    """``q conj(q) = a^2 + b^2 - c^2 - d^2`` along the last axis."""
    q = np.asarray(q, dtype=float)
    return q[..., 0] ** 2 + q[..., 1] ** 2 - q[..., 2] ** 2 - q[..., 3] ** 2


def left_matrix(u):
    """4x4 matrix of ``q -> u q`` on coordinates."""
    return sq_mul_array(np.asarray(u, dtype=float)[None, :], np.eye(4)).T


def right_matrix(u):
    """4x4 matrix of ``q -> q u`` on coordinates."""
    return sq_mul_array(np.eye(4), np.asarray(u, dtype=float)[None, :]).T


@dataclass(frozen=True)
class SplitQuaternion:
    """Split quaternion ``a + b I + c J + d K``."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    @classmethod
    def from_array(cls, arr) -> "SplitQuaternion":
        a, b, c, d = (float(v) for v in np.asarray(arr, dtype=float).reshape(4))
        return cls(a, b, c, d)

    def to_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def conj(self) -> "SplitQuaternion":
        return SplitQuaternion(self.a, -self.b, -self.c, -self.d)

    def norm(self) -> float:
        return sq_norm(self)

    def inverse(self) -> "SplitQuaternion":
        n = self.norm()
        if n == 0.0:
            raise ZeroDivisionError("split quaternion with zero norm is not invertible")
        return SplitQuaternion.from_array(self.conj().to_array() / n)

    def __add__(self, other):
        if not isinstance(other, SplitQuaternion):
            return NotImplemented
        return SplitQuaternion.from_array(self.to_array() + other.to_array())

    def __sub__(self, other):
        if not isinstance(other, SplitQuaternion):
            return NotImplemented
        return SplitQuaternion.from_array(self.to_array() - other.to_array())

    def __neg__(self):
        return SplitQuaternion(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other):
        if isinstance(other, SplitQuaternion):
            return sq_mul(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return SplitQuaternion.from_array(float(other) * self.to_array())
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return SplitQuaternion.from_array(float(other) * self.to_array())
        return NotImplemented


def sq_mul(p: SplitQuaternion, q: SplitQuaternion) -> SplitQuaternion:
    return SplitQuaternion.from_array(sq_mul_array(p.to_array(), q.to_array()))


def sq_conj(q: SplitQuaternion) -> SplitQuaternion:
    return q.conj()


def sq_norm(q: SplitQuaternion) -> float:
    return q.a * q.a + q.b * q.b - q.c * q.c - q.d * q.d


@dataclass(frozen=True)
class EpsilonComplex:
    """Epsilon-complex number ``re + e * im`` with ``e^2 = epsilon``.

    ``epsilon = -1`` gives the complex numbers, ``epsilon = +1`` the
    para-complex (split-complex) numbers.
    """

    re: float
    im: float
    epsilon: int = -1

    def __post_init__(self):
        if self.epsilon not in (-1, 1):
            raise ValueError(f"epsilon must be -1 or +1, got {self.epsilon!r}")

    def _check(self, other: "EpsilonComplex"):
        if other.epsilon != self.epsilon:
            raise ValueError(
                f"cannot combine epsilon={self.epsilon} with epsilon={other.epsilon}"
            )

    def conj(self) -> "EpsilonComplex":
        return EpsilonComplex(self.re, -self.im, self.epsilon)

    def abs2(self) -> float:
        """``z conj(z) = re^2 - epsilon im^2`` (indefinite when epsilon = +1)."""
        return self.re * self.re - self.epsilon * self.im * self.im

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return EpsilonComplex(self.re + other, self.im, self.epsilon)
        if not isinstance(other, EpsilonComplex):
            return NotImplemented
        self._check(other)
        return EpsilonComplex(self.re + other.re, self.im + other.im, self.epsilon)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, EpsilonComplex):
            return NotImplemented
        self._check(other)
        return EpsilonComplex(self.re - other.re, self.im - other.im, self.epsilon)

    def __neg__(self):
        return EpsilonComplex(-self.re, -self.im, self.epsilon)

    def __mul__(self, other):
        if isinstance(other, EpsilonComplex):
            return ec_mul(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return EpsilonComplex(other * self.re, other * self.im, self.epsilon)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return EpsilonComplex(other * self.re, other * self.im, self.epsilon)
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = EpsilonComplex(1.0, 0.0, self.epsilon)
        for _ in range(k):
            out = out * self
        return out

    def to_split_quaternion(self) -> SplitQuaternion:
        """Embed as ``re + im I`` (epsilon=-1) or ``re + im J`` (epsilon=+1)."""
        if self.epsilon == -1:
            return SplitQuaternion(self.re, self.im, 0.0, 0.0)
        return SplitQuaternion(self.re, 0.0, self.im, 0.0)


def ec_mul(z: EpsilonComplex, w: EpsilonComplex) -> EpsilonComplex:
    """``(a + e b)(c + e d) = (ac + epsilon bd) + e (ad + bc)``."""
    z._check(w)
    return EpsilonComplex(
        z.re * w.re + z.epsilon * z.im * w.im,
        z.re * w.im + z.im * w.re,
        z.epsilon,
    )
