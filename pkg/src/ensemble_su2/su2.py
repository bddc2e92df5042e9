"""Closed-form SU(2) arithmetic.

Everything here works on explicit 2x2 complex entries. Exponentials of
Pauli combinations use the identity

    exp(-i a.sigma) = cos(r) I - i sin(r) (a.sigma) / r,    r = |a|

so results are unitary up to round-off regardless of the generator size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Unitary2",
    "PauliVector",
    "EulerXYX",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "IDENTITY",
    "pauli_exp",
    "multiply",
    "dagger",
    "frobenius_distance",
    "trace_fidelity",
    "to_su2",
    "euler_xyx",
    "recompose_xyx",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# below this |sin(beta)| the X-Y-X decomposition is gimbal-degenerate
_EULER_DEGENERATE = 1e-9


@dataclass(frozen=True)
class Unitary2:
    """A 2x2 complex matrix stored row-major as four scalars."""

    u00: complex
    u01: complex
    u10: complex
    u11: complex

    @classmethod
    def from_matrix(cls, m) -> "Unitary2":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    @classmethod
    def from_quaternion(cls, a: float, b: float, c: float, d: float) -> "Unitary2":
        """Build ``a I - i (b sx + c sy + d sz)``."""
        return cls(complex(a, -d), complex(-c, -b), complex(c, -b), complex(a, d))

    @classmethod
    def identity(cls) -> "Unitary2":
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.u00, self.u01], [self.u10, self.u11]], dtype=complex)

    def quaternion(self) -> tuple[float, float, float, float]:
        """Inverse of :meth:`from_quaternion` for SU(2) elements."""
        a = 0.5 * (self.u00 + self.u11).real
        d = 0.5 * (self.u11 - self.u00).imag
        b = -0.5 * (self.u01 + self.u10).imag
        c = 0.5 * (self.u10 - self.u01).real
        return a, b, c, d

    def det(self) -> complex:
        return self.u00 * self.u11 - self.u01 * self.u10

    def unitarity_error(self) -> float:
        """Frobenius norm of ``U^dagger U - I``."""
        m = self.matrix
        return float(np.linalg.norm(m.conj().T @ m - np.eye(2)))

    def __matmul__(self, other: "Unitary2") -> "Unitary2":
        return multiply(self, other)


IDENTITY = Unitary2.identity()


@dataclass(frozen=True)
class PauliVector:
    """Coefficients of sigma_x, sigma_y, sigma_z."""

    ax: float
    ay: float
    az: float = 0.0

    @property
    def norm(self) -> float:
        return math.sqrt(self.ax * self.ax + self.ay * self.ay + self.az * self.az)

    def __neg__(self) -> "PauliVector":
        return PauliVector(-self.ax, -self.ay, -self.az)


@dataclass(frozen=True)
class EulerXYX:
    """Angles of ``exp(-i alpha sx) exp(-i beta sy) exp(-i gamma sx)``."""

    alpha: float
    beta: float
    gamma: float


def pauli_exp(a: PauliVector) -> Unitary2:
    """Return ``exp(-i (ax sx + ay sy + az sz))`` in closed form."""
    ax, ay, az = float(a.ax), float(a.ay), float(a.az)
    if not (math.isfinite(ax) and math.isfinite(ay) and math.isfinite(az)):
        raise ValueError("non-finite generator")
    r = math.sqrt(ax * ax + ay * ay + az * az)
    if r == 0.0:
        return IDENTITY
    s = math.sin(r) / r
    return Unitary2.from_quaternion(math.cos(r), s * ax, s * ay, s * az)


def multiply(A: Unitary2, B: Unitary2) -> Unitary2:
    return Unitary2(
        A.u00 * B.u00 + A.u01 * B.u10,
        A.u00 * B.u01 + A.u01 * B.u11,
        A.u10 * B.u00 + A.u11 * B.u10,
        A.u10 * B.u01 + A.u11 * B.u11,
    )


def dagger(U: Unitary2) -> Unitary2:
    return Unitary2(
        U.u00.conjugate(), U.u10.conjugate(), U.u01.conjugate(), U.u11.conjugate()
    )


def frobenius_distance(A: Unitary2, B: Unitary2) -> float:
    return math.sqrt(
        abs(A.u00 - B.u00) ** 2
        + abs(A.u01 - B.u01) ** 2
        + abs(A.u10 - B.u10) ** 2
        + abs(A.u11 - B.u11) ** 2
    )


def trace_fidelity(A: Unitary2, B: Unitary2) -> float:
    """Phase-insensitive overlap ``|tr(A^dagger B)| / 2``, clipped to [0, 1]."""
    tr = (
        A.u00.conjugate() * B.u00
        + A.u10.conjugate() * B.u10
        + A.u01.conjugate() * B.u01
        + A.u11.conjugate() * B.u11
    )
    return min(1.0, abs(tr) / 2.0)


def to_su2(U: Unitary2) -> Unitary2:
    """Pick the deterministic SU(2) representative of the phase class of ``U``.

    The global phase is removed so that ``det = 1``; of the two remaining
    choices (``V`` and ``-V``) the one whose (0, 0) entry has argument in
    (-pi/2, pi/2] is returned. When that entry vanishes the (0, 1) entry
    decides instead.
    """
    det = U.det()
    if abs(det) == 0.0:
        raise ValueError("singular matrix has no SU(2) representative")
    phase = complex(np.sqrt(det))
    V = Unitary2(U.u00 / phase, U.u01 / phase, U.u10 / phase, U.u11 / phase)
    lead = V.u00 if abs(V.u00) > 1e-15 else V.u01
    ang = math.atan2(lead.imag, lead.real)
    if not (-math.pi / 2 < ang <= math.pi / 2):
        V = Unitary2(-V.u00, -V.u01, -V.u10, -V.u11)
    return V


def recompose_xyx(angles: EulerXYX) -> Unitary2:
    return multiply(
        multiply(pauli_exp(PauliVector(angles.alpha, 0, 0)), pauli_exp(PauliVector(0, angles.beta, 0))),
        pauli_exp(PauliVector(angles.gamma, 0, 0)),
    )


def euler_xyx(U: Unitary2) -> EulerXYX:
    """Decompose ``U`` in SU(2) into X-Y-X angles.

    With ``U = q0 - i(q1 sx + q2 sy + q3 sz)`` the product expands to

        q0 + i q1 = cos(beta) exp(i (alpha + gamma))
        q2 + i q3 = sin(beta) exp(i (alpha - gamma))

    The angle triple is made unique by restricting beta to [0, pi/2] and
    alpha to [0, pi); gamma lies in [0, 2pi). If |sin beta| is below 1e-9
    gamma is set to zero and the whole x rotation goes into alpha, which
    may then lie anywhere in [0, 2pi).
    """
    q0, q1, q2, q3 = U.quaternion()
    cb = math.hypot(q0, q1)
    sb = math.hypot(q2, q3)
    beta = math.atan2(sb, cb)
    two_pi = 2.0 * math.pi
    if sb < _EULER_DEGENERATE:
        alpha = math.atan2(q1, q0) % two_pi
        return EulerXYX(alpha, beta, 0.0)
    total = math.atan2(q1, q0) if cb >= _EULER_DEGENERATE else 0.0
    diff = math.atan2(q3, q2)
    alpha = 0.5 * (total + diff) % two_pi
    gamma = 0.5 * (total - diff) % two_pi
    # (alpha + pi, gamma + pi) is the same element
    if alpha >= math.pi:
        alpha -= math.pi
        gamma = (gamma + math.pi) % two_pi
    return EulerXYX(alpha, beta, gamma)
