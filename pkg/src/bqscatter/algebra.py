"""Exact spectral-plane algebra for the third-order scattering problem.

The spatial symbol of the linearized good Boussinesq system is the cubic
``lambda^3 = k^3``, so its eigenvalues form the cyclic triple

    l_j(k) = omega**j * k,      omega = exp(2*pi*1j/3),  j = 1, 2, 3,

and the companion-form symbol is diagonalized by a polynomial dressing
matrix ``P(k)``.  This module collects everything that is *exact* linear
algebra in that triple:

* the dressing matrix, its inverse (a Laurent polynomial in 1/k with a
  double pole at the origin), and its Taylor data at k = 0;
* the diagonal phase weights and the scalar phases
  ``theta_ij = (l_i - l_j) x + (z_i - z_j) t`` driving all exponentials;
* the Z_3 rotation / complex-conjugation symmetry conjugations;
* the partition of the spectral plane into six open sectors separated by
  rays at multiples of 60 degrees, together with the ordering of
  ``Re l_1, Re l_2, Re l_3`` inside each sector;
* 3x3 cofactor/minor helpers used by the adjugate route of the scattering
  matrix.

Everything is closed-form; the only numerics is one matrix exponential.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from .errors import SingularDiagonalizer

# The primitive cube root of unity, stored with an exact real pair
# (-1/2, sqrt(3)/2) rather than via cmath.exp, so that identities like
# OMEGA + OMEGA2 + 1 == 0 hold to the last bit.
SQRT3 = math.sqrt(3.0)
OMEGA = complex(-0.5, 0.5 * SQRT3)
OMEGA2 = OMEGA.conjugate()  # omega**2 == conj(omega), exactly

#: cyclic permutation operator (1 -> 2 -> 3 -> 1 on basis vectors)
CYCLE = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
#: transposition operator (1 <-> 2)
SWAP = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])

_OMEGA_POW = (1.0 + 0.0j, OMEGA, OMEGA2)  # omega**n via _OMEGA_POW[n % 3]


def omega_pow(n: int) -> complex:
    """omega**n for any integer n, exact for the stored representation."""
    return _OMEGA_POW[n % 3]


def x_weights(k: complex) -> np.ndarray:
    """The spatial exponent triple ``l_j(k) = omega**j * k``, j = 1, 2, 3."""
    return np.array([OMEGA * k, OMEGA2 * k, k])


def t_weights(k: complex) -> np.ndarray:
    """The temporal exponent triple ``z_j(k) = omega**(2j) * k**2``."""
    k2 = k * k
    return np.array([OMEGA2 * k2, OMEGA * k2, k2])


def phase_matrices(k: complex) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal weight matrices (diag of x_weights, diag of t_weights)."""
    return np.diag(x_weights(k)), np.diag(t_weights(k))


def theta(i: int, j: int, x: float, t: float, k: complex) -> complex:
    """Scalar phase ``theta_ij(x, t, k) = (l_i - l_j) x + (z_i - z_j) t``.

    Indices are 1-based so that ``theta(2, 1, ...)`` reads like the
    subscript notation it mirrors.
    """
    if not (1 <= i <= 3 and 1 <= j <= 3):
        raise ValueError("theta indices are 1-based in {1,2,3}")
    l = x_weights(k)
    z = t_weights(k)
    return (l[i - 1] - l[j - 1]) * x + (z[i - 1] - z[j - 1]) * t


def companion_symbol(k: complex) -> np.ndarray:
    """Companion matrix of lambda^3 = k^3 (the x-part symbol at zero data)."""
    out = np.zeros((3, 3), dtype=complex)
    out[0, 1] = 1.0
    out[1, 2] = 1.0
    out[2, 0] = k**3
    return out


def dressing_matrix(k: complex) -> np.ndarray:
    """Polynomial matrix P(k) whose j-th column spans the l_j eigenspace.

    ``companion_symbol(k) @ P == P @ diag(x_weights(k))`` identically in k;
    det P = -3*omega*(1-omega)*k**3, so P is invertible iff k != 0.
    """
    return np.array(
        [
            [OMEGA, OMEGA2, 1.0],
            [OMEGA2 * k, OMEGA * k, k],
            [k * k, k * k, k * k],
        ]
    )


class DressingLaurent(NamedTuple):
    """Coefficients of P(k)^-1 = pm2/k**2 + pm1/k + p0 (exact)."""

    pm2: np.ndarray
    pm1: np.ndarray
    p0: np.ndarray


class DressingTaylor(NamedTuple):
    """Taylor data of P at k = 0: P(0), P'(0), (1/2) P''(0) (exact; P is
    quadratic in k so these three matrices reassemble P everywhere)."""

    p0: np.ndarray
    p1: np.ndarray
    half_p2: np.ndarray


def dressing_laurent() -> DressingLaurent:
    """Exact Laurent coefficients of the inverse dressing matrix."""
    pm2 = np.array([[0, 0, 1], [0, 0, 1], [0, 0, 1]], dtype=complex) / 3.0
    pm1 = np.array([[0, OMEGA, 0], [0, OMEGA2, 0], [0, 1, 0]]) / 3.0
    p0 = np.array([[OMEGA2, 0, 0], [OMEGA, 0, 0], [1, 0, 0]]) / 3.0
    return DressingLaurent(pm2, pm1, p0)


def dressing_taylor() -> DressingTaylor:
    """Exact Taylor data of P at the origin (P is quadratic in k)."""
    p0 = np.array([[OMEGA, OMEGA2, 1], [0, 0, 0], [0, 0, 0]], dtype=complex)
    p1 = np.array([[0, 0, 0], [OMEGA2, OMEGA, 1], [0, 0, 0]], dtype=complex)
    half_p2 = np.array([[0, 0, 0], [0, 0, 0], [1, 1, 1]], dtype=complex)
    return DressingTaylor(p0, p1, half_p2)


def dressing_inverse(k: complex) -> np.ndarray:
    """P(k)^-1 assembled from its exact Laurent coefficients."""
    if k == 0:
        raise SingularDiagonalizer("P(k) is singular at k = 0")
    lau = dressing_laurent()
    return lau.pm2 / (k * k) + lau.pm1 / k + lau.p0


def propagator(x: float, xp: float, k: complex) -> np.ndarray:
    """Free propagator exp((x - xp) * companion_symbol(k)).

    Computed with scipy's scaling-and-squaring Pade approximant; entire in
    k (depends on k only through k**3), smooth through k = 0.
    """
    return expm((x - xp) * companion_symbol(k))


def cyclic_conjugate(m: np.ndarray) -> np.ndarray:
    """CYCLE @ m @ CYCLE^-1 (the Z_3 rotation action on 3x3 matrices)."""
    return CYCLE @ m @ CYCLE.T


def swap_conjugate(m: np.ndarray) -> np.ndarray:
    """SWAP @ m @ SWAP^-1 (the conjugation-symmetry action)."""
    return SWAP @ m @ SWAP


def minor2(m: np.ndarray, i: int, j: int) -> complex:
    """Determinant of m with row i and column j removed (0-based)."""
    rows = [r for r in range(3) if r != i]
    cols = [c for c in range(3) if c != j]
    return m[rows[0], cols[0]] * m[rows[1], cols[1]] - m[rows[0], cols[1]] * m[rows[1], cols[0]]


def cofactor(m: np.ndarray) -> np.ndarray:
    """Matrix of signed 2x2 minors: cofactor(m)[i, j] = (-1)^(i+j) minor.

    For invertible m this equals det(m) * inv(m).T, but the explicit form
    below stays finite (and correct) when m is singular.
    """
    out = np.empty((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            out[i, j] = (-1.0) ** (i + j) * minor2(m, i, j)
    return out


# ---------------------------------------------------------------------------
# Sector / ray classification
# ---------------------------------------------------------------------------

#: ascending order of (Re l_1, Re l_2, Re l_3) inside each open sector,
#: as 0-based l-indices; e.g. SECTOR_ASCENDING[1] == (0, 1, 2) says that in
#: sector 1 (arguments between 0 and 60 degrees) Re l_1 < Re l_2 < Re l_3.
SECTOR_ASCENDING: dict[int, tuple[int, int, int]] = {
    1: (0, 1, 2),
    2: (0, 2, 1),
    3: (2, 0, 1),
    4: (2, 1, 0),
    5: (1, 2, 0),
    6: (1, 0, 2),
}


@dataclass(frozen=True)
class SpectralPoint:
    """Classification of a spectral parameter against the six-sector fan.

    kind is "origin", "ray" or "sector"; index is the 1-based sector
    number for kind == "sector", and the 1-based ray number m (ray m sits
    at argument (m-1)*60 degrees) for kind == "ray".
    """

    k: complex
    kind: str
    index: int

    @property
    def is_ray(self) -> bool:
        return self.kind == "ray"


def sector_of(k: complex, ray_rtol: float = 1e-12) -> SpectralPoint:
    """Classify k as origin / on a ray / inside an open sector.

    A point counts as "on a ray" when two of the Re l_j coincide to within
    ``ray_rtol * |k|`` — i.e. when the exponential dichotomy that defines
    the sectors degenerates at working precision.
    """
    if k == 0:
        return SpectralPoint(k, "origin", 0)
    l = x_weights(k)
    re = l.real
    gap = min(abs(re[0] - re[1]), abs(re[0] - re[2]), abs(re[1] - re[2]))
    ang = cmath.phase(k) % (2.0 * math.pi)
    third = math.pi / 3.0
    if gap <= ray_rtol * abs(k):
        m = int(round(ang / third)) % 6
        return SpectralPoint(k, "ray", m + 1)
    n = int(ang / third) % 6
    return SpectralPoint(k, "sector", n + 1)


def ray_point(m: int, radius: float) -> complex:
    """The point at distance `radius` along ray m (argument (m-1)*60 deg)."""
    if not 1 <= m <= 6:
        raise ValueError("ray index must be in 1..6")
    return radius * cmath.exp(1j * (m - 1) * math.pi / 3.0)


def sector_midpoint(n: int, radius: float) -> complex:
    """A representative interior point of sector n at the given radius."""
    if not 1 <= n <= 6:
        raise ValueError("sector index must be in 1..6")
    return radius * cmath.exp(1j * (2 * n - 1) * math.pi / 6.0)
