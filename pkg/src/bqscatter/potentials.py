"""Initial data and the coefficient matrices of the Lax pair.

The good Boussinesq system evolves a pair (u, v); a snapshot of that pair
(with enough derivatives) is an :class:`InitialData`.  From a snapshot
this module builds, at any (x, k):

* the companion-form Lax matrices ``lax_x_companion`` / ``lax_t_companion``
  (cubic symbol plus potential terms);
* the dressed, decaying coefficient matrices U = U2/k^2 + U1/k and
  V = V2/k^2 + V1/k + V0 together with their exact rank-structured
  coefficient matrices;
* the k-independent conjugated matrix ``utilde_matrix`` whose only nonzero
  row is the third.

Snapshots at t > 0 are produced by the evolution module and fed through
the same constructors; nothing here depends explicitly on time.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import make_interp_spline

from .algebra import OMEGA, OMEGA2, SQRT3, companion_symbol, dressing_inverse, dressing_matrix
from .errors import ZeroMeanViolation
from .numerics import gl_doubling

__all__ = [
    "InitialData",
    "PotentialMatrices",
    "builtin",
    "from_samples",
    "v0_from_u1",
    "good_boussinesq_map",
    "inverse_good_boussinesq_map",
    "usf_matrix",
    "vsf_matrix",
    "utilde_matrix",
    "lax_x_companion",
    "lax_t_companion",
]

# row-patterned rank-one matrices appearing in the U/V decompositions
_ROWS_A = np.array([[OMEGA, OMEGA2, 1.0]] * 3)
_ROWS_B = np.array([[OMEGA2, OMEGA, 1.0]] * 3)
_V0_PATTERN = np.array(
    [[0.0, OMEGA, OMEGA2], [OMEGA2, 0.0, OMEGA], [OMEGA, OMEGA2, 0.0]]
)
_V1_V_PATTERN = np.array(
    [[-2.0 * OMEGA2, OMEGA2, OMEGA2], [OMEGA, -2.0 * OMEGA, OMEGA], [1.0, 1.0, -2.0]]
)
_V1_UX_PATTERN = np.array(
    [[0.0, 1.0, -1.0], [-OMEGA2, 0.0, OMEGA2], [OMEGA, -OMEGA, 0.0]]
)


class InitialData:
    """A snapshot (u, v) of the good Boussinesq system with derivatives.

    All evaluators are vectorized over numpy arrays, real-valued for real
    input, and return exactly 0 outside ``[-support_radius, support_radius]``.
    Instances are immutable in practice (treat them as frozen); they are
    safe to share across threads/processes.
    """

    def __init__(
        self,
        u0: Callable[[np.ndarray], np.ndarray],
        v0: Callable[[np.ndarray], np.ndarray],
        u0x: Callable[[np.ndarray], np.ndarray],
        u0xx: Callable[[np.ndarray], np.ndarray],
        v0x: Callable[[np.ndarray], np.ndarray],
        support_radius: float,
        label: str = "custom",
    ):
        self.u0 = u0
        self.v0 = v0
        self.u0x = u0x
        self.u0xx = u0xx
        self.v0x = v0x
        self.support_radius = float(support_radius)
        self.label = label
        self._table_cache: dict = {}

    def combined_weight(self, x: np.ndarray) -> np.ndarray:
        """The second scalar coefficient u0x + v0 feeding every sweep."""
        return self.u0x(x) + self.v0(x)

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"InitialData(label={self.label!r}, support_radius={self.support_radius})"


def _masked(radius: float, fn: Callable[[np.ndarray], np.ndarray]):
    """Wrap fn so it evaluates only strictly inside (-radius, radius) and
    returns exactly 0 elsewhere (scalar or array input)."""

    def wrapped(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros_like(x)
        inside = np.abs(x) < radius
        if np.any(inside):
            out[inside] = fn(x[inside])
        return out[0] if scalar else out

    return wrapped


def _bump_pair() -> InitialData:
    """Compactly supported pair on (-1, 1): a cosine-modulated mollifier
    bump and a tilted copy of the same mollifier.  Derivatives are coded
    analytically because u0x feeds the dominant coefficient matrix."""

    def envelope(x):
        return np.exp(-2.0 / (1.0 - x * x))

    def mu(x):  # envelope'(x) = mu(x) * envelope(x)
        return -4.0 * x / (1.0 - x * x) ** 2

    def mu_prime(x):
        return -4.0 * (1.0 + 3.0 * x * x) / (1.0 - x * x) ** 3

    def u0(x):
        return (1.0 + np.cos(3.0 * x)) * envelope(x)

    def u0x(x):
        e = envelope(x)
        return (-3.0 * np.sin(3.0 * x) + (1.0 + np.cos(3.0 * x)) * mu(x)) * e

    def u0xx(x):
        e = envelope(x)
        m = mu(x)
        return (
            -9.0 * np.cos(3.0 * x)
            - 6.0 * np.sin(3.0 * x) * m
            + (1.0 + np.cos(3.0 * x)) * (m * m + mu_prime(x))
        ) * e

    def v0(x):
        return (1.0 + x) * envelope(x)

    def v0x(x):
        return (1.0 + (1.0 + x) * mu(x)) * envelope(x)

    return InitialData(
        _masked(1.0, u0),
        _masked(1.0, v0),
        _masked(1.0, u0x),
        _masked(1.0, u0xx),
        _masked(1.0, v0x),
        support_radius=1.0,
        label="bump",
    )


def _gaussian_pair(truncation: float = 1e-14) -> InitialData:
    """Truncated Gaussian pair (Schwartz data clipped where it drops below
    the truncation threshold)."""
    a, b, s = 0.8, 0.5, 4.0

    def u0(x):
        return a * np.exp(-s * x * x)

    def u0x(x):
        return -2.0 * s * x * u0(x)

    def u0xx(x):
        return (4.0 * s * s * x * x - 2.0 * s) * u0(x)

    def v0(x):
        return b * x * np.exp(-s * x * x)

    def v0x(x):
        return b * (1.0 - 2.0 * s * x * x) * np.exp(-s * x * x)

    grid = np.linspace(0.0, 10.0, 20001)
    big = np.abs(u0(grid)) + np.abs(v0(grid)) > truncation
    radius = float(grid[big][-1]) + 1e-3 if np.any(big) else 0.5
    return InitialData(
        _masked(radius, u0),
        _masked(radius, v0),
        _masked(radius, u0x),
        _masked(radius, u0xx),
        _masked(radius, v0x),
        support_radius=radius,
        label="gaussian",
    )


def _zero_pair() -> InitialData:
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    return InitialData(zero, zero, zero, zero, zero, support_radius=0.5, label="zero")


def builtin(name: str, truncation: float = 1e-14) -> InitialData:
    """Catalog of built-in snapshots: "bump", "gaussian", "zero"."""
    if name == "bump":
        return _bump_pair()
    if name == "gaussian":
        return _gaussian_pair(truncation)
    if name == "zero":
        return _zero_pair()
    raise KeyError(f"unknown builtin initial data {name!r}")


def scale(data: InitialData, factor: float) -> InitialData:
    """The snapshot (factor*u0, factor*v0) with matching derivatives."""
    return InitialData(
        u0=lambda x: factor * data.u0(x),
        v0=lambda x: factor * data.v0(x),
        u0x=lambda x: factor * data.u0x(x),
        u0xx=lambda x: factor * data.u0xx(x),
        v0x=lambda x: factor * data.v0x(x),
        support_radius=data.support_radius,
        label=f"{factor:g}*{data.label}",
    )


def _is_uniform(x: np.ndarray) -> bool:
    d = np.diff(x)
    return bool(np.all(np.abs(d - d[0]) < 1e-12 * max(1.0, abs(d[0])))) if len(d) else False


def from_samples(
    x: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    truncation: float = 1e-14,
    label: str = "samples",
) -> InitialData:
    """Build a snapshot from grid samples.

    Values are interpolated with quintic splines.  On a uniform grid the
    derivative samples are produced by spectral differentiation (treating
    the span as one period — valid because the data is effectively
    compactly supported inside it); otherwise spline derivatives are used.
    The support radius is set where |u| + |v| last exceeds ``truncation``.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.ndim != 1 or x.size < 12 or u.shape != x.shape or v.shape != x.shape:
        raise ValueError("need matching 1-d sample arrays with at least 12 points")
    if not np.all(np.diff(x) > 0):
        raise ValueError("sample grid must be strictly increasing")

    if _is_uniform(x):
        span = (x[-1] - x[0]) * (1.0 + 1.0 / (len(x) - 1))
        xi = 2.0j * np.pi * np.fft.rfftfreq(len(x), d=span / len(x)) / 1.0
        # d = grid step; rfftfreq*2pi*i gives the spectral derivative symbol
        def spectral_diff(f, order):
            fh = np.fft.rfft(f)
            return np.fft.irfft(fh * xi**order, n=len(x))

        ux = spectral_diff(u, 1)
        uxx = spectral_diff(u, 2)
        vx = spectral_diff(v, 1)
    else:
        su = make_interp_spline(x, u, k=5)
        sv = make_interp_spline(x, v, k=5)
        ux = su.derivative(1)(x)
        uxx = su.derivative(2)(x)
        vx = sv.derivative(1)(x)

    mass = np.abs(u) + np.abs(v)
    hot = mass > truncation
    radius = float(np.max(np.abs(x[hot]))) if np.any(hot) else 0.5
    radius = min(radius + 2.0 * (x[1] - x[0]), float(max(abs(x[0]), abs(x[-1]))))

    def spline_eval(samples):
        spl = make_interp_spline(x, samples, k=5)
        lo, hi = x[0], x[-1]

        def fn(xx):
            xx = np.clip(xx, lo, hi)
            return spl(xx)

        return _masked(radius, fn)

    return InitialData(
        spline_eval(u),
        spline_eval(v),
        spline_eval(ux),
        spline_eval(uxx),
        spline_eval(vx),
        support_radius=radius,
        label=label,
    )


def v0_from_u1(
    u1: Callable[[np.ndarray], np.ndarray],
    support_radius: float,
    mean_tol: float = 1e-10,
    n_samples: int = 8192,
) -> Callable[[np.ndarray], np.ndarray]:
    """Second member of the pair from a time-derivative slice:
    v0(x) = integral of u1 from -infinity to x.

    Requires u1 to have zero total integral (otherwise v0 cannot decay at
    +infinity and the construction is meaningless): raises
    ZeroMeanViolation when the quadrature mass exceeds ``mean_tol``.
    """
    r = float(support_radius)
    total, _, _ = gl_doubling(lambda xs: np.asarray(u1(xs)), -r, r, tol=1e-13)
    scale = max(1.0, float(np.max(np.abs(u1(np.linspace(-r, r, 101))))))
    if abs(complex(total)) > mean_tol * scale:
        raise ZeroMeanViolation(
            f"time-derivative slice has nonzero mean {complex(total).real:.3e}"
        )
    grid = np.linspace(-r, r, n_samples)
    anti = make_interp_spline(grid, np.asarray(u1(grid), dtype=float), k=5).antiderivative()
    lo_val = float(anti(grid[0]))

    def v0(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = anti(np.clip(x, -r, r)) - lo_val
        out[x <= -r] = 0.0
        out[x >= r] = 0.0  # zero mean => antiderivative returns to 0
        return float(out[0]) if scalar else out

    return v0


def good_boussinesq_map(u: Callable[[np.ndarray], np.ndarray]):
    """Carry a solution of the classical normalization to the "good"
    normalization used here: u_hat(x) = (4/sqrt(3)) u(x / 3**(1/4)) + 1/2."""
    c = 3.0 ** (-0.25)
    return lambda x: (4.0 / SQRT3) * np.asarray(u(np.asarray(x) * c)) + 0.5


def inverse_good_boussinesq_map(u_hat: Callable[[np.ndarray], np.ndarray]):
    """Inverse of :func:`good_boussinesq_map`."""
    c = 3.0 ** 0.25
    return lambda x: (SQRT3 / 4.0) * (np.asarray(u_hat(np.asarray(x) * c)) - 0.5)


class PotentialMatrices(NamedTuple):
    """Value and exact coefficient matrices of the dressed Lax coefficients
    at one (x, k): U = U2/k^2 + U1/k and V = V2/k^2 + V1/k + V0."""

    U: np.ndarray
    U1: np.ndarray
    U2: np.ndarray
    V: np.ndarray
    V0: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    Utilde: np.ndarray


def utilde_matrix(data: InitialData, x: float) -> np.ndarray:
    """k-independent conjugated coefficient P U P^{-1}; only the third row
    is nonzero: (-u0x - v0, -2 u0, 0)."""
    out = np.zeros((3, 3), dtype=complex)
    out[2, 0] = -(data.u0x(x) + data.v0(x))
    out[2, 1] = -2.0 * data.u0(x)
    return out


def potential_matrices(data: InitialData, x: float, k: complex) -> PotentialMatrices:
    """All coefficient matrices at one point; k must be nonzero."""
    if k == 0:
        # route the error through the dressing inverse for a uniform message
        dressing_inverse(k)
    u = float(np.real(data.u0(x)))
    v = float(np.real(data.v0(x)))
    ux = float(np.real(data.u0x(x)))
    uxx = float(np.real(data.u0xx(x)))
    vx = float(np.real(data.v0x(x)))

    u2 = -(v + ux) / 3.0 * _ROWS_A
    u1 = -(2.0 * u / 3.0) * _ROWS_B
    big_u = u2 / (k * k) + u1 / k

    v2 = (-3.0 * vx + uxx) / 9.0 * _ROWS_A
    v0 = (2.0 * u / 3.0) * _V0_PATTERN
    v1 = (v / 3.0) * _V1_V_PATTERN + ((1.0 - OMEGA) * ux / 9.0) * _V1_UX_PATTERN
    big_v = v2 / (k * k) + v1 / k + v0

    ut = np.zeros((3, 3), dtype=complex)
    ut[2, 0] = -(ux + v)
    ut[2, 1] = -2.0 * u
    return PotentialMatrices(big_u, u1, u2, big_v, v0, v1, v2, ut)


def usf_matrix(data: InitialData, x: float, k: complex) -> PotentialMatrices:
    """Dressed x-part coefficient (and friends); see PotentialMatrices."""
    return potential_matrices(data, x, k)


def vsf_matrix(data: InitialData, x: float, k: complex) -> np.ndarray:
    """Dressed t-part coefficient V(x, k)."""
    return potential_matrices(data, x, k).V


def lax_x_companion(data: InitialData, x: float, k: complex) -> np.ndarray:
    """Companion-form x-part matrix: cubic symbol plus potential row."""
    out = companion_symbol(k)
    out[2, 0] += -(data.u0x(x) + data.v0(x))
    out[2, 1] += -2.0 * data.u0(x)
    return out


def lax_t_companion(data: InitialData, x: float, k: complex) -> np.ndarray:
    """Companion-form t-part matrix (traceless, cubic symbol twice)."""
    u = float(np.real(data.u0(x)))
    v = float(np.real(data.v0(x)))
    ux = float(np.real(data.u0x(x)))
    uxx = float(np.real(data.u0xx(x)))
    vx = float(np.real(data.v0x(x)))
    k3 = k**3
    return np.array(
        [
            [4.0 * u / 3.0, 0.0, 1.0],
            [k3 + ux / 3.0 - v, -2.0 * u / 3.0, 0.0],
            [uxx / 3.0 - vx, k3 - ux / 3.0 - v, -2.0 * u / 3.0],
        ]
    )


def dressed_oracle_v(data: InitialData, x: float, k: complex) -> np.ndarray:
    """Independent route to V: conjugate the companion t-part by the
    dressing matrix and subtract the diagonal weight (used in tests)."""
    p = dressing_matrix(k)
    pinv = dressing_inverse(k)
    from .algebra import phase_matrices

    _, zmat = phase_matrices(k)
    return pinv @ lax_t_companion(data, x, k) @ p - zmat
