"""Small numerical utilities shared across modules.

Gauss-Legendre panels with node doubling, Richardson extrapolation with a
general Vandermonde elimination, and barycentric interpolation data for
Legendre nodes (Berrut & Trefethen, SIAM Review 46, 2004).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import ExtrapolationRefused

_leggauss_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _leggauss_cache:
        _leggauss_cache[n] = np.polynomial.legendre.leggauss(n)
    return _leggauss_cache[n]


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [a, b]."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def gl_doubling(
    fun: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-12,
    n0: int = 64,
    nmax: int = 4096,
) -> tuple[np.ndarray, int, float]:
    """Integrate ``fun`` over [a, b], doubling the Gauss node count until
    two successive approximations agree to ``tol`` (sup norm, relative to
    max(1, |I|)).

    ``fun`` maps an array of abscissae to an array whose *last* axis runs
    over the abscissae; the integral is taken along that axis.  Returns
    (integral, nodes_used, last_delta).
    """
    x, w = gauss_legendre(n0, a, b)
    val = np.tensordot(fun(x), w, axes=([-1], [0]))
    n = n0
    while True:
        n2 = 2 * n
        x, w = gauss_legendre(n2, a, b)
        val2 = np.tensordot(fun(x), w, axes=([-1], [0]))
        delta = float(np.max(np.abs(val2 - val)))
        scale = max(1.0, float(np.max(np.abs(val2))))
        if delta <= tol * scale:
            return val2, n2, delta
        val, n = val2, n2
        if n >= nmax:
            return val, n, delta


def richardson_weights(hs: Sequence[float]) -> np.ndarray:
    """Coefficients c_i with sum 1 and sum c_i * h_i**p = 0 for
    p = 1 .. len(hs)-1: the Vandermonde elimination of the leading error
    powers.  For hs = (h, 2h, 4h) this gives (8, -6, 1)/3."""
    hs = np.asarray(hs, dtype=float)
    m = len(hs)
    if m < 2:
        raise ExtrapolationRefused("need at least two step sizes")
    if np.any(hs <= 0) or len(set(hs.tolist())) != m:
        raise ExtrapolationRefused("step sizes must be positive and distinct")
    # rows: powers 0..m-1 of each h; rhs selects the h->0 value
    vander = np.vander(hs, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[0] = 1.0
    return np.linalg.solve(vander, rhs)


def richardson(
    f: Callable[[float], np.ndarray | complex],
    h: float,
    levels: int = 3,
    ratio: float = 2.0,
) -> np.ndarray | complex:
    """Extrapolate f(h) -> f(0) from samples at h, ratio*h, ratio**2*h, ...

    Assumes an error expansion in integer powers of h starting at h**1;
    ``levels`` samples kill the powers h .. h**(levels-1), leaving
    O(h**levels).
    """
    if h <= 0 or levels < 2 or ratio <= 1.0:
        raise ExtrapolationRefused(
            f"invalid extrapolation parameters h={h}, levels={levels}, ratio={ratio}"
        )
    hs = [h * ratio**i for i in range(levels)]
    coeff = richardson_weights(hs)
    acc = None
    for c, hi in zip(coeff, hs):
        term = np.asarray(f(hi), dtype=complex) * c
        acc = term if acc is None else acc + term
    if acc.ndim == 0:
        return complex(acc)
    return acc


def gl_barycentric(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reference Gauss-Legendre nodes/weights on [-1, 1] plus barycentric
    interpolation weights beta_j = (-1)**j * sqrt((1 - x_j^2) w_j)."""
    x, w = _leggauss(n)
    beta = np.sqrt((1.0 - x * x) * w)
    beta[1::2] *= -1.0
    return x, w, beta


def interp_matrix(x_src: np.ndarray, beta: np.ndarray, x_tgt: np.ndarray) -> np.ndarray:
    """Barycentric interpolation matrix L with L @ f(x_src) == f(x_tgt)
    for polynomials up to degree len(x_src)-1.

    Nodes coinciding with a source node (to ~1e-14) get an exact-hit row.
    """
    diff = x_tgt[:, None] - x_src[None, :]
    hit = np.abs(diff) < 1e-14
    safe = np.where(hit, 1.0, diff)
    terms = beta[None, :] / safe
    terms[hit.any(axis=1)] = 0.0
    denom = terms.sum(axis=1, keepdims=True)
    denom[denom == 0.0] = 1.0
    out = terms / denom
    rows, cols = np.nonzero(hit)
    out[rows] = 0.0
    out[rows, cols] = 1.0
    return out


def cheb_lobatto(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev-Lobatto nodes on [a, b] (n+1 points, ascending) and their
    barycentric interpolation weights."""
    if n < 1:
        raise ValueError("need at least two Lobatto nodes")
    j = np.arange(n + 1)
    ref = np.cos(np.pi * j / n)[::-1]  # ascending
    beta = np.where((j == 0) | (j == n), 0.5, 1.0) * (-1.0) ** j
    return a + 0.5 * (b - a) * (ref + 1.0), beta[::-1].copy()


def cheb_diff(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Spectral differentiation on the Chebyshev-Lobatto grid.

    Returns (nodes, D) with nodes ascending in [a, b] and D @ f(nodes)
    the derivative of the degree-n interpolant at the nodes.
    """
    if n < 1:
        raise ValueError("need at least two Lobatto nodes")
    j = np.arange(n + 1)
    x = np.cos(np.pi * j / n)  # classical descending layout
    c = np.where((j == 0) | (j == n), 2.0, 1.0) * (-1.0) ** j
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    d = np.outer(c, 1.0 / c) / dx
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    d = d[::-1, ::-1] * (2.0 / (b - a))  # ascending nodes, physical scale
    nodes = a + 0.5 * (b - a) * (x[::-1] + 1.0)
    return nodes, d
