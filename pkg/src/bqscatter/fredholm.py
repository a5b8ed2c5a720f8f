"""Sector eigenfunctions by Fredholm integral equations.

Each of the six sectors of the spectral fan carries a 3x3 solution
normalized to the identity, defined column by column through integral
equations whose contours keep every exponential bounded.  The equations
are discretized with a Nystrom scheme built on product quadrature: the
kernel jumps across the diagonal, so every integral is split at the
evaluation point and each side is integrated with its own Gauss rule,
interpolating the unknown from the global nodes.  On top of the solver
this module provides the Fredholm determinants and their truncated-series
oracle, the triangular factorizations of the transition matrix, the ray
jump residual, the weighted row vector, and potential recovery from the
large-k limit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import minimize

from . import rh_data
from .algebra import (
    OMEGA,
    OMEGA2,
    SECTOR_ASCENDING,
    dressing_inverse,
    dressing_matrix,
    minor2,
    sector_of,
    x_weights,
)
from .errors import (
    AssumptionViolation,
    BqscatterError,
    DomainViolation,
    FredholmSingular,
)
from .numerics import (
    cheb_diff,
    cheb_lobatto,
    gauss_legendre,
    gl_barycentric,
    interp_matrix,
    richardson_weights,
)
from .potentials import InitialData
from .scattering import reflection_pair, scattering, solve_eigenfunction, transition_entry

__all__ = [
    "NystromSystem",
    "MSolver",
    "solve_M",
    "fredholm_det",
    "fredholm_det_series",
    "zero_scan",
    "sn_tn",
    "jump_residual",
    "n_row",
    "recover_u",
    "m1_from_eigenfunctions",
]

#: starting / maximal global node counts for the Nystrom grid
NODES0 = 96
NODES_MAX = 768
#: off-node residual the discretization must reach
RESID_TOL = 1e-8
#: |determinant| below this is treated as a Fredholm singularity
DET_FLOOR = 1e-10
#: per-panel quadrature size cap
PANEL_MAX = 512

_RAY_TOL = 1e-9
_N_WEIGHTS = np.array([OMEGA, OMEGA2, 1.0])

_E1 = np.zeros((3, 3))
_E1[2, 0] = 1.0
_E2 = np.zeros((3, 3))
_E2[2, 1] = 1.0


def _directions(n: int, j0: int) -> np.ndarray:
    """Boolean "integrate from -infinity" flag per row for column j0 in
    sector n (strict real-part ordering of the open sector, extended to
    its closure by continuity)."""
    rank = {l: pos for pos, l in enumerate(SECTOR_ASCENDING[n])}
    return np.array([rank[i] < rank[j0] for i in range(3)])


def _interaction_factors(k: complex) -> tuple[np.ndarray, np.ndarray]:
    """(cu, cw) with the interaction matrix equal to -2 u(x) cu - w(x) cw."""
    p = dressing_matrix(k)
    pinv = dressing_inverse(k)
    return pinv @ _E2 @ p, pinv @ _E1 @ p


def _u_values(data: InitialData, k: complex, xs: np.ndarray) -> np.ndarray:
    """Interaction matrix at the points xs, shaped (3, 3, len(xs))."""
    cu, cw = _interaction_factors(k)
    u = np.asarray(data.u0(xs), dtype=float)
    w = np.asarray(data.combined_weight(xs), dtype=float)
    return -2.0 * u * cu[:, :, None] - w * cw[:, :, None]


def _kernel_pairs(
    data: InitialData,
    j: int,
    k: complex,
    down: np.ndarray,
    xa: np.ndarray,
    xb: np.ndarray,
) -> np.ndarray:
    """Column-j kernel evaluated at paired points, shaped (3, 3, m).

    The Heaviside split is applied exactly: entries whose contour runs
    from -infinity vanish for xb >= xa, the others (with a minus sign)
    vanish for xb <= xa.  Excluded exponentials are clamped before
    exponentiation so no overflow leaks in from the dead branch.
    """
    ls = x_weights(k)
    d = xa - xb
    uv = _u_values(data, k, xb)
    out = np.empty((3, 3, d.size), dtype=complex)
    for i in range(3):
        expo = (ls[i] - ls[j - 1]) * d
        if down[i]:
            phase = np.exp(np.where(d > 0, expo, -np.inf))
        else:
            phase = -np.exp(np.where(d < 0, expo, -np.inf))
        out[i] = phase * uv[i]
    return out


def _validate_point(n: int, k: complex) -> None:
    if not 1 <= n <= 6:
        raise ValueError("sector index must be in 1..6")
    if k == 0:
        raise DomainViolation("the sector solutions are not defined at k = 0")
    point = sector_of(k, ray_rtol=_RAY_TOL)
    on_closure = (point.kind == "sector" and point.index == n) or (
        point.kind == "ray" and point.index in (n, n % 6 + 1)
    )
    if not on_closure:
        raise DomainViolation(
            f"k = {k:.6g} lies outside the closure of sector {n}"
        )


def _panel_size(k: complex, r: float) -> int:
    return min(PANEL_MAX, max(64, int(1.1 * math.sqrt(3.0) * abs(k) * r) + 32))


def _start_nodes(k: complex, r: float, n_max: int) -> int:
    periods = math.sqrt(3.0) * abs(k) * r / math.pi
    n = NODES0
    while n < n_max and n < 8.0 * periods:
        n *= 2
    return n


@dataclass(frozen=True)
class NystromSystem:
    """Discretized integral equation for one column in one sector.

    ``kernel`` is the product-quadrature operator acting on nodal values
    (flat index i * N + q for component i at node q), ``solution`` the
    solved nodal column, and ``residual`` the off-node defect between the
    natural interpolant and barycentric reinterpolation of the solution.
    """

    sector: int
    column: int
    k: complex
    nodes: np.ndarray
    weights: np.ndarray
    kernel: np.ndarray
    solution: np.ndarray
    residual: float
    panel_nodes: int
    det: complex


def _build_system(
    data: InitialData,
    n: int,
    j: int,
    k: complex,
    n_nodes: int,
    m_panel: int,
) -> NystromSystem:
    j0 = j - 1
    down = _directions(n, j0)
    ls = x_weights(k)
    r = data.support_radius
    xs, ws = gauss_legendre(n_nodes, -r, r)
    _, _, beta = gl_barycentric(n_nodes)
    mt, mw = gauss_legendre(m_panel)

    rows_down = [i for i in range(3) if down[i]]
    rows_up = [i for i in range(3) if not down[i]]
    kernel = np.zeros((3 * n_nodes, 3 * n_nodes), dtype=complex)
    for q, xq in enumerate(xs):
        for lo, hi, rows, sign in (
            (-r, xq, rows_down, 1.0),
            (xq, r, rows_up, -1.0),
        ):
            if not rows or hi - lo <= 0.0:
                continue
            half = 0.5 * (hi - lo)
            xi = lo + half * (mt + 1.0)
            wxi = half * mw
            interp = interp_matrix(xs, beta, xi)
            uv = _u_values(data, k, xi)
            for i in rows:
                weighted = (wxi * np.exp((ls[i] - ls[j0]) * (xq - xi)))[:, None] * interp
                for l in range(3):
                    kernel[i * n_nodes + q, l * n_nodes : (l + 1) * n_nodes] += (
                        sign * (uv[i, l] @ weighted)
                    )

    rhs = np.zeros(3 * n_nodes, dtype=complex)
    rhs[j0 * n_nodes : (j0 + 1) * n_nodes] = 1.0
    system = np.eye(3 * n_nodes) - kernel
    lu, piv = lu_factor(system, check_finite=False)
    det = complex(np.prod(np.diag(lu)))
    if abs(det) < DET_FLOOR:
        raise FredholmSingular(
            f"column {j} system in sector {n} is singular at k = {k:.6g} "
            "(possible soliton)"
        )
    solution = lu_solve((lu, piv), rhs, check_finite=False).reshape(3, n_nodes)

    # off-node defect: the natural interpolant solves the equation at any
    # x by construction, so its gap to barycentric reinterpolation of the
    # nodal values estimates the discretization error
    probes = -r + 2.0 * r * np.array([0.04, 0.17, 0.29, 0.41, 0.52, 0.63, 0.77, 0.88, 0.97])
    partial = NystromSystem(
        sector=n, column=j, k=k, nodes=xs, weights=ws, kernel=kernel,
        solution=solution, residual=math.inf, panel_nodes=m_panel, det=det,
    )
    direct = np.stack([_eval_column(data, partial, x) for x in probes], axis=1)
    reinterp = solution @ interp_matrix(xs, beta, probes).T
    residual = float(np.max(np.abs(direct - reinterp)))
    return NystromSystem(
        sector=n, column=j, k=k, nodes=xs, weights=ws, kernel=kernel,
        solution=solution, residual=residual, panel_nodes=m_panel, det=det,
    )


def _eval_column(data: InitialData, system: NystromSystem, x: float) -> np.ndarray:
    """Natural Nystrom interpolant of the column at arbitrary x."""
    n = system.sector
    j0 = system.column - 1
    down = _directions(n, j0)
    ls = x_weights(system.k)
    r = data.support_radius
    xs = system.nodes
    _, _, beta = gl_barycentric(xs.size)
    mt, mw = gauss_legendre(system.panel_nodes)

    out = np.zeros(3, dtype=complex)
    out[j0] = 1.0
    for lo, hi, sign, use_down in (
        (-r, min(x, r), 1.0, True),
        (max(x, -r), r, -1.0, False),
    ):
        if hi - lo <= 0.0:
            continue
        half = 0.5 * (hi - lo)
        xi = lo + half * (mt + 1.0)
        wxi = half * mw
        values = system.solution @ interp_matrix(xs, beta, xi).T  # (3, m)
        uv = _u_values(data, system.k, xi)
        forced = np.einsum("ilm,lm->im", uv, values)
        for i in range(3):
            if down[i] != use_down:
                continue
            out[i] += sign * np.sum(wxi * np.exp((ls[i] - ls[j0]) * (x - xi)) * forced[i])
    return out


def _solve_column(
    data: InitialData,
    n: int,
    j: int,
    k: complex,
    *,
    n0: int | None = None,
    n_max: int = NODES_MAX,
    resid_tol: float = RESID_TOL,
) -> NystromSystem:
    r = data.support_radius
    m_panel = _panel_size(k, r)
    n_nodes = n0 if n0 is not None else _start_nodes(k, r, n_max)
    while True:
        system = _build_system(data, n, j, k, n_nodes, m_panel)
        if system.residual <= resid_tol or n_nodes >= n_max:
            break
        n_nodes *= 2
    if system.residual > resid_tol:
        raise BqscatterError(
            f"Nystrom discretization stalled at {n_nodes} nodes "
            f"(off-node residual {system.residual:.3g}) for sector {n}, "
            f"column {j}, k = {k:.6g}"
        )
    return system


class MSolver:
    """Sector solution at a fixed spectral point, reusable across x.

    Solving the dense Nystrom system once per column makes repeated
    evaluations along the line cheap, which is what the jump checks and
    the potential recovery need.
    """

    def __init__(
        self,
        data: InitialData,
        n: int,
        k: complex,
        *,
        t: float = 0.0,
        columns: tuple[int, ...] = (1, 2, 3),
        n0: int | None = None,
        n_max: int = NODES_MAX,
        resid_tol: float = RESID_TOL,
    ) -> None:
        _validate_point(n, k)
        self.data = data
        self.sector = n
        self.k = k
        self.t = t
        self.systems = {
            j: _solve_column(data, n, j, k, n0=n0, n_max=n_max, resid_tol=resid_tol)
            for j in columns
        }

    def column(self, j: int, x: float) -> np.ndarray:
        if j not in self.systems:
            raise ValueError(f"column {j} was not requested from this solver")
        return _eval_column(self.data, self.systems[j], x)

    def matrix(self, x: float) -> np.ndarray:
        cols = [self.column(j, x) for j in (1, 2, 3)]
        return np.stack(cols, axis=1)


def solve_M(
    data: InitialData,
    n: int,
    x: float,
    t: float,
    k: complex,
    **kwargs,
) -> np.ndarray:
    """Sector-n solution at one (x, k); ``data`` must already be the
    snapshot at time t (the x-equation is all the integral equation
    uses)."""
    return MSolver(data, n, k, t=t, **kwargs).matrix(x)


# ---------------------------------------------------------------------------
# Fredholm determinants
# ---------------------------------------------------------------------------


def _require_first_closure(k: complex) -> None:
    if k == 0:
        raise DomainViolation("determinants are not defined at k = 0")
    point = sector_of(k, ray_rtol=_RAY_TOL)
    ok = (point.kind == "sector" and point.index == 1) or (
        point.kind == "ray" and point.index in (1, 2)
    )
    if not ok:
        raise DomainViolation(
            f"k = {k:.6g} must lie in the closure of the first sector; "
            "other sectors follow by symmetry"
        )


def _det_value(data: InitialData, j: int, k: complex, n_nodes: int) -> complex:
    down = _directions(1, j - 1)
    r = data.support_radius
    xs, ws = gauss_legendre(n_nodes, -r, r)
    ls = x_weights(k)
    d = xs[:, None] - xs[None, :]
    uv = _u_values(data, k, xs)
    sq = np.sqrt(ws)
    sym = sq[:, None] * sq[None, :]
    block = np.zeros((3 * n_nodes, 3 * n_nodes), dtype=complex)
    for i in range(3):
        expo = (ls[i] - ls[j - 1]) * d
        if down[i]:
            phase = np.exp(np.where(d > 0, expo, -np.inf))
        else:
            phase = -np.exp(np.where(d < 0, expo, -np.inf))
        base = phase * sym
        for l in range(3):
            block[i * n_nodes : (i + 1) * n_nodes, l * n_nodes : (l + 1) * n_nodes] = (
                base * uv[i, l][None, :]
            )
    return complex(np.linalg.det(np.eye(3 * n_nodes) - block))


def fredholm_det(
    data: InitialData,
    j: int,
    k: complex,
    *,
    n0: int = NODES0,
    n_max: int = 384,
    tol: float = 1e-7,
) -> complex:
    """Fredholm determinant of the column-j equation at k in the closure
    of the first sector, via the weight-symmetrized Nystrom determinant
    with node doubling."""
    if j not in (1, 2, 3):
        raise ValueError("column index must be 1, 2 or 3")
    _require_first_closure(k)
    n_nodes = n0
    value = _det_value(data, j, k, n_nodes)
    while n_nodes < n_max:
        n_nodes *= 2
        nxt = _det_value(data, j, k, n_nodes)
        if abs(nxt - value) <= tol * max(1.0, abs(nxt)):
            return nxt
        value = nxt
    return value


def _simplex_rule(r: float, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Iterated Gauss rule on the ordered simplex r >= a1 >= a2 >= a3 >= -r."""
    t, w = gauss_legendre(m)
    a1 = -r + (r - (-r)) * 0.5 * (t + 1.0)
    w1 = (2.0 * r) * 0.5 * w
    A1 = np.repeat(a1, m * m)
    W1 = np.repeat(w1, m * m)
    half2 = 0.5 * (a1 + r)
    a2 = (-r + half2[:, None] * (t[None, :] + 1.0)).ravel()
    w2 = (half2[:, None] * w[None, :]).ravel()
    A2 = np.repeat(a2, m)
    W2 = np.repeat(w2, m)
    half3 = 0.5 * (a2 + r)
    A3 = (-r + half3[:, None] * (t[None, :] + 1.0)).ravel()
    W3 = (half3[:, None] * w[None, :]).ravel()
    return A1, A2, A3, W1 * W2 * W3


def fredholm_det_series(
    data: InitialData,
    j: int,
    k: complex,
    *,
    n_quad: int = 40,
) -> complex:
    """First terms of the Fredholm series (independent oracle).

    The kernel vanishes on the diagonal, so the first-order trace term is
    identically zero and the truncation reads 1 - tau2/2 - tau3/3 with
    tau_m the m-fold trace integrals, each evaluated over the regions
    where the Heaviside pattern is constant.
    """
    if j not in (1, 2, 3):
        raise ValueError("column index must be 1, 2 or 3")
    _require_first_closure(k)
    down = _directions(1, j - 1)
    r = data.support_radius
    t, w = gauss_legendre(n_quad)

    xo, wo = gauss_legendre(n_quad, -r, r)
    tau2 = 0.0 + 0.0j
    for lo, hi in ((np.full_like(xo, -r), xo), (xo, np.full_like(xo, r))):
        half = 0.5 * (hi - lo)
        ys = lo[:, None] + half[:, None] * (t[None, :] + 1.0)
        wy = half[:, None] * w[None, :]
        xa = np.repeat(xo, n_quad)
        ww = (wo[:, None] * wy).ravel()
        yb = ys.ravel()
        k1 = _kernel_pairs(data, j, k, down, xa, yb)
        k2 = _kernel_pairs(data, j, k, down, yb, xa)
        tau2 += np.sum(ww * np.einsum("ilm,lim->m", k1, k2))

    a1, a2, a3, wvol = _simplex_rule(r, min(n_quad, 32))
    tau3 = 0.0 + 0.0j
    for px, py, pz in permutations((a1, a2, a3)):
        k1 = _kernel_pairs(data, j, k, down, px, py)
        k2 = _kernel_pairs(data, j, k, down, py, pz)
        k3 = _kernel_pairs(data, j, k, down, pz, px)
        tau3 += np.sum(wvol * np.einsum("ilm,lnm,nim->m", k1, k2, k3))

    return 1.0 - tau2 / 2.0 - tau3 / 3.0


def zero_scan(
    data: InitialData,
    *,
    n_radii: int = 12,
    n_angles: int = 7,
    r_lo: float = 0.3,
    r_hi: float = 8.0,
    n_nodes: int = 64,
    floor: float = 1e-6,
) -> list[complex]:
    """Best-effort determinant-zero scan over the first closed sector.

    Winding of the determinant phase around each polar grid cell flags
    candidate zeros, which are refined by direct minimization of the
    modulus.  A candidate is reported only when re-minimizing at doubled
    resolution finds the zero again, below ``floor`` and at the same
    location: the kernel grows like 1/k^2 toward the origin, and an
    under-resolved determinant dips through zero spuriously, so the
    default annulus starts where the base node count resolves the
    determinant and unstable minima are discarded.  A heuristic, not a
    proof.
    """
    radii = np.geomspace(r_lo, r_hi, n_radii)
    angles = np.linspace(0.0, math.pi / 3.0, n_angles)
    candidates: list[complex] = []
    for j in (1, 2, 3):
        grid = np.empty((n_radii, n_angles), dtype=complex)
        for a, rad in enumerate(radii):
            for b, ang in enumerate(angles):
                grid[a, b] = _det_value(data, j, rad * cmath.exp(1j * ang), n_nodes)
        for a in range(n_radii - 1):
            for b in range(n_angles - 1):
                loop = [
                    grid[a, b],
                    grid[a + 1, b],
                    grid[a + 1, b + 1],
                    grid[a, b + 1],
                    grid[a, b],
                ]
                winding = sum(
                    np.angle(loop[s + 1] / loop[s]) for s in range(4)
                )
                if abs(winding) < math.pi:
                    continue
                center = 0.5 * (radii[a] + radii[a + 1]) * cmath.exp(
                    1j * 0.5 * (angles[b] + angles[b + 1])
                )

                def modulus(p, nn):
                    kk = complex(p[0], p[1])
                    if kk == 0:
                        return math.inf
                    return abs(_det_value(data, j, kk, nn))

                options = {"xatol": 1e-6, "fatol": 1e-12, "maxiter": 200}
                res = minimize(
                    modulus, [center.real, center.imag], args=(n_nodes,),
                    method="Nelder-Mead", options=options,
                )
                found = complex(res.x[0], res.x[1])
                inside = 0.0 <= cmath.phase(found) <= math.pi / 3.0 + 1e-9
                if res.fun >= floor or not inside:
                    continue
                if any(abs(found - c) < 1e-4 for c in candidates):
                    continue
                refine = minimize(
                    modulus, [found.real, found.imag], args=(2 * n_nodes,),
                    method="Nelder-Mead", options=options,
                )
                settled = complex(refine.x[0], refine.x[1])
                if refine.fun < floor and abs(settled - found) < 0.02 * (1.0 + abs(found)):
                    candidates.append(settled)
    return candidates


# ---------------------------------------------------------------------------
# Explicit factorizations
# ---------------------------------------------------------------------------


def sn_tn(data: InitialData, n: int, k: complex, **kwargs) -> tuple[np.ndarray, np.ndarray]:
    """The two triangular factors of the transition matrix in sector n,
    assembled from its entries and two-by-two minors."""
    if not 1 <= n <= 6:
        raise ValueError("sector index must be in 1..6")
    if k == 0:
        raise DomainViolation("factorization is not defined at k = 0")
    s = scattering(data, k, **kwargs).s
    if not np.all(np.isfinite(s)):
        raise DomainViolation(
            f"transition entries exceeded the quadrature budget at k = {k:.6g}"
        )

    def m(i: int, j: int) -> complex:
        return minor2(s, i - 1, j - 1)

    def inv(name: str, value: complex) -> complex:
        if abs(value) < 1e-12:
            raise AssumptionViolation(
                f"denominator {name} vanishes at k = {k:.6g} (possible soliton)"
            )
        return 1.0 / value

    one = 1.0 + 0.0j
    if n == 1:
        i11, i33m = inv("s11", s[0, 0]), inv("m33", m(3, 3))
        sn = [[s[0, 0], 0, 0],
              [s[1, 0], m(3, 3) * i11, 0],
              [s[2, 0], m(2, 3) * i11, i33m]]
        tn = [[one, -s[0, 1] * i11, m(3, 1) * i33m],
              [0, one, -m(3, 2) * i33m],
              [0, 0, one]]
    elif n == 2:
        i11, i22m = inv("s11", s[0, 0]), inv("m22", m(2, 2))
        sn = [[s[0, 0], 0, 0],
              [s[1, 0], i22m, m(3, 2) * i11],
              [s[2, 0], 0, m(2, 2) * i11]]
        tn = [[one, -m(2, 1) * i22m, -s[0, 2] * i11],
              [0, one, 0],
              [0, -m(2, 3) * i22m, one]]
    elif n == 3:
        i33, i22m = inv("s33", s[2, 2]), inv("m22", m(2, 2))
        sn = [[m(2, 2) * i33, 0, s[0, 2]],
              [m(1, 2) * i33, i22m, s[1, 2]],
              [0, 0, s[2, 2]]]
        tn = [[one, -m(2, 1) * i22m, 0],
              [0, one, 0],
              [-s[2, 0] * i33, -m(2, 3) * i22m, one]]
    elif n == 4:
        i33, i11m = inv("s33", s[2, 2]), inv("m11", m(1, 1))
        sn = [[i11m, m(2, 1) * i33, s[0, 2]],
              [0, m(1, 1) * i33, s[1, 2]],
              [0, 0, s[2, 2]]]
        tn = [[one, 0, 0],
              [-m(1, 2) * i11m, one, 0],
              [m(1, 3) * i11m, -s[2, 1] * i33, one]]
    elif n == 5:
        i22, i11m = inv("s22", s[1, 1]), inv("m11", m(1, 1))
        sn = [[i11m, s[0, 1], -m(3, 1) * i22],
              [0, s[1, 1], 0],
              [0, s[2, 1], m(1, 1) * i22]]
        tn = [[one, 0, 0],
              [-m(1, 2) * i11m, one, -s[1, 2] * i22],
              [m(1, 3) * i11m, 0, one]]
    else:
        i22, i33m = inv("s22", s[1, 1]), inv("m33", m(3, 3))
        sn = [[m(3, 3) * i22, s[0, 1], 0],
              [0, s[1, 1], 0],
              [-m(1, 3) * i22, s[2, 1], i33m]]
        tn = [[one, 0, m(3, 1) * i33m],
              [-s[1, 0] * i22, one, -m(3, 2) * i33m],
              [0, 0, one]]
    return np.array(sn, dtype=complex), np.array(tn, dtype=complex)


# ---------------------------------------------------------------------------
# Jumps, the weighted row, and recovery
# ---------------------------------------------------------------------------


def jump_residual(
    data: InitialData,
    x: float,
    t: float,
    k: complex,
    *,
    snapshot: InitialData | None = None,
    **kwargs,
) -> float:
    """Sup-norm defect of the ray jump relation at one point.

    The two sector solutions are computed from the snapshot at time t
    (``data`` itself at t = 0), while the jump matrix carries the time
    dependence through its phases and reads the reflection coefficients
    from the t = 0 data -- exactly the structure the jump relation claims.
    """
    point = sector_of(k, ray_rtol=_RAY_TOL)
    if point.kind != "ray":
        raise DomainViolation(f"k = {k:.6g} does not lie on a ray")
    if t != 0.0 and snapshot is None:
        raise ValueError("a nonzero time needs the evolved snapshot")
    ray = point.index
    source = snapshot if snapshot is not None else data
    plus = MSolver(source, ray, k, t=t, **kwargs).matrix(x)
    minus = MSolver(source, (ray - 2) % 6 + 1, k, t=t, **kwargs).matrix(x)
    v = rh_data.jump_v(
        None, ray, x, t, k, sampler=lambda which, a: reflection_pair(data, a)
    ).value
    return float(np.max(np.abs(plus - minus @ v)))


def n_row(data: InitialData, x: float, t: float, k: complex, **kwargs) -> np.ndarray:
    """The weighted row (omega, omega^2, 1) @ M, bounded at the origin."""
    point = sector_of(k, ray_rtol=_RAY_TOL)
    if point.kind == "origin":
        raise DomainViolation("the weighted row at k = 0 is a limit, not a value")
    # on a ray the counterclockwise sector's solution is the continuous choice
    return _N_WEIGHTS @ solve_M(data, point.index, x, t, k, **kwargs)


def recover_u(
    data: InitialData,
    x_grid,
    t: float = 0.0,
    *,
    radius: float = 30.0,
    angle: float = math.pi / 6.0,
    spread_tol: float = 1e-5,
    n_cheb: int | None = None,
    **kwargs,
):
    """Reconstruct u on the span of ``x_grid`` from the large-k limit.

    The limit of k (M33 - 1) is Richardson-extrapolated from |k| at one,
    two and four times ``radius`` along a fixed interior ray of the first
    sector, sampled on a Chebyshev grid spanning ``x_grid``; the spatial
    derivative is spectral and the result comes back as a callable
    evaluator.
    """
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if x_grid.size < 2:
        raise ValueError("x_grid must span an interval")
    a, b = float(x_grid.min()), float(x_grid.max())
    n = 64 if n_cheb is None else n_cheb
    xc, diff = cheb_diff(n, a, b)
    _, beta = cheb_lobatto(n, a, b)

    direction = cmath.exp(1j * angle)
    ks = [4.0 * radius * direction, 2.0 * radius * direction, radius * direction]
    samples = np.empty((3, xc.size), dtype=complex)
    for row, kk in enumerate(ks):
        solver = MSolver(data, 1, kk, t=t, columns=(3,), **kwargs)
        for col, xx in enumerate(xc):
            samples[row, col] = kk * (solver.column(3, xx)[2] - 1.0)

    h = 1.0 / (4.0 * radius)
    wts = richardson_weights(np.array([h, 2.0 * h, 4.0 * h]))
    limit3 = wts @ samples
    limit2 = 2.0 * samples[0] - samples[1]
    spread = float(np.max(np.abs(limit3 - limit2)))
    drift = float(np.max(np.abs(limit3.imag)))
    if max(spread, drift) > spread_tol:
        raise BqscatterError(
            f"the large-k extrapolation did not settle (spread {spread:.3g}, "
            f"imaginary drift {drift:.3g}); increase the radius"
        )
    values = -1.5 * (diff @ limit3.real)

    def evaluator(xq):
        xq = np.asarray(xq, dtype=float)
        scalar = xq.ndim == 0
        out = interp_matrix(xc, beta, np.atleast_1d(xq)) @ values
        return float(out[0]) if scalar else out

    evaluator.nodes = xc
    evaluator.node_values = values
    evaluator.limit_values = limit3.real
    evaluator.spread = max(spread, drift)
    return evaluator


def m1_from_eigenfunctions(data: InitialData, x: float, k: complex) -> np.ndarray:
    """First-sector solution assembled from the line eigenfunctions and
    transition entries -- the independent cross-check of the Nystrom
    route."""
    xmat = solve_eigenfunction("X", data, x, k)
    ymat = solve_eigenfunction("Y", data, x, k)
    xa = solve_eigenfunction("XA", data, x, k)
    ya = solve_eigenfunction("YA", data, x, k)
    s11 = transition_entry(data, k, 0, 0)
    sa33 = transition_entry(data, k, 2, 2, adjoint=True)
    col2 = np.array(
        [
            ya[2, 0] * xa[1, 2] - ya[1, 0] * xa[2, 2],
            ya[0, 0] * xa[2, 2] - ya[2, 0] * xa[0, 2],
            ya[1, 0] * xa[0, 2] - ya[0, 0] * xa[1, 2],
        ]
    ) / s11
    return np.stack([xmat[:, 0], col2, ymat[:, 2] / sa33], axis=1)
