"""Sweep driver for the linear ODE systems behind the scattering transform.

Every Volterra integral equation in this package differentiates to a linear
system of the form

    y'(x) = (a0 + u0(x) * bu + w(x) * bw) y(x),      w = u0' + v0,

where ``a0``, ``bu``, ``bw`` are constant complex matrices.  This module
solves such systems from a one-sided boundary condition and reports the
solution on a batch of target points.  Two implementations are available:
a compiled Dormand-Prince 5(4) kernel driven by piecewise-cubic coefficient
tables, and a pure-python fallback built on :func:`scipy.integrate.solve_ivp`.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from . import _backend
from .potentials import InitialData

RTOL_DEFAULT = 1e-11
ATOL_DEFAULT = 1e-12

# Spacing of the cubic-Hermite coefficient tables consumed by the compiled
# kernel.  The interpolation error of a C^1 cubic on smooth data scales as
# h^4, so 2.5e-4 keeps table error well below the integrator tolerances.
_TABLE_STEP = 2.5e-4


def hermite_table(data: InitialData, key: str) -> tuple[float, float, np.ndarray]:
    """Piecewise-cubic coefficient table of ``u0`` (key ``"u"``) or ``u0'+v0``
    (key ``"w"``) on the support interval, cached on the data object.

    Returns ``(lo, h, coef)`` where ``coef[i]`` holds the coefficients
    ``(c0, c1, c2, c3)`` of the cubic on cell ``[lo+i*h, lo+(i+1)*h]``
    expressed in the local variable ``x - (lo + i*h)``.  Evaluation outside
    the table is exactly zero, which is correct for compactly supported data.
    """
    cached = data._table_cache.get(key)
    if cached is not None:
        return cached
    radius = data.support_radius
    if radius <= 0.0:
        table = (-1.0, 2.0, np.zeros((1, 4)))
        data._table_cache[key] = table
        return table
    n_cells = max(16, int(np.ceil(2.0 * radius / _TABLE_STEP)))
    grid = np.linspace(-radius, radius, n_cells + 1)
    h = grid[1] - grid[0]
    if key == "u":
        f = np.asarray(data.u0(grid), dtype=float)
        fp = np.asarray(data.u0x(grid), dtype=float)
    elif key == "w":
        f = np.asarray(data.u0x(grid) + data.v0(grid), dtype=float)
        fp = np.asarray(data.u0xx(grid) + data.v0x(grid), dtype=float)
    else:
        raise ValueError(f"unknown table key {key!r}")
    df = np.diff(f)
    c0 = f[:-1]
    c1 = fp[:-1]
    c2 = 3.0 * df / h**2 - (2.0 * fp[:-1] + fp[1:]) / h
    c3 = -2.0 * df / h**3 + (fp[:-1] + fp[1:]) / h**2
    coef = np.ascontiguousarray(np.column_stack([c0, c1, c2, c3]))
    table = (float(grid[0]), float(h), coef)
    data._table_cache[key] = table
    return table


def _sweep_python(a0, bu, bw, data, x0, targets, y0, rtol, atol, method):
    def rhs(x, y):
        m = a0 + data.u0(x) * bu + (data.u0x(x) + data.v0(x)) * bw
        return m @ y

    if targets[-1] == x0:
        # every target coincides with the start point
        return np.broadcast_to(y0, (len(targets), len(y0))).copy()
    sol = solve_ivp(
        rhs,
        (x0, targets[-1]),
        np.asarray(y0, dtype=complex),
        method=method,
        t_eval=targets,
        rtol=rtol,
        atol=atol,
        dense_output=False,
    )
    if not sol.success:  # pragma: no cover - scipy failures are exceptional
        raise RuntimeError(f"solve_ivp failed: {sol.message}")
    return sol.y.T.copy()


def sweep(
    a0,
    bu,
    bw,
    data: InitialData,
    x0: float,
    targets,
    y0,
    *,
    rtol: float = RTOL_DEFAULT,
    atol: float = ATOL_DEFAULT,
    backend: str | None = None,
    method: str = "RK45",
) -> np.ndarray:
    """Solve ``y' = (a0 + u0*bu + w*bw) y`` from ``x0`` and report ``y`` at
    each target point.

    All targets must lie on one side of ``x0`` (coincident points are fine).
    The rows of the returned ``(len(targets), len(y0))`` array follow the
    order in which the targets were given.

    ``backend`` selects ``"cython"`` or ``"python"``; by default the active
    backend chosen at import time is used.  ``method`` applies only to the
    python backend and is handed to scipy (``"RK45"`` or ``"DOP853"``).
    """
    a0 = np.ascontiguousarray(a0, dtype=complex)
    bu = np.ascontiguousarray(bu, dtype=complex)
    bw = np.ascontiguousarray(bw, dtype=complex)
    y0 = np.ascontiguousarray(y0, dtype=complex)
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    if targets.size == 0:
        return np.empty((0, y0.size), dtype=complex)
    deltas = targets - x0
    if deltas.max() > 0.0 and deltas.min() < 0.0:
        raise ValueError("targets must lie on one side of the start point")

    order = np.argsort(np.abs(deltas), kind="stable")
    sorted_targets = targets[order]

    if backend is None:
        backend = _backend.ACTIVE
    if backend == "cython":
        if not _backend.HAVE_FASTPATH:  # pragma: no cover - env dependent
            raise RuntimeError("compiled backend requested but not available")
        lo_u, h_u, cu = hermite_table(data, "u")
        lo_w, h_w, cw = hermite_table(data, "w")
        if (lo_u, h_u) != (lo_w, h_w):  # pragma: no cover - same grid by construction
            raise RuntimeError("potential tables disagree on their grid")
        rows = _backend._fastpath.integrate_linear(
            a0, bu, bw, lo_u, h_u, cu, cw, float(x0), sorted_targets, y0, rtol, atol
        )
    elif backend == "python":
        rows = _sweep_python(a0, bu, bw, data, float(x0), sorted_targets, y0, rtol, atol, method)
    else:
        raise ValueError(f"unknown backend {backend!r}")

    out = np.empty_like(rows)
    out[order] = rows
    return out
