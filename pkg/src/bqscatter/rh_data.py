"""Jump data on the star contour.

The sectionally analytic eigenfunction picks up a multiplicative jump
across each of the six rays; every jump matrix is assembled from the two
reflection coefficients sampled on their physical half-lines and the
oscillatory phases from :mod:`bqscatter.algebra`.  This module builds
those matrices, reports how well they satisfy the rotation/conjugation
symmetries, and serializes the whole input of the downstream
Riemann-Hilbert solve to a versioned JSON file.
"""

from __future__ import annotations

import cmath
import json
import math
import os
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.interpolate import make_interp_spline

from .algebra import (
    cyclic_conjugate,
    omega_pow,
    ray_point,
    sector_of,
    swap_conjugate,
    theta,
)
from .errors import DomainViolation, ExtrapolationRefused, GridEmpty
from .scattering import ReflectionCoefficients

__all__ = [
    "JumpMatrix",
    "jump_v",
    "jump_symmetry_residuals",
    "export_rh",
    "import_rh",
    "EXPORT_VERSION",
]

EXPORT_VERSION = 1

#: Which reflection coefficient each ray reads and the power of omega that
#: carries k from the ray onto that coefficient's home half-line (positive
#: reals for the first coefficient, negative reals for the second).
_RAY_RECIPE: dict[int, tuple[str, int]] = {
    1: ("r1", 0),
    2: ("r2", 1),
    3: ("r1", 2),
    4: ("r2", 0),
    5: ("r1", 1),
    6: ("r2", 2),
}

#: Ray angle misalignment accepted before a spectral point is rejected.
RAY_TOL = 1e-9


@dataclass(frozen=True)
class JumpMatrix:
    """Jump matrix on one ray at a single (x, t, k)."""

    segment: int
    x: float
    t: float
    k: complex
    value: np.ndarray


def _sample(refl: ReflectionCoefficients, which: str, a: float) -> complex:
    """Interpolated reflection value at the real argument ``a``, refused
    outside the sampled range (the coefficients are never extrapolated)."""
    if which == "r1":
        grid, vals, boundary = refl.k1, refl.r1, refl.r1_at_0
        lo, hi = 0.0, float(grid[-1]) if grid.size else 0.0
    else:
        grid, vals, boundary = refl.k2, refl.r2, refl.r2_at_0
        lo, hi = float(grid[0]) if grid.size else 0.0, 0.0
    if grid.size == 0:
        raise ExtrapolationRefused(
            f"no {which} samples available to evaluate the jump"
        )
    if not lo <= a <= hi:
        raise ExtrapolationRefused(
            f"{which}({a:.6g}) lies outside the sampled range [{lo:.6g}, {hi:.6g}]"
        )
    if which == "r1":
        xs = np.concatenate([[0.0], grid])
        ys = np.concatenate([[boundary], vals])
    else:
        xs = np.concatenate([grid, [0.0]])
        ys = np.concatenate([vals, [boundary]])
    spline = make_interp_spline(xs, ys, k=min(3, len(xs) - 1))
    return complex(spline(a))


def jump_v(
    refl: ReflectionCoefficients | None,
    segment: int,
    x: float,
    t: float,
    k: complex,
    *,
    sampler=None,
) -> JumpMatrix:
    """Jump matrix on the given ray segment at the on-ray point k.

    The entry layout, the choice of coefficient, and the rotation applied
    to its argument all depend on the segment; the exponential carried by
    each off-diagonal entry is exactly ``exp(+-theta_ij(x, t, k))``.
    Reflection values come from the sampled grids of ``refl`` unless a
    ``sampler(which, a)`` callable supplies them exactly (as the Fredholm
    jump check does, to keep interpolation error out of its residual).
    """
    if segment not in _RAY_RECIPE:
        raise ValueError("segment must be one of 1..6")
    point = sector_of(k, ray_rtol=RAY_TOL)
    if point.kind != "ray" or point.index != segment:
        raise DomainViolation(
            f"k = {k:.6g} does not lie on ray {segment} (got {point.kind} "
            f"{point.index})"
        )
    which, power = _RAY_RECIPE[segment]
    arg = omega_pow(power) * k
    if abs(arg.imag) > RAY_TOL * abs(k):
        raise DomainViolation(
            f"rotated argument {arg:.6g} missed the real axis for segment {segment}"
        )
    if sampler is not None:
        r = complex(sampler(which, arg.real))
    else:
        r = _sample(refl, which, arg.real)
    rs = r.conjugate()
    rr = r * rs

    def e(i: int, j: int) -> complex:
        return cmath.exp(theta(i, j, x, t, k))

    if segment == 1:
        v = [[1.0, -r * e(1, 2), 0.0], [rs * e(2, 1), 1.0 - rr, 0.0], [0.0, 0.0, 1.0]]
    elif segment == 2:
        v = [[1.0, 0.0, 0.0], [0.0, 1.0 - rr, -rs * e(2, 3)], [0.0, r * e(3, 2), 1.0]]
    elif segment == 3:
        v = [[1.0 - rr, 0.0, rs * e(1, 3)], [0.0, 1.0, 0.0], [-r * e(3, 1), 0.0, 1.0]]
    elif segment == 4:
        v = [[1.0 - rr, -rs * e(1, 2), 0.0], [r * e(2, 1), 1.0, 0.0], [0.0, 0.0, 1.0]]
    elif segment == 5:
        v = [[1.0, 0.0, 0.0], [0.0, 1.0, -r * e(2, 3)], [0.0, rs * e(3, 2), 1.0 - rr]]
    else:
        v = [[1.0, 0.0, r * e(1, 3)], [0.0, 1.0, 0.0], [-rs * e(3, 1), 0.0, 1.0 - rr]]
    return JumpMatrix(segment=segment, x=x, t=t, k=k, value=np.array(v, dtype=complex))


def jump_symmetry_residuals(
    refl: ReflectionCoefficients,
    x: float,
    t: float,
    k_grid,
) -> dict:
    """Numerical check of the two jump-level symmetries.

    The rotation by a cube root of unity carries ray m onto ray m+2 and
    conjugates the matrix by the cyclic permutation; complex conjugation
    fixes the two real-axis rays and relates v to the swap-conjugate of
    the inverse of its conjugate.  Both identities hold exactly for the
    assembled displays, so the residuals measure only rounding and
    interpolation noise.
    """
    radii = np.atleast_1d(np.asarray(k_grid, dtype=float))
    if radii.size == 0 or np.any(radii <= 0):
        raise GridEmpty("k/grid of positive radii required")
    rotation: dict[int, float] = {}
    conjugation: dict[int, float] = {}
    for segment in range(1, 7):
        partner = (segment + 1) % 6 + 1  # two ray-steps ahead, 1-based
        worst = 0.0
        for rho in radii:
            k = ray_point(segment, rho)
            v = jump_v(refl, segment, x, t, k).value
            v_rot = jump_v(refl, partner, x, t, omega_pow(1) * k).value
            worst = max(worst, float(np.max(np.abs(v - cyclic_conjugate(v_rot)))))
        rotation[segment] = worst
    for segment in (1, 4):
        worst = 0.0
        for rho in radii:
            k = ray_point(segment, rho)
            v = jump_v(refl, segment, x, t, k).value
            mirrored = swap_conjugate(np.linalg.inv(np.conj(v)))
            worst = max(worst, float(np.max(np.abs(v - mirrored))))
        conjugation[segment] = worst
    return {
        "rotation": rotation,
        "conjugation": conjugation,
        "rotation_max": max(rotation.values()),
        "conjugation_max": max(conjugation.values()),
        "n_samples": int(radii.size),
        "x": x,
        "t": t,
    }


def _triples(ks: np.ndarray, vals: np.ndarray) -> list[list[float]]:
    return [[float(k), float(v.real), float(v.imag)] for k, v in zip(ks, vals)]


def export_rh(
    refl: ReflectionCoefficients,
    path: str | os.PathLike,
    *,
    checks: Mapping[str, object],
) -> str:
    """Write the reflection data and assumption-check verdicts as JSON.

    Grids are stored sorted by increasing |k| so both rays read outward
    from the origin; floats round-trip exactly through the JSON encoding.
    """
    if refl.k1.size == 0 or refl.k2.size == 0:
        raise GridEmpty("both reflection grids must be nonempty to export")
    for name in ("assumption1", "assumption2"):
        if name not in checks:
            raise ValueError(f"checks mapping must carry {name!r}")
    if not (np.all(np.isfinite(refl.r1)) and np.all(np.isfinite(refl.r2))):
        raise ValueError("reflection samples must be finite")
    payload = {
        "version": EXPORT_VERSION,
        "r1": _triples(refl.k1, refl.r1),
        "r2": _triples(refl.k2[::-1], refl.r2[::-1]),
        "r1_at_0": [refl.r1_at_0.real, refl.r1_at_0.imag],
        "r2_at_0": [refl.r2_at_0.real, refl.r2_at_0.imag],
        "checks": {
            "assumption1": bool(checks["assumption1"]),
            "assumption2": bool(checks["assumption2"]),
        },
    }
    text = json.dumps(payload, indent=1)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text + "\n")
    return str(path)


def import_rh(path: str | os.PathLike) -> tuple[ReflectionCoefficients, dict]:
    """Read a file produced by :func:`export_rh`."""
    with open(path, encoding="ascii") as fh:
        payload = json.load(fh)
    if payload.get("version") != EXPORT_VERSION:
        raise ValueError(f"unsupported export version {payload.get('version')!r}")

    def split(rows, reverse: bool):
        rows = sorted(rows, key=lambda row: row[0], reverse=reverse)
        ks = np.array([row[0] for row in rows], dtype=float)
        vals = np.array([complex(row[1], row[2]) for row in rows])
        if reverse:  # stored outward on the negative axis; restore ascending k
            return ks[::-1].copy(), vals[::-1].copy()
        return ks, vals

    k1, r1 = split(payload["r1"], reverse=False)
    k2, r2 = split(payload["r2"], reverse=True)
    refl = ReflectionCoefficients(
        k1=k1,
        r1=r1,
        k2=k2,
        r2=r2,
        r1_at_0=complex(*payload["r1_at_0"]),
        r2_at_0=complex(*payload["r2_at_0"]),
    )
    return refl, dict(payload["checks"])
