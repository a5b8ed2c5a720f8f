"""Binding verification battery.

Every numbered criterion below is a named, budgeted check with explicit
tolerances.  The test suite runs the registry one criterion per test; the
CLI ``verify`` command runs it as a batch and emits a JSON report.  A
separate lightweight battery (:data:`FAST_CHECKS`) covers the
data-agnostic invariants and is safe to run on any potential, including
zero data.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from time import perf_counter
from typing import Callable

import numpy as np

from . import evolution, fredholm, scattering, zero_expansion
from .algebra import (
    OMEGA,
    OMEGA2,
    cofactor,
    cyclic_conjugate,
    ray_point,
    sector_midpoint,
    swap_conjugate,
    x_weights,
)
from .numerics import richardson_weights
from .potentials import InitialData, builtin

#: published value of the double-pole head for the builtin bump pair
REFERENCE_HEAD = 0.04848575

_RAY1 = cmath.exp(1j * math.pi / 6.0)


class Workspace:
    """Shared lazy state for one battery run.

    Transition matrices, the integral-route Laurent heads, and the
    extrapolated reflection boundary values are cached so that criteria
    sharing them do not recompute.  ``threads`` bounds the pool used for
    the embarrassingly parallel k-sweeps.
    """

    def __init__(self, data: InitialData | None = None, threads: int = 1):
        self.data = builtin("bump") if data is None else data
        self.threads = max(1, int(threads))
        self._transitions: dict[complex, object] = {}
        self._heads = None
        self._boundary = None

    def transition(self, k: complex):
        key = complex(k)
        if key not in self._transitions:
            self._transitions[key] = scattering.scattering(self.data, key)
        return self._transitions[key]

    @property
    def heads(self):
        if self._heads is None:
            self._heads = zero_expansion.laurent_heads(self.data)
        return self._heads

    @property
    def boundary(self):
        if self._boundary is None:
            self._boundary = scattering.boundary_values(self.data)
        return self._boundary

    def map(self, fn, items):
        items = list(items)
        if self.threads == 1 or len(items) < 2:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, items))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residuals: dict
    elapsed_s: float
    budget_s: float | None
    detail: str = ""


@dataclass(frozen=True)
class Criterion:
    index: int
    name: str
    summary: str
    budget_s: float | None
    run: Callable[[Workspace], tuple[bool, dict, str]]


def _relative(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------------------
# criterion runners
# ---------------------------------------------------------------------------


def _c01_published_head(ws: Workspace):
    rel = _relative(ws.heads.s_m2, REFERENCE_HEAD)
    res = {"relative_error": rel, "value": ws.heads.s_m2}
    return rel <= 1e-6, res, f"head {ws.heads.s_m2:.8f} vs {REFERENCE_HEAD}"


def _c02_dual_route_heads(ws: Workspace):
    hs = np.array([scattering.RICHARDSON_H, 2 * scattering.RICHARDSON_H,
                   4 * scattering.RICHARDSON_H])
    wts = richardson_weights(hs)

    vals = [(h * _RAY1) ** 2 * scattering.transition_entry(ws.data, h * _RAY1, 0, 0)
            for h in hs]
    direct = abs(complex(wts @ np.array(vals)) - OMEGA * ws.heads.s_m2)
    direct /= abs(OMEGA * ws.heads.s_m2)

    ray4 = cmath.exp(1j * math.pi * 7.0 / 6.0)
    vals = [(h * ray4) ** 2
            * scattering.transition_entry(ws.data, h * ray4, 0, 0, adjoint=True)
            for h in hs]
    adjoint = abs(complex(wts @ np.array(vals)) - OMEGA * ws.heads.sA_m2)
    adjoint /= abs(OMEGA * ws.heads.sA_m2)

    res = {"direct_relative": direct, "adjoint_relative": adjoint}
    return max(direct, adjoint) <= 1e-6, res, "limit of k^2 s11 vs integral route"


def _c03_reflection_zero_limits(ws: Workspace):
    r1_0, r2_0 = ws.boundary
    d1, d2 = abs(r1_0 - OMEGA), abs(r2_0 - 1.0)
    res = {"r1_limit_error": d1, "r2_limit_error": d2}
    return max(d1, d2) <= 1e-3, res, f"r1(0+) -> {r1_0:.6f}, r2(0-) -> {r2_0:.6f}"


def _c04_reflection_decay(ws: Workspace):
    ks = np.geomspace(1.0, 50.0, 25)
    r1 = np.abs(ws.map(lambda k: scattering.reflection_pair(ws.data, float(k)), ks))
    r2 = np.abs(ws.map(lambda k: scattering.reflection_pair(ws.data, -float(k)), ks))
    w1 = (1.0 + ks) ** 4 * r1
    w2 = (1.0 + ks) ** 4 * r2
    ratio1 = float(np.max(w1) / w1[0])
    ratio2 = float(np.max(w2) / w2[0])
    res = {
        "weighted_r1_ratio": ratio1,
        "weighted_r2_ratio": ratio2,
        "r1_at_50": float(r1[-1]),
        "r2_at_minus_50": float(r2[-1]),
    }
    ok = ratio1 <= 10.0 and ratio2 <= 10.0 and r1[-1] <= 1e-6 and r2[-1] <= 1e-6
    return ok, res, "(1+k)^4-weighted moduli on [1, 50]"


def _c05_reflection_exceeds_unity(ws: Workspace):
    ks = np.linspace(0.08, 0.95, 12)
    vals = np.abs(ws.map(lambda k: scattering.reflection_pair(ws.data, float(k)), ks))
    peak = float(np.max(vals))
    return peak > 1.0, {"max_modulus": peak}, f"max |r1| on (0,1) = {peak:.4f}"


def _c06_transition_invariants(ws: Workspace):
    moduli = np.geomspace(0.3, 3.0, 25)
    angles = (0.0, math.pi / 6.0, math.pi, 7.0 * math.pi / 6.0)
    grid = [float(r) * cmath.exp(1j * a) for a in angles for r in moduli]

    def residuals(k):
        sm = ws.transition(k)
        rot = ws.transition(OMEGA * k)
        mirror = sm if k.imag == 0.0 else ws.transition(k.conjugate())
        det = abs(np.linalg.det(sm.s) - 1.0)
        sym_a = float(np.max(np.abs(sm.s - cyclic_conjugate(rot.s))))
        sym_b = float(np.max(np.abs(sm.s - swap_conjugate(np.conj(mirror.s)))))
        cof = float(np.max(np.abs(sm.sA - cofactor(sm.s))))
        return det, sym_a, sym_b, cof

    worst = np.max(np.array(ws.map(residuals, grid)), axis=0)
    res = {
        "det_minus_1": float(worst[0]),
        "symmetry_rotation": float(worst[1]),
        "symmetry_conjugation": float(worst[2]),
        "cofactor_identity": float(worst[3]),
    }
    ok = worst[0] <= 1e-9 and worst[1] <= 1e-9 and worst[2] <= 1e-9 and worst[3] <= 1e-8
    return ok, res, f"{len(grid)}-point grid, worst residuals"


_ORACLE_POINTS = ((0.0, -1.3), (0.3, 2.0), (-0.5, 1.1 + 0.9j),
                  (0.7, 0.5 - 1.2j), (-0.2, 3.0j))


def _c07_eigenfunction_oracle(ws: Workspace):
    def gap(point):
        x, k = point
        j = int(np.argmin(x_weights(k).real))
        got = scattering.oracle_scalar(ws.data, x, k)
        ref = scattering.eigenfunction_columns("X", ws.data, k, j, [x])[0]
        return float(np.max(np.abs(got - ref)))

    worst = max(ws.map(gap, _ORACLE_POINTS))
    res = {"max_entry_gap": worst}
    return worst <= 1e-8, res, f"{len(_ORACLE_POINTS)} (x, k) samples vs companion oracle"


_CONSISTENCY_POINTS = (
    (-1.2, 0.6 * cmath.exp(1j * math.pi / 12)),
    (0.4, 0.8 * _RAY1),
    (1.0, 1.1 * cmath.exp(1j * math.pi / 4)),
    (-0.5, 0.5 * cmath.exp(1j * math.pi / 60)),
    (0.8, 0.9 * cmath.exp(1j * 0.95 * math.pi / 3)),
)


def _c08_m_consistency(ws: Workspace):
    def gap(point):
        x, k = point
        direct = fredholm.solve_M(ws.data, 1, x, 0.0, k)
        assembled = fredholm.m1_from_eigenfunctions(ws.data, x, k)
        return float(np.max(np.abs(direct - assembled)))

    worst = max(ws.map(gap, _CONSISTENCY_POINTS))

    def det_gap(n):
        solver = fredholm.MSolver(ws.data, n, sector_midpoint(n, 0.8))
        return abs(np.linalg.det(solver.matrix(0.3)) - 1.0)

    det_worst = max(ws.map(det_gap, range(1, 7)))
    res = {"assembly_gap": worst, "det_minus_1": float(det_worst)}
    return worst <= 1e-7 and det_worst <= 1e-9, res, \
        "first-sector assembly at 5 points; unimodularity in all sectors"


def _c09_jump_relation(ws: Workspace):
    points = [(m, float(r)) for m in range(1, 7)
              for r in np.geomspace(0.35, 2.2, 10)]

    def residual(point):
        m, r = point
        return fredholm.jump_residual(ws.data, 0.4, 0.0, ray_point(m, r))

    worst = max(ws.map(residual, points))
    res = {"max_jump_residual": worst}
    return worst <= 1e-7, res, "10 points per ray, all six rays, t = 0"


def _c10_large_k_structure(ws: Workspace):
    x0 = 0.7
    radii = (20.0, 26.0, 35.0, 50.0, 70.0, 100.0, 150.0)

    def sample(r):
        return fredholm.MSolver(ws.data, 1, r * _RAY1).matrix(x0)

    mats = ws.map(sample, radii)
    ks = np.array([r * _RAY1 for r in radii])
    powers = np.stack([ks ** (-p) for p in range(1, 7)], axis=1)
    rhs = np.stack([m - np.eye(3) for m in mats]).reshape(len(radii), 9)
    coef, *_ = np.linalg.lstsq(powers, rhs, rcond=None)
    m1 = coef[0].reshape(3, 3)
    m2 = coef[1].reshape(3, 3)

    first_row = max(abs(m1[0, 1]), abs(m1[0, 2]))
    second_sum = abs(m2[0, 1] + m2[0, 2])
    pattern = np.array([OMEGA2, OMEGA, 1.0])
    diag = np.diag(m1)
    scalar = float(np.mean((diag / pattern).real))
    diag_res = float(np.max(np.abs(diag - scalar * pattern)))
    res = {
        "m1_offdiagonal": float(first_row),
        "m2_row_sum": float(second_sum),
        "m1_diagonal_pattern": diag_res,
    }
    ok = first_row <= 1e-6 and second_sum <= 1e-6 and diag_res <= 1e-6
    return ok, res, f"6-power fit over |k| in [20, 150] at x = {x0}"


def _c11_recovery_roundtrip(ws: Workspace):
    xs = np.linspace(-2.0, 2.0, 81)
    model = fredholm.recover_u(ws.data, xs)
    sup = float(np.max(np.abs(model(xs) - np.asarray(ws.data.u0(xs)))))
    res = {"sup_error": sup, "extrapolation_spread": model.spread}
    return sup <= 1e-4, res, "u0 from the large-k limit of M33 on [-2, 2]"


def _c12_small_k_structure(ws: Workspace):
    xs = np.linspace(-1.6, 1.6, 10)
    coeffs = zero_expansion.m_zero_coeffs(ws.data, xs)
    row = np.array([OMEGA, OMEGA2, 1.0])
    cancel_m2 = float(np.max(np.abs(np.einsum("i,nij->nj", row, coeffs.m1_m2))))
    cancel_m1 = float(np.max(np.abs(np.einsum("i,nij->nj", row, coeffs.m1_m1))))

    hs = np.array([0.005, 0.01, 0.02])
    wts = richardson_weights(hs)

    def limit_gap(ix):
        x = float(xs[ix])
        samples = np.array([(h * _RAY1) ** 2
                            * fredholm.solve_M(ws.data, 1, x, 0.0, h * _RAY1)
                            for h in hs])
        limit = np.tensordot(wts, samples, axes=1)
        return float(np.max(np.abs(limit - coeffs.m1_m2[ix])))

    limit_worst = max(ws.map(limit_gap, (2, 7)))
    res = {
        "weighted_row_on_m2": cancel_m2,
        "weighted_row_on_m1": cancel_m1,
        "limit_gap": limit_worst,
    }
    ok = cancel_m2 <= 1e-10 and cancel_m1 <= 1e-10 and limit_worst <= 1e-5
    return ok, res, "row cancellation at 10 x; k^2 M limit at 2 x"


def _c13_evolution_crosscheck(ws: Workspace):
    report = evolution.reflection_evolution_check(
        ws.data, 0.2, np.linspace(0.5, 3.0, 10))
    res = {
        "modulus_invariance": report["modulus_max"],
        "phase_law": report["phase_max"],
        "mass_drift": report["mass_drift"],
    }
    ok = (report["modulus_max"] <= 1e-4 and report["phase_max"] <= 1e-3
          and report["mass_drift"] <= 1e-8)
    return ok, res, "r1 of the t = 0.2 potential vs the phase law on [0.5, 3]"


def _c14_fredholm_determinants(ws: Workspace):
    zero = builtin("zero")
    k0 = 0.8 * _RAY1
    exact = all(fredholm.fredholm_det(zero, j, k0) == 1.0 for j in (1, 2, 3))

    radii = (10.0, 20.0, 40.0)
    gaps = {j: [abs(fredholm.fredholm_det(ws.data, j, r * _RAY1) - 1.0)
                for r in radii] for j in (1, 2, 3)}
    monotone = all(a >= b for seq in gaps.values() for a, b in zip(seq, seq[1:]))

    k_big = 20.0 * _RAY1
    series_gap = max(
        abs(fredholm.fredholm_det(ws.data, j, k_big)
            - fredholm.fredholm_det_series(ws.data, j, k_big))
        for j in (2, 3)
    )
    res = {
        "zero_data_exact": float(not exact),
        "series_gap": float(series_gap),
        "decay_1": gaps[1][-1],
        "decay_2": gaps[2][-1],
        "decay_3": gaps[3][-1],
    }
    ok = exact and monotone and series_gap <= 1e-4
    detail = "unit determinants, |f - 1| decay on the first-sector ray, series check"
    return ok, res, detail


CRITERIA: tuple[Criterion, ...] = (
    Criterion(1, "published-head-constant",
              "double-pole head of s11 equals the published value", 60.0,
              _c01_published_head),
    Criterion(2, "dual-route-heads",
              "integral-route heads match the extrapolated k^2-weighted limits",
              60.0, _c02_dual_route_heads),
    Criterion(3, "reflection-zero-limits",
              "r1(0+) -> omega and r2(0-) -> 1", 30.0,
              _c03_reflection_zero_limits),
    Criterion(4, "reflection-decay",
              "quartic-weighted reflection moduli stay bounded out to |k| = 50",
              60.0, _c04_reflection_decay),
    Criterion(5, "reflection-exceeds-unity",
              "some |r1| > 1 below k = 1", None, _c05_reflection_exceeds_unity),
    Criterion(6, "transition-invariants",
              "determinant, symmetries, and cofactor identity on a 100-point grid",
              120.0, _c06_transition_invariants),
    Criterion(7, "eigenfunction-oracle",
              "matrix eigenfunctions vs the scalar companion-form oracle", None,
              _c07_eigenfunction_oracle),
    Criterion(8, "m-consistency",
              "Nystrom solution vs line-eigenfunction assembly; unit determinants",
              300.0, _c08_m_consistency),
    Criterion(9, "jump-relation",
              "sectional solutions satisfy the ray jump at t = 0", None,
              _c09_jump_relation),
    Criterion(10, "large-k-structure",
              "fitted 1/k coefficients carry the expected zero and diagonal pattern",
              None, _c10_large_k_structure),
    Criterion(11, "recovery-roundtrip",
              "u0 recovered from the solution's large-k limit", None,
              _c11_recovery_roundtrip),
    Criterion(12, "small-k-structure",
              "double-pole data is rank-deficient the right way; k^2 M limit",
              None, _c12_small_k_structure),
    Criterion(13, "evolution-crosscheck",
              "evolved reflection obeys the modulus and phase laws", 180.0,
              _c13_evolution_crosscheck),
    Criterion(14, "fredholm-determinants",
              "unit at zero data, decaying at large k, matching the 3-term series",
              None, _c14_fredholm_determinants),
)


def run_criterion(criterion: Criterion, ws: Workspace) -> CheckResult:
    start = perf_counter()
    try:
        passed, residuals, detail = criterion.run(ws)
    except Exception as exc:  # a crash is a failed check, not a dead battery
        elapsed = perf_counter() - start
        return CheckResult(criterion.name, False, {},
                           elapsed, criterion.budget_s,
                           f"{type(exc).__name__}: {exc}")
    elapsed = perf_counter() - start
    if criterion.budget_s is not None and elapsed > criterion.budget_s:
        passed = False
        detail += f"; budget {criterion.budget_s:.0f}s exceeded"
    return CheckResult(criterion.name, passed, residuals, elapsed,
                       criterion.budget_s, detail)


def run_all(ws: Workspace | None = None, *, names=None,
            progress: Callable[[CheckResult], None] | None = None):
    ws = ws or Workspace()
    wanted = set(names) if names is not None else None
    results = []
    for criterion in CRITERIA:
        if wanted is not None and criterion.name not in wanted:
            continue
        result = run_criterion(criterion, ws)
        if progress is not None:
            progress(result)
        results.append(result)
    return results


def format_line(result: CheckResult) -> str:
    verdict = "PASS" if result.passed else "FAIL"
    shown = ", ".join(f"{key}={value:.3g}" for key, value in result.residuals.items())
    budget = f"/{result.budget_s:.0f}s" if result.budget_s else ""
    return f"{verdict} {result.name} [{result.elapsed_s:.1f}s{budget}] {shown}"


# ---------------------------------------------------------------------------
# data-agnostic fast battery
# ---------------------------------------------------------------------------


def _f_transition_invariants(ws: Workspace):
    worst = np.zeros(4)
    for k in (1.1, 0.7 * _RAY1, -0.9 + 0.4j):
        sm = ws.transition(k)
        rot = ws.transition(OMEGA * k)
        mirror = ws.transition(complex(k).conjugate())
        worst = np.maximum(worst, [
            abs(np.linalg.det(sm.s) - 1.0),
            float(np.max(np.abs(sm.s - cyclic_conjugate(rot.s)))),
            float(np.max(np.abs(sm.s - swap_conjugate(np.conj(mirror.s))))),
            float(np.max(np.abs(sm.sA - cofactor(sm.s)))),
        ])
    res = dict(zip(("det_minus_1", "symmetry_rotation", "symmetry_conjugation",
                    "cofactor_identity"), (float(w) for w in worst)))
    ok = worst[0] <= 1e-9 and worst[1] <= 1e-9 and worst[2] <= 1e-9 and worst[3] <= 1e-8
    return ok, res, "three spectral points"


def _f_eigenfunction_oracle(ws: Workspace):
    x, k = 0.2, -1.1
    j = int(np.argmin(x_weights(k).real))
    got = scattering.oracle_scalar(ws.data, x, k)
    ref = scattering.eigenfunction_columns("X", ws.data, k, j, [x])[0]
    gap = float(np.max(np.abs(got - ref)))
    return gap <= 1e-8, {"max_entry_gap": gap}, f"x = {x}, k = {k}"


def _f_unimodular_m(ws: Workspace):
    solver = fredholm.MSolver(ws.data, 1, 0.8 * _RAY1)
    gap = abs(np.linalg.det(solver.matrix(0.1)) - 1.0)
    return gap <= 1e-9, {"det_minus_1": float(gap)}, "first sector"


def _f_evolution_mass(ws: Workspace):
    length = max(15.0, 2.0 * ws.data.support_radius + 9.0)
    states = evolution.evolve(ws.data, 0.05, L=length, N=1024, dt=2e-4)
    drift = abs(states[-1].mass() - states[0].mass())
    return drift <= 1e-8, {"mass_drift": float(drift)}, "short run at modest resolution"


FAST_CHECKS: tuple[Criterion, ...] = (
    Criterion(1, "transition-invariants-spot",
              "determinant, symmetries, cofactor identity at three points", 10.0,
              _f_transition_invariants),
    Criterion(2, "eigenfunction-oracle-spot",
              "one companion-oracle comparison", 10.0, _f_eigenfunction_oracle),
    Criterion(3, "unimodular-m-spot",
              "unit determinant of the first-sector solution", 10.0,
              _f_unimodular_m),
    Criterion(4, "evolution-mass-spot",
              "mass conservation over a short run", 10.0, _f_evolution_mass),
)


def run_fast(ws: Workspace | None = None, *,
             progress: Callable[[CheckResult], None] | None = None):
    ws = ws or Workspace()
    results = []
    for check in FAST_CHECKS:
        result = run_criterion(check, ws)
        if progress is not None:
            progress(result)
        results.append(result)
    return results
