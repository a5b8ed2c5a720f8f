"""Expansion data at the spectral origin.

The derivative sweeps are checked against the independent eigenfunction
solver evaluated at small nonzero k (Taylor-remainder oracle), the
coefficient families against their exact free-region behavior and the
published head constant, and the leading solution coefficients against
the row annihilation that makes the origin a regular point of the
weighted problem.
"""

import cmath

import numpy as np
import pytest
from scipy.integrate import quad

from bqscatter import potentials
from bqscatter import scattering as sc
from bqscatter import zero_expansion as ze
from bqscatter.algebra import (
    OMEGA,
    OMEGA2,
    dressing_laurent,
    dressing_matrix,
    dressing_taylor,
)
from bqscatter.errors import AssumptionViolation
from bqscatter.numerics import richardson_weights

PAPER_HEAD = 0.04848575  # published constant for the builtin bump pair

N_ROW = np.array([OMEGA, OMEGA2, 1.0])


def dressed_eigenfunction(data, x, k, family):
    """P*X (direct) or k^2 * P^-T * X^A (adjoint) via the scattering
    module -- the independent route used as oracle."""
    if family in ("X", "Y"):
        return dressing_matrix(k) @ sc.solve_eigenfunction(family, data, x, k)
    lau = dressing_laurent()
    pinv_t = (lau.pm2 / (k * k) + lau.pm1 / k + lau.p0).T
    return k * k * pinv_t @ sc.solve_eigenfunction(family, data, x, k)


# ---------------------------------------------------------------------------
# derivative sweeps
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("family", ["X", "Y"])
def test_zero_data_derivatives_are_dressing_taylor_data(zero_data, family):
    tay = dressing_taylor()
    d0, d1, d2 = ze.x_derivs_at_zero(zero_data, 0.3, family=family)
    assert np.max(np.abs(d0 - tay.p0)) < 1e-14
    assert np.max(np.abs(d1 - tay.p1)) < 1e-14
    assert np.max(np.abs(d2 - 2.0 * tay.half_p2)) < 1e-14


@pytest.mark.parametrize("family", ["XA", "YA"])
def test_zero_data_adjoint_derivatives_are_inverse_laurent_data(zero_data, family):
    lau = dressing_laurent()
    d0, d1, d2 = ze.x_derivs_at_zero(zero_data, -0.2, family=family)
    assert np.max(np.abs(d0 - lau.pm2.T)) < 1e-14
    assert np.max(np.abs(d1 - lau.pm1.T)) < 1e-14
    assert np.max(np.abs(d2 - 2.0 * lau.p0.T)) < 1e-14


def test_derivative_order_and_family_validation(zero_data):
    with pytest.raises(ValueError):
        ze.x_derivs_at_zero(zero_data, 0.0, order=3)
    with pytest.raises(ValueError):
        ze.x_derivs_at_zero(zero_data, 0.0, family="Z")
    only = ze.x_derivs_at_zero(zero_data, 0.0, order=0)
    assert len(only) == 1
    with pytest.raises(ValueError):
        ze.extract_coeffs(zero_data, 0.0, family="XA")
    with pytest.raises(ValueError):
        ze.extract_coeffs_A(zero_data, 0.0, family="X")


@pytest.mark.parametrize("family", ["X", "Y", "XA", "YA"])
@pytest.mark.parametrize("x", [0.3, -0.45])
def test_taylor_data_reproduces_solver_at_small_k(bump, family, x):
    """Even/odd combinations of the dressed eigenfunction at k = +-1e-3
    match the quadratic Taylor reconstruction to the cubic remainder."""
    h = 1e-3
    k = h * cmath.exp(1j * np.pi / 6)
    plus = dressed_eigenfunction(bump, x, k, family)
    minus = dressed_eigenfunction(bump, x, -k, family)
    d0, d1, d2 = ze.x_derivs_at_zero(bump, x, family=family)
    even = 0.5 * (plus + minus) - d0 - 0.5 * k * k * d2
    odd = 0.5 * (plus - minus) - k * d1
    assert np.max(np.abs(even)) < 1e-6
    assert np.max(np.abs(odd)) < 1e-6


def test_direct_growth_envelope_on_far_side(bump):
    """Beyond the support on the non-normalized side the order-0 state
    evolves freely: rows are exact polynomials of degree 2, 1, 0."""
    xs = np.array([-2.0, -4.0, -6.0, -8.0])
    t0 = ze.x_derivs_at_zero(bump, xs, order=0, family="X")[0]
    assert np.max(np.abs(t0[:, 2, :] - t0[0, 2, :])) < 1e-12
    assert np.max(np.abs(np.diff(t0[:, 1, :], n=2, axis=0))) < 1e-11
    assert np.max(np.abs(np.diff(t0[:, 0, :], n=3, axis=0))) < 1e-10
    # the top row really does grow
    assert np.all(np.diff(np.abs(t0[:, 0, 2])) > 0)


def test_adjoint_growth_envelope_on_far_side(bump):
    """Adjoint mirror: row degrees are (j, j+1, j+2) for the j-th
    derivative state."""
    xs = np.array([-2.0, -4.0, -6.0, -8.0])
    w0, w1 = ze.x_derivs_at_zero(bump, xs, order=1, family="XA")
    assert np.max(np.abs(w0[:, 0, :] - w0[0, 0, :])) < 1e-12
    assert np.max(np.abs(np.diff(w0[:, 1, :], n=2, axis=0))) < 1e-11
    assert np.max(np.abs(np.diff(w0[:, 2, :], n=3, axis=0))) < 1e-10
    assert np.max(np.abs(np.diff(w1[:, 0, :], n=2, axis=0))) < 1e-11
    assert np.max(np.abs(np.diff(w1[:, 1, :], n=3, axis=0))) < 1e-10


def test_backends_agree_on_stacked_states(bump):
    fast = ze.x_derivs_at_zero(bump, 0.2, family="X")
    slow = ze.x_derivs_at_zero(bump, 0.2, family="X", backend="python")
    worst = max(np.max(np.abs(a - b)) for a, b in zip(fast, slow))
    assert worst < 1e-9


# ---------------------------------------------------------------------------
# coefficient families
# ---------------------------------------------------------------------------


def test_zero_data_coefficients_are_trivial(zero_data):
    got = ze.extract_coeffs(zero_data, [0.0, 1.5])
    assert np.max(np.abs(got.alpha1)) < 1e-14
    assert np.max(np.abs(got.gamma1)) < 1e-14
    assert np.max(np.abs(got.beta1)) < 1e-14
    for field in (got.delta13, got.delta23, got.delta33):
        assert np.max(np.abs(field - 1.0 / 3.0)) < 1e-14
    assert got.residual < 1e-12


def test_zero_data_adjoint_coefficients_are_trivial(zero_data):
    got = ze.extract_coeffs_A(zero_data, [0.0, -1.5])
    assert np.max(np.abs(got.alphaT1)) < 1e-14
    assert np.max(np.abs(got.deltaT13 - 1.0 / 3.0)) < 1e-14
    assert got.residual < 1e-12


def test_bump_families_are_real_and_fit_their_patterns(bump):
    xs = np.linspace(-2.0, 2.0, 9)
    direct = ze.extract_coeffs(bump, xs)
    adjoint = ze.extract_coeffs_A(bump, xs)
    assert direct.residual < 1e-10
    assert adjoint.residual < 1e-10
    # the mirrored families fit the same patterns
    assert ze.extract_coeffs(bump, xs, family="Y").residual < 1e-10
    assert ze.extract_coeffs_A(bump, xs, family="YA").residual < 1e-10


def test_double_pole_coefficient_pattern_is_exact(bump):
    """The double-pole coefficient is the bounded profile against the
    constant-rows pattern, and equals the assembled product of the
    inverse-dressing head with the order-0 state."""
    xs = np.linspace(-1.5, 1.5, 7)
    got = ze.extract_coeffs(bump, xs)
    rows_a = np.array([[OMEGA, OMEGA2, 1.0]] * 3)
    rebuilt = got.alpha1[:, None, None] * rows_a
    assert np.max(np.abs(got.c_m2 - rebuilt)) < 1e-10
    t0 = ze.x_derivs_at_zero(bump, xs, order=0)[0]
    assert np.max(np.abs(got.c_m2 - dressing_laurent().pm2 @ t0)) < 1e-12


def test_delta_profile_settles_beyond_support(bump):
    got = ze.extract_coeffs(bump, [1.2, 2.0])
    assert np.max(np.abs(got.delta33 - 1.0 / 3.0)) < 1e-13
    assert np.max(np.abs(got.alpha1)) < 1e-13


def test_profile_growth_orders_match_published_figure(bump):
    """Bounded alpha, linearly growing beta/gamma, quadratically growing
    delta on the far side -- exact polynomials outside the support."""
    xs = np.array([-2.0, -3.0, -4.0, -5.0])
    got = ze.extract_coeffs(bump, xs)
    assert np.max(np.abs(got.alpha1 - got.alpha1[0])) < 1e-12
    for profile in (got.beta1, got.gamma1):
        assert np.max(np.abs(np.diff(profile, n=2))) < 1e-10
    slopes = np.diff(got.beta1)
    assert np.min(np.abs(slopes)) > 1e-4
    assert np.max(np.abs(np.diff(got.delta33, n=3))) < 1e-9
    assert np.min(np.abs(np.diff(got.delta33, n=2))) > 1e-4


# ---------------------------------------------------------------------------
# Laurent heads
# ---------------------------------------------------------------------------


def test_head_matches_published_value(bump):
    heads = ze.laurent_heads(bump)
    assert abs(heads.s_m2 - PAPER_HEAD) / PAPER_HEAD < 1e-6
    assert isinstance(heads.s_m2, float) and isinstance(heads.sA_m2, float)


def test_zero_data_heads_vanish(zero_data):
    heads = ze.laurent_heads(zero_data)
    assert heads.s_m2 == 0.0 and heads.sA_m2 == 0.0


def test_head_limit_routes_agree(bump):
    """Integral route vs radial extrapolation of the weighted transition
    entries -- two fully independent computations of the same limits."""
    heads = ze.laurent_heads(bump)
    hs = np.array([sc.RICHARDSON_H, 2 * sc.RICHARDSON_H, 4 * sc.RICHARDSON_H])
    wts = richardson_weights(hs)

    ray = cmath.exp(1j * np.pi / 6)
    vals = [(h * ray) ** 2 * sc.transition_entry(bump, h * ray, 0, 0) for h in hs]
    lim = complex(wts @ np.array(vals))
    target = OMEGA * heads.s_m2
    assert abs(lim - target) / abs(target) < 1e-6

    ray = cmath.exp(1j * np.pi * 7 / 6)
    vals = [
        (h * ray) ** 2 * sc.transition_entry(bump, h * ray, 0, 0, adjoint=True)
        for h in hs
    ]
    lim = complex(wts @ np.array(vals))
    target = OMEGA * heads.sA_m2
    assert abs(lim - target) / abs(target) < 1e-6


def test_head_linear_response_to_small_data(bump):
    """For data scaled by eps the direct head is eps/3 times the integral
    of v0 up to O(eps^2): the constant-order profile starts at 1/3 and the
    linear-growth profile at 0."""
    base, _ = quad(lambda s: bump.v0(np.array([s]))[0], -1.0, 1.0)
    defects = []
    for eps in (1e-2, 1e-3):
        head = ze.laurent_heads(potentials.scale(bump, eps)).s_m2
        defects.append(abs(head - eps * base / 3.0))
    assert defects[1] < defects[0] / 50.0


# ---------------------------------------------------------------------------
# leading solution coefficients
# ---------------------------------------------------------------------------


def test_m_zero_rejects_vanishing_heads(zero_data):
    with pytest.raises(AssumptionViolation):
        ze.m_zero_coeffs(zero_data, 0.0)


def test_m_zero_weighted_rows_annihilate(bump):
    """Left multiplication by the weight row kills both pole coefficients
    -- the property that keeps the weighted solution bounded at the
    origin."""
    xs = np.linspace(-2.0, 2.0, 10)
    got = ze.m_zero_coeffs(bump, xs)
    assert np.max(np.abs(np.einsum("j,njk->nk", N_ROW, got.m1_m2))) < 1e-10
    assert np.max(np.abs(np.einsum("j,njk->nk", N_ROW, got.m1_m1))) < 1e-10


def test_m_zero_double_pole_structure(bump):
    """Only the first column carries the double pole; its rows are equal
    with entries proportional to the bounded direct profile."""
    xs = np.linspace(-1.0, 1.0, 5)
    got = ze.m_zero_coeffs(bump, xs)
    assert np.max(np.abs(got.m1_m2[:, :, 1:])) == 0.0
    col = got.m1_m2[:, :, 0]
    assert np.max(np.abs(col - col[:, :1])) == 0.0
    assert np.max(np.abs(col[:, 0] - OMEGA * got.alpha)) < 1e-14
    assert np.max(np.abs(got.alpha)) > 1e-3


def test_m_zero_inverse_coefficient_structure(bump):
    xs = np.array([-0.5, 0.25])
    got = ze.m_zero_coeffs(bump, xs)
    assert np.max(np.abs(got.n1_m2[:, :2, :])) == 0.0
    assert np.max(np.abs(got.n1_m1[:, 0, :])) == 0.0
    expected = got.alphaT[:, None] * N_ROW
    assert np.max(np.abs(got.n1_m2[:, 2, :] - expected)) < 1e-14
    assert np.max(np.abs(got.n1_0_row1 - got.epsilonT[:, None])) < 1e-14


def test_m_zero_accepts_precomputed_heads(bump):
    heads = ze.laurent_heads(bump)
    got = ze.m_zero_coeffs(bump, 0.0, heads=heads)
    assert got.x.shape == (1,)
    assert np.isfinite(got.delta).all() and np.isfinite(got.epsilon).all()
