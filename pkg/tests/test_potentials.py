import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bqscatter import potentials
from bqscatter.algebra import (
    OMEGA,
    cyclic_conjugate,
    dressing_inverse,
    dressing_matrix,
    swap_conjugate,
)
from bqscatter.errors import SingularDiagonalizer, ZeroMeanViolation
from bqscatter.potentials import (
    InitialData,
    builtin,
    from_samples,
    good_boussinesq_map,
    inverse_good_boussinesq_map,
    lax_t_companion,
    lax_x_companion,
    potential_matrices,
    utilde_matrix,
    v0_from_u1,
)

ks = st.complex_numbers(min_magnitude=0.05, max_magnitude=50, allow_nan=False, allow_infinity=False)
xs = st.floats(-1.2, 1.2)


def test_bump_point_values(bump):
    # at x = 0 the mollifier weight is e^{-2}
    assert bump.u0(0.0) == pytest.approx(2.0 * math.exp(-2.0))
    assert bump.v0(0.0) == pytest.approx(math.exp(-2.0))
    assert bump.support_radius == 1.0
    for x in (1.0, -1.0, 1.7, -25.0):
        assert bump.u0(x) == 0.0
        assert bump.v0(x) == 0.0
        assert bump.u0x(x) == 0.0


def test_bump_vectorized_and_scalar_agree(bump):
    grid = np.array([-0.9, -0.3, 0.0, 0.55, 0.99, 1.01])
    np.testing.assert_allclose(bump.u0(grid), [bump.u0(float(x)) for x in grid])


@pytest.mark.parametrize("field", ["u0x", "v0x"])
def test_bump_first_derivatives_match_finite_differences(bump, field):
    base = {"u0x": bump.u0, "v0x": bump.v0}[field]
    deriv = getattr(bump, field)
    h = 1e-6
    for x in (-0.7, -0.2, 0.1, 0.6, 0.9):
        fd = (base(x + h) - base(x - h)) / (2.0 * h)
        assert deriv(x) == pytest.approx(fd, rel=2e-8, abs=1e-12)


def test_bump_second_derivative_matches_finite_differences(bump):
    h = 1e-4
    for x in (-0.5, 0.0, 0.45, 0.8):
        fd = (bump.u0(x + h) - 2.0 * bump.u0(x) + bump.u0(x - h)) / h**2
        assert bump.u0xx(x) == pytest.approx(fd, rel=1e-6, abs=1e-10)


def test_combined_weight_is_the_sweep_coefficient(bump):
    x = np.linspace(-1.1, 1.1, 7)
    np.testing.assert_allclose(bump.combined_weight(x), bump.u0x(x) + bump.v0(x))


def test_gaussian_radius_detected():
    data = builtin("gaussian")
    # exp(-4 x^2) falls below the 1e-14 truncation a bit before x = 3
    assert 2.5 < data.support_radius < 3.5
    assert data.u0(data.support_radius + 0.1) == 0.0
    assert abs(data.u0(data.support_radius - 0.05)) < 1e-12


def test_builtin_catalog_rejects_unknown():
    with pytest.raises(KeyError):
        builtin("solitons")


def test_zero_pair_is_zero(zero_data):
    assert zero_data.u0(0.1) == 0.0
    assert zero_data.combined_weight(np.array([0.0]))[0] == 0.0


@settings(max_examples=25)
@given(xs, ks)
def test_potential_value_reassembles_from_coefficients(x, k):
    data = builtin("bump")
    m = potential_matrices(data, x, k)
    np.testing.assert_allclose(m.U, m.U2 / k**2 + m.U1 / k, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(m.V, m.V2 / k**2 + m.V1 / k + m.V0, rtol=1e-13, atol=1e-15)


@settings(max_examples=25)
@given(xs, ks)
def test_potential_matrices_are_traceless(x, k):
    data = builtin("bump")
    m = potential_matrices(data, x, k)
    assert abs(np.trace(m.U)) < 1e-13 * (1.0 + np.abs(m.U).max())
    assert abs(np.trace(m.V)) < 1e-13 * (1.0 + np.abs(m.V).max())


@settings(max_examples=25)
@given(xs, ks)
def test_cyclic_symmetry_of_u(x, k):
    data = builtin("bump")
    a = potential_matrices(data, x, k).U
    b = potential_matrices(data, x, OMEGA * k).U
    np.testing.assert_allclose(a, cyclic_conjugate(b), atol=1e-12 * (1.0 + np.abs(a).max()))


@settings(max_examples=25)
@given(xs, ks)
def test_conjugation_symmetry_of_u(x, k):
    data = builtin("bump")
    a = potential_matrices(data, x, k).U
    b = potential_matrices(data, x, np.conj(k)).U
    np.testing.assert_allclose(a, swap_conjugate(np.conj(b)), atol=1e-12 * (1.0 + np.abs(a).max()))


def test_u_is_dressed_companion_potential(bump):
    # P U P^{-1} must equal the sparse conjugated coefficient (third row only)
    for x, k in [(-0.4, 2.0), (0.3, 1.0 - 2.0j), (0.8, 0.3j - 0.1)]:
        m = potential_matrices(bump, x, k)
        lhs = dressing_matrix(k) @ m.U @ dressing_inverse(k)
        np.testing.assert_allclose(lhs, m.Utilde, atol=1e-11 * (1.0 + np.abs(lhs).max()))
        np.testing.assert_allclose(m.Utilde, utilde_matrix(bump, x), atol=1e-14)


def test_companion_x_part_contains_symbol(bump):
    k = 1.3 + 0.7j
    m = lax_x_companion(bump, 0.25, k)
    assert m[2, 0] == pytest.approx(k**3 - bump.u0x(0.25) - bump.v0(0.25))
    assert m[0, 1] == 1.0 and m[1, 2] == 1.0


def test_t_part_against_independent_dressing_route(bump):
    # conjugating the companion t-part by P must reproduce V exactly
    for x, k in [(-0.6, 1.7), (0.1, 0.4 + 1.1j), (0.7, -2.0 + 0.5j)]:
        direct = potential_matrices(bump, x, k).V
        oracle = potentials.dressed_oracle_v(bump, x, k)
        np.testing.assert_allclose(direct, oracle, atol=1e-11 * (1.0 + np.abs(direct).max()))


def test_potential_matrices_reject_origin(bump):
    with pytest.raises(SingularDiagonalizer):
        potential_matrices(bump, 0.0, 0.0)


def test_from_samples_round_trip(bump):
    grid = np.linspace(-1.5, 1.5, 2401)
    rebuilt = from_samples(grid, bump.u0(grid), bump.v0(grid), label="resampled")
    assert rebuilt.label == "resampled"
    probe = np.linspace(-0.95, 0.95, 41)
    np.testing.assert_allclose(rebuilt.u0(probe), bump.u0(probe), atol=1e-9)
    np.testing.assert_allclose(rebuilt.v0(probe), bump.v0(probe), atol=1e-9)
    np.testing.assert_allclose(rebuilt.u0x(probe), bump.u0x(probe), atol=1e-7)
    np.testing.assert_allclose(rebuilt.v0x(probe), bump.v0x(probe), atol=1e-7)
    np.testing.assert_allclose(rebuilt.u0xx(probe), bump.u0xx(probe), atol=1e-5)


def test_from_samples_validates_input():
    x = np.linspace(0, 1, 20)
    with pytest.raises(ValueError):
        from_samples(x[::-1], np.zeros(20), np.zeros(20))
    with pytest.raises(ValueError):
        from_samples(x, np.zeros(19), np.zeros(20))


def test_v0_from_u1_recovers_antiderivative(bump):
    # u1 = v0' has zero mean since v0 is compactly supported
    v0 = v0_from_u1(bump.v0x, support_radius=1.0)
    for x in (-0.8, -0.2, 0.3, 0.9, 1.5):
        assert v0(x) == pytest.approx(bump.v0(x), abs=1e-9)


def test_v0_from_u1_rejects_nonzero_mean(bump):
    with pytest.raises(ZeroMeanViolation):
        v0_from_u1(bump.u0, support_radius=1.0)  # the bump has positive mass


def test_normalization_maps_are_inverse():
    f = lambda x: np.exp(-np.asarray(x) ** 2)
    g = inverse_good_boussinesq_map(good_boussinesq_map(f))
    x = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(g(x), f(x), rtol=1e-14)


def test_initial_data_repr_smoke(bump):
    assert "bump" in repr(bump)
