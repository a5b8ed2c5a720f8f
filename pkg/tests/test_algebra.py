import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bqscatter import algebra
from bqscatter.algebra import (
    CYCLE,
    OMEGA,
    OMEGA2,
    SECTOR_ASCENDING,
    SWAP,
    cofactor,
    companion_symbol,
    cyclic_conjugate,
    dressing_inverse,
    dressing_laurent,
    dressing_matrix,
    dressing_taylor,
    minor2,
    omega_pow,
    phase_matrices,
    propagator,
    ray_point,
    sector_midpoint,
    sector_of,
    swap_conjugate,
    t_weights,
    theta,
    x_weights,
)
from bqscatter.errors import SingularDiagonalizer

# spectral parameters bounded away from 0 and infinity
ks = st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False)


def test_omega_is_a_primitive_cube_root():
    assert OMEGA**3 == pytest.approx(1.0)
    assert 1.0 + OMEGA + OMEGA2 == pytest.approx(0.0, abs=1e-16)
    assert OMEGA2 == OMEGA.conjugate()
    assert omega_pow(-1) == OMEGA2
    assert omega_pow(7) == OMEGA


@given(ks)
def test_t_weights_are_squared_x_weights(k):
    np.testing.assert_allclose(t_weights(k), x_weights(k) ** 2, rtol=1e-14)


@given(ks, st.integers(1, 3), st.integers(1, 3))
def test_theta_antisymmetry(k, i, j):
    a = theta(i, j, 0.7, -0.3, k)
    b = theta(j, i, 0.7, -0.3, k)
    assert a == pytest.approx(-b, abs=1e-12 * max(1.0, abs(k)) ** 2)


def test_theta_rejects_zero_based_indices():
    with pytest.raises(ValueError):
        theta(0, 1, 0.0, 0.0, 1.0)


def test_theta_21_is_imaginary_on_the_positive_axis():
    # (l_2 - l_1) x = -i sqrt(3) k x and (z_2 - z_1) t = i sqrt(3) k^2 t
    k, x, t = 2.0, 0.5, 0.25
    val = theta(2, 1, x, t, k)
    expected = -1j * math.sqrt(3.0) * k * x + 1j * math.sqrt(3.0) * k * k * t
    assert val == pytest.approx(expected)


@given(ks)
def test_dressing_diagonalizes_the_companion_symbol(k):
    p = dressing_matrix(k)
    lhs = companion_symbol(k) @ p
    rhs = p @ np.diag(x_weights(k))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1.0, abs(k)) ** 3)


@given(ks)
def test_dressing_inverse_is_a_true_inverse(k):
    # the Laurent terms grow like |k|^-2, so allow matching cancellation noise
    p = dressing_matrix(k)
    atol = 1e-13 * max(1.0, abs(k)) ** 2 * max(1.0, 1.0 / abs(k)) ** 2
    np.testing.assert_allclose(p @ dressing_inverse(k), np.eye(3), atol=atol)


def test_dressing_determinant():
    for k in (0.3, 1.0 + 2.0j, -5.0):
        det = np.linalg.det(dressing_matrix(k))
        assert det == pytest.approx(-3.0 * OMEGA * (1.0 - OMEGA) * k**3)


def test_dressing_singular_at_origin():
    with pytest.raises(SingularDiagonalizer):
        dressing_inverse(0.0)


@given(ks)
def test_laurent_data_reassembles_the_inverse(k):
    lau = dressing_laurent()
    direct = np.linalg.inv(dressing_matrix(k))
    assembled = lau.pm2 / k**2 + lau.pm1 / k + lau.p0
    np.testing.assert_allclose(assembled, direct, atol=1e-10)


@given(ks)
def test_taylor_data_reassembles_p(k):
    tay = dressing_taylor()
    assembled = tay.p0 + tay.p1 * k + tay.half_p2 * k**2
    np.testing.assert_allclose(assembled, dressing_matrix(k), rtol=0, atol=1e-14 * max(1.0, abs(k)) ** 2)


def test_phase_matrices_are_diagonal():
    xw, tw = phase_matrices(1.5 + 0.5j)
    assert np.count_nonzero(xw - np.diag(np.diag(xw))) == 0
    np.testing.assert_allclose(np.diag(tw), t_weights(1.5 + 0.5j))


def test_propagator_at_zero_spectral_parameter():
    # companion_symbol(0) is nilpotent; its exponential is the unipotent
    # matrix with the usual 1, d, d^2/2 pattern
    d = 1.0
    expected = np.array([[1.0, d, d * d / 2.0], [0.0, 1.0, d], [0.0, 0.0, 1.0]])
    np.testing.assert_allclose(propagator(2.0, 1.0, 0.0), expected, atol=1e-15)


@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=20, allow_nan=False, allow_infinity=False))
def test_propagator_invariant_under_omega_rotation(k):
    # the free propagator depends on k only through k**3; the last-ulp
    # difference between k**3 and (omega*k)**3 sits in an exponent, so the
    # admissible relative error grows with |k|**3
    a = propagator(0.4, -0.2, k)
    b = propagator(0.4, -0.2, OMEGA * k)
    np.testing.assert_allclose(a, b, rtol=1e-12 * max(1.0, abs(k)) ** 3, atol=1e-13)


def test_cycle_and_swap_orders():
    np.testing.assert_array_equal(np.linalg.matrix_power(CYCLE, 3), np.eye(3))
    np.testing.assert_array_equal(SWAP @ SWAP, np.eye(3))


mats = st.lists(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=9, max_size=9
).map(lambda v: np.array(v).reshape(3, 3))


@given(mats)
def test_cofactor_against_inverse_transpose(m):
    det = np.linalg.det(m)
    if abs(det) < 1e-6:
        return
    np.testing.assert_allclose(cofactor(m), det * np.linalg.inv(m).T, rtol=1e-7, atol=1e-7 * abs(det))


@given(mats, st.integers(0, 2), st.integers(0, 2))
def test_minor2_matches_numpy(m, i, j):
    sub = np.delete(np.delete(m, i, axis=0), j, axis=1)
    assert minor2(m, i, j) == pytest.approx(np.linalg.det(sub), abs=1e-9)


@given(mats)
def test_conjugation_helpers_are_conjugations(m):
    np.testing.assert_allclose(cyclic_conjugate(cyclic_conjugate(cyclic_conjugate(m))), m, atol=1e-12)
    np.testing.assert_allclose(swap_conjugate(swap_conjugate(m)), m, atol=1e-12)


@pytest.mark.parametrize("n", range(1, 7))
def test_sector_midpoints_classify_into_their_sector(n):
    pt = sector_of(sector_midpoint(n, 2.0))
    assert (pt.kind, pt.index) == ("sector", n)
    assert not pt.is_ray


@pytest.mark.parametrize("m", range(1, 7))
def test_ray_points_classify_onto_their_ray(m):
    pt = sector_of(ray_point(m, 0.7))
    assert (pt.kind, pt.index) == ("ray", m)
    assert pt.is_ray


def test_origin_classification():
    assert sector_of(0.0).kind == "origin"


@given(ks)
def test_omega_rotation_shifts_classification_by_two(k):
    a = sector_of(k)
    b = sector_of(OMEGA * k)
    if a.kind == "sector" and b.kind == "sector":
        assert b.index == (a.index - 1 + 2) % 6 + 1
    if a.kind == "ray" and b.kind == "ray":
        assert b.index == (a.index - 1 + 2) % 6 + 1


@pytest.mark.parametrize("n", range(1, 7))
def test_ascending_order_matches_real_parts(n):
    k = sector_midpoint(n, 1.3)
    re = x_weights(k).real
    assert tuple(np.argsort(re)) == SECTOR_ASCENDING[n]


@pytest.mark.parametrize("bad", [0, 7])
def test_ray_and_sector_index_validation(bad):
    with pytest.raises(ValueError):
        ray_point(bad, 1.0)
    with pytest.raises(ValueError):
        sector_midpoint(bad, 1.0)
