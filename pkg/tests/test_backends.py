"""Twin tests: the compiled sweep kernel against the scipy fallback."""

import subprocess
import sys

import numpy as np
import pytest

from bqscatter import _backend, algebra
from bqscatter.volterra import hermite_table, sweep

needs_fastpath = pytest.mark.skipif(
    not _backend.HAVE_FASTPATH, reason="compiled backend not built"
)


def _column_system(k, j):
    """The X-column-j sweep system (a0, bu, bw) used as a realistic workload."""
    ls = algebra.x_weights(k)
    a0 = np.diag(ls) - ls[j] * np.eye(3)
    p = algebra.dressing_matrix(k)
    pinv = algebra.dressing_inverse(k)
    e1 = np.zeros((3, 3))
    e1[2, 0] = 1.0
    e2 = np.zeros((3, 3))
    e2[2, 1] = 1.0
    bu = -2.0 * (pinv @ e2 @ p)
    bw = -1.0 * (pinv @ e1 @ p)
    y0 = np.zeros(3, dtype=complex)
    y0[j] = 1.0
    return a0, bu, bw, y0


@needs_fastpath
@pytest.mark.parametrize("k", [0.4, 2.3 + 1.1j, -0.8 + 0.2j, 6.0j])
def test_backends_agree_on_eigenfunction_columns(bump, k):
    a0, bu, bw, y0 = _column_system(k, 2)
    targets = np.linspace(1.2, -1.2, 9)
    rc = sweep(a0, bu, bw, bump, 1.2, targets, y0, backend="cython")
    rp = sweep(a0, bu, bw, bump, 1.2, targets, y0, backend="python")
    # both controllers hold the same local tolerance; the global gap grows
    # with the oscillation rate, i.e. with |k|
    atol = 2e-9 * (1.0 + abs(k)) * (1.0 + np.abs(rc).max())
    np.testing.assert_allclose(rc, rp, rtol=0, atol=atol)


@needs_fastpath
def test_compiled_kernel_against_dop853_oracle(bump):
    # DOP853 is an unrelated higher-order method: agreement pins correctness,
    # not just reproducibility
    a0, bu, bw, y0 = _column_system(1.7 + 0.9j, 2)
    targets = np.array([0.9, 0.3, 0.0, -0.4, -1.0])
    rc = sweep(a0, bu, bw, bump, 1.0, targets, y0, backend="cython")
    rd = sweep(
        a0, bu, bw, bump, 1.0, targets, y0,
        backend="python", method="DOP853", rtol=1e-12, atol=1e-13,
    )
    np.testing.assert_allclose(rc, rd, rtol=0, atol=5e-10)


def test_zero_potential_reduces_to_matrix_exponential(zero_data):
    k = 1.0 + 0.5j
    a0, bu, bw, y0 = _column_system(k, 0)
    out = sweep(a0, bu, bw, zero_data, 0.0, [2.0], y0)
    expected = np.diag(np.exp(2.0 * (np.diag(a0)))) @ y0
    np.testing.assert_allclose(out[0], expected, atol=1e-11)


def test_target_order_is_preserved(bump):
    a0, bu, bw, y0 = _column_system(0.9, 1)
    shuffled = np.array([0.0, 0.7, -0.5, 0.2, -1.0])
    ordered = np.sort(shuffled)[::-1]
    a = sweep(a0, bu, bw, bump, 1.0, shuffled, y0)
    b = sweep(a0, bu, bw, bump, 1.0, ordered, y0)
    lookup = {t: row for t, row in zip(ordered, b)}
    for t, row in zip(shuffled, a):
        np.testing.assert_allclose(row, lookup[t], atol=1e-12)


def test_targets_must_be_one_sided(bump):
    a0, bu, bw, y0 = _column_system(1.0, 0)
    with pytest.raises(ValueError):
        sweep(a0, bu, bw, bump, 0.0, [-1.0, 1.0], y0)


def test_target_at_start_point_returns_initial_value(bump):
    a0, bu, bw, y0 = _column_system(1.0, 0)
    out = sweep(a0, bu, bw, bump, 1.5, [1.5], y0)
    np.testing.assert_allclose(out[0], y0, atol=0)


def test_empty_targets(bump):
    a0, bu, bw, y0 = _column_system(1.0, 0)
    assert sweep(a0, bu, bw, bump, 0.0, [], y0).shape == (0, 3)


def test_hermite_table_matches_data_and_is_cached(bump):
    lo, h, coef = hermite_table(bump, "u")
    assert hermite_table(bump, "u")[2] is coef
    xs = np.linspace(-0.999, 0.999, 57)
    idx = np.minimum(((xs - lo) / h).astype(int), coef.shape[0] - 1)
    t = xs - (lo + idx * h)
    vals = coef[idx, 0] + t * (coef[idx, 1] + t * (coef[idx, 2] + t * coef[idx, 3]))
    np.testing.assert_allclose(vals, bump.u0(xs), atol=1e-13)


def test_unknown_backend_rejected(bump):
    a0, bu, bw, y0 = _column_system(1.0, 0)
    with pytest.raises(ValueError):
        sweep(a0, bu, bw, bump, 0.0, [1.0], y0, backend="fortran")


def test_force_python_environment_switch():
    code = (
        "import bqscatter; print(bqscatter.active_backend())"
    )
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "BQSCATTER_FORCE_PYTHON": "1"},
    )
    assert out.stdout.strip() == "python"
