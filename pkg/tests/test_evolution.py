"""Tests for the pseudospectral time integrator.

The strong-form PDE residual tests use the gaussian pair: its spectrum is
dead at the dealiasing cutoff, so third and fourth spatial derivatives do
not amplify a truncated tail.  The bump pair carries a genuine ~1e-11
energy fraction near the cutoff (inherited from v0) and is used for the
conservation, aliasing, and reflection checks instead.
"""

import csv
import math

import numpy as np
import pytest
from scipy.integrate import quad

from bqscatter import evolution
from bqscatter.errors import EvolutionDiverged
from bqscatter.potentials import builtin, scale


@pytest.fixture(scope="module")
def bump_run():
    data = builtin("bump")
    return data, evolution.evolve(data, 0.5, t_out=(0.0, 0.25, 0.5))


@pytest.fixture(scope="module")
def gauss_states():
    """Five states bracketing t = 0.3 for finite-difference time stencils."""
    data = builtin("gaussian")
    tm, d = 0.3, 2.5e-4
    times = (tm - 2 * d, tm - d, tm, tm + d, tm + 2 * d)
    return d, evolution.evolve(data, tm + 2 * d, t_out=times)


def _spectral_derivative(state, values, order, grid_spacing=None):
    h = grid_spacing if grid_spacing is not None else 2 * state.L / state.N
    xi = 2 * np.pi * np.fft.rfftfreq(state.N, d=h)
    return np.fft.irfft(np.fft.rfft(values) * (1j * xi) ** order, n=state.N)


def test_zero_data_stays_zero():
    states = evolution.evolve(builtin("zero"), 0.4, N=512, L=10.0, dt=1e-3)
    final = states[-1]
    assert np.array_equal(final.u, np.zeros(final.N))
    assert np.array_equal(final.v, np.zeros(final.N))


def test_mass_matches_initial_integral(bump_run):
    data, states = bump_run
    r = data.support_radius
    exact, _ = quad(lambda s: float(data.u0(np.array([s]))[0]), -r, r)
    assert abs(states[0].mass() - exact) < 1e-10


def test_mass_conserved(bump_run):
    _, states = bump_run
    m0 = states[0].mass()
    drifts = [abs(s.mass() - m0) for s in states[1:]]
    assert max(drifts) < 1e-8


def test_output_times_and_defaults(bump_run):
    _, states = bump_run
    assert [s.t for s in states] == [0.0, 0.25, 0.5]
    short = evolution.evolve(builtin("bump"), 0.01, N=256, L=15.0, dt=1e-3)
    assert [s.t for s in short] == [0.0, 0.01]


def test_fourth_order_in_time():
    # halving dt must cut the error by at least 4x; the scheme actually
    # delivers ~16x here
    data = builtin("bump")
    ref = evolution.evolve(data, 0.1, L=15.0, N=512, dt=1e-5)[-1]

    def err(dt):
        s = evolution.evolve(data, 0.1, L=15.0, N=512, dt=dt)[-1]
        return max(np.max(np.abs(s.u - ref.u)), np.max(np.abs(s.v - ref.v)))

    e_coarse, e_fine = err(2e-3), err(1e-3)
    assert e_fine < 1e-10
    assert e_coarse / e_fine > 4.0


def test_first_order_system_residuals(gauss_states):
    """The output states satisfy u_t = v_x and the flux law for v_t."""
    d, (m2, m1, s, p1, p2) = gauss_states
    u_t = (8 * (p1.u - m1.u) - (p2.u - m2.u)) / (12 * d)
    v_t = (8 * (p1.v - m1.v) - (p2.v - m2.v)) / (12 * d)
    r_u = u_t - _spectral_derivative(s, s.v, 1)
    r_v = (
        v_t
        + _spectral_derivative(s, s.u, 3) / 3.0
        + 4.0 / 3.0 * _spectral_derivative(s, s.u**2, 1)
    )
    assert np.max(np.abs(r_u)) < 1e-9
    assert np.max(np.abs(r_v)) < 1e-8


def test_scaled_field_solves_standard_boussinesq(gauss_states):
    """w(y) = (4/sqrt 3) u(y/3^{1/4}) + 1/2 solves w_tt - w_yy + (w^2)_yy + w_yyyy = 0.

    Sampling u on its own grid places w on the stretched grid y = 3^{1/4} x,
    so only the effective spacing changes.
    """
    d, states = gauss_states
    amp = 4.0 / math.sqrt(3.0)
    w = [amp * s.u + 0.5 for s in states]
    w_tt = (-w[4] + 16 * w[3] - 30 * w[2] + 16 * w[1] - w[0]) / (12 * d**2)
    s = states[2]
    hy = 3**0.25 * 2 * s.L / s.N
    resid = (
        w_tt
        - _spectral_derivative(s, w[2], 2, hy)
        + _spectral_derivative(s, w[2] ** 2, 2, hy)
        + _spectral_derivative(s, w[2], 4, hy)
    )
    assert np.max(np.abs(resid)) < 1e-6


def test_v_recoverable_from_u_motion(gauss_states):
    # antidifferentiating u_t reproduces v up to its mean
    d, (m2, m1, s, p1, p2) = gauss_states
    u_t = (8 * (p1.u - m1.u) - (p2.u - m2.u)) / (12 * d)
    xi = 2 * np.pi * np.fft.rfftfreq(s.N, d=2 * s.L / s.N)
    hat = np.fft.rfft(u_t)
    hat[1:] = hat[1:] / (1j * xi[1:])
    hat[0] = 0.0
    v_rec = np.fft.irfft(hat, n=s.N) + np.mean(s.v)
    assert np.max(np.abs(v_rec - s.v)) < 1e-10


def test_aliasing_fraction_stays_small(bump_run):
    _, states = bump_run
    assert all(s.aliasing_fraction() < 1e-10 for s in states)


def test_aliasing_fraction_at_doubled_resolution():
    states = evolution.evolve(builtin("bump"), 0.5, N=4096)
    assert states[-1].aliasing_fraction() < 1e-12


def test_boundary_amplitude_small(bump_run):
    _, states = bump_run
    amps = [s.boundary_amplitude() for s in states]
    assert amps[0] < 1e-12
    assert amps[0] < amps[1] < amps[2]
    assert amps[2] < 1e-4


def test_snapshot_reusable_as_initial_data(bump_run):
    _, states = bump_run
    final = states[-1]
    snap = evolution.snapshot(final)
    assert snap.support_radius <= final.L
    assert snap.label == "evolved@t=0.5"
    # skip the first node: the support mask zeroes the x = -L endpoint
    step = final.N // 8
    probes = final.x[step::step]
    assert np.max(np.abs(snap.u0(probes) - final.u[step::step])) < 1e-12
    assert np.max(np.abs(snap.v0(probes) - final.v[step::step])) < 1e-12


def test_reflection_check_is_identity_at_t0():
    report = evolution.reflection_evolution_check(builtin("bump"), 0.0, [0.8, 1.6])
    assert report["t"] == 0.0
    assert report["phase_max"] < 1e-7
    assert report["modulus_max"] < 1e-7


def test_reflection_follows_phase_law():
    """|r1| is invariant and the phase rotates by exp(-i sqrt(3) k^2 t)."""
    report = evolution.reflection_evolution_check(builtin("bump"), 0.2, [0.8, 1.6])
    assert report["modulus_max"] < 1e-4
    assert report["phase_max"] < 1e-3
    assert report["mass_drift"] < 1e-8
    assert report["r1_initial"].shape == (2,)
    assert report["r1_evolved"].shape == (2,)


def test_evolve_input_validation():
    data = builtin("bump")
    with pytest.raises(ValueError):
        evolution.evolve(data, -0.1)
    with pytest.raises(ValueError):
        evolution.evolve(data, 2.0)  # beyond t_max
    with pytest.raises(ValueError):
        evolution.evolve(data, 0.1, dt=0.0)
    with pytest.raises(ValueError):
        evolution.evolve(data, 0.1, t_out=(0.0, 0.2))
    with pytest.raises(ValueError):
        evolution.evolve(data, 0.1, L=1.0)  # support inside the guard band
    with pytest.raises(ValueError):
        evolution.reflection_evolution_check(data, 0.1, [0.5, -1.0])


def test_divergence_guard_trips_in_small_box():
    with pytest.raises(EvolutionDiverged):
        evolution.evolve(builtin("bump"), 2.0, L=4.0, N=128, dt=1e-3, t_max=2.5)


def test_blowup_guard_message():
    # a 50x bump focuses hard enough to trip the amplitude monitor
    data = scale(builtin("bump"), 50.0)
    with pytest.raises(EvolutionDiverged):
        evolution.evolve(data, 1.0, L=15.0, N=1024, dt=2e-4, t_max=1.5)


def test_history_csv_roundtrip(tmp_path):
    states = evolution.evolve(builtin("bump"), 0.01, N=256, L=15.0, dt=1e-3)
    path = tmp_path / "history.csv"
    evolution.write_history(states, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x", "u", "v"]
    assert len(rows) == 1 + sum(s.N for s in states)
    t_val, x_val, u_val, v_val = (float(c) for c in rows[1])
    assert t_val == states[0].t
    assert x_val == states[0].x[0]
    assert u_val == states[0].u[0]
    assert v_val == states[0].v[0]
    # byte-identical on rewrite
    first = path.read_bytes()
    evolution.write_history(states, path)
    assert path.read_bytes() == first
