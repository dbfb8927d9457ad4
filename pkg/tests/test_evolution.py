import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dampedwave.evolution import (
    ModeState,
    NonFiniteError,
    Trajectory,
    fractional_heat_solve,
    hartree_nonlinearity,
    linear_solve,
    linear_trajectory,
    power_abs,
    propagate,
    semilinear_solve,
    wraparound_time,
)
from dampedwave.besov import lp_window, make_besov_data
from dampedwave.grid import RealField, SpectralField, forward_transform, inverse_transform, load_field, lp_norm, make_grid
from dampedwave.riesz import RieszParams, riesz_direct

from oracles import gaussian_heat_l2, rk4_damped_modes

NO_RIESZ = RieszParams(0.0, 1)


def _gaussian(g):
    return RealField.from_function(g, lambda x: np.exp(-x * x / 2))


def test_mean_mode_conserved_without_velocity():
    g = make_grid(1, 64, 5.0)
    u0 = RealField(g, 1.0 + np.cos(np.pi * g.coords[0] / 5.0))
    for t in (0.5, 3.0, 40.0):
        s = linear_solve(u0, RealField.zeros(g), t)
        assert s.u_hat[0] == pytest.approx(1.0, abs=1e-14)


def test_mean_mode_from_velocity():
    g = make_grid(1, 64, 5.0)
    for t in (0.5, 3.0, 40.0):
        s = linear_solve(RealField.zeros(g), RealField(g, np.full(g.shape, 2.0)), t)
        assert s.u_hat[0].real == pytest.approx(2 * -math.expm1(-t), rel=1e-14)


def test_linear_solve_matches_rk4(rng):
    g = make_grid(1, 256, 40.0)
    u0 = RealField(g, rng.standard_normal(g.shape))
    u1 = RealField(g, rng.standard_normal(g.shape))
    s = linear_solve(u0, u1, 5.0)
    c0, c1 = forward_transform(u0).coeffs, forward_transform(u1).coeffs
    u, v = rk4_damped_modes(g.xi_norm, c0, c1, 5.0, 5000)
    scale = np.abs(c0) + np.abs(c1)
    assert np.max((np.abs(s.u_hat - u) + np.abs(s.ut_hat - v)) / scale) < 1e-6


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), s=st.floats(0, 10), t=st.floats(0, 10))
def test_propagation_is_a_semigroup(seed, s, t):
    rng = np.random.default_rng(seed)
    g = make_grid(1, 64, 8.0)
    u0, u1 = (RealField(g, rng.standard_normal(g.shape)) for _ in range(2))
    direct = linear_solve(u0, u1, s + t)
    stepped = propagate(linear_solve(u0, u1, s), t)
    assert np.allclose(stepped.u_hat, direct.u_hat, atol=1e-12)
    assert np.allclose(stepped.ut_hat, direct.ut_hat, atol=1e-12)
    assert stepped.time == pytest.approx(s + t)


def test_linear_solve_guards():
    g = make_grid(1, 16, 1.0)
    with pytest.raises(ValueError):
        linear_solve(RealField.zeros(g), RealField.zeros(g), -1.0)
    with pytest.raises(ValueError):
        linear_solve(RealField.zeros(g), RealField.zeros(make_grid(1, 32, 1.0)), 1.0)


def test_mode_state_norms_and_fields(rng):
    g = make_grid(1, 64, 4.0)
    u0 = RealField(g, rng.standard_normal(g.shape))
    s = linear_solve(u0, RealField.zeros(g), 0.0)
    assert np.allclose(s.u.samples, u0.samples)
    l2, _, dt = s.norms()
    assert l2 == pytest.approx(lp_norm(u0, 2))
    assert dt == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        ModeState(g, s.u_hat, s.ut_hat, -1.0)


def test_fractional_heat_identity_and_guard(rng):
    g = make_grid(1, 64, 4.0)
    f = RealField(g, rng.standard_normal(g.shape))
    assert np.allclose(fractional_heat_solve(f, 1.0, 0.0).samples, f.samples, atol=1e-13)
    with pytest.raises(ValueError):
        fractional_heat_solve(f, 0.5, 1.0)


def test_fractional_heat_gaussian_closed_form():
    g = make_grid(1, 2048, 128)
    f = _gaussian(g)
    for t in (0.1, 1.0, 10.0, 100.0):
        assert lp_norm(fractional_heat_solve(f, 1.0, t), 2) == pytest.approx(gaussian_heat_l2(t), rel=1e-6)


@pytest.mark.parametrize("lam", [1.0, 2.0, 4.0])
def test_annulus_data_decay_constant(lam):
    g = make_grid(1, 4096, 256)
    F = SpectralField(g, lp_window(g.xi_norm / lam).astype(complex))
    f = inverse_transform(F)
    f0 = lp_norm(f, 2)
    t = np.linspace(0.05, 4.0, 40) / lam**2
    ratios = np.array([lp_norm(fractional_heat_solve(f, 1.0, tk), 2) / f0 for tk in t])
    empirical = np.min(-np.log(ratios) / (lam**2 * t))
    assert empirical >= (3 / 4) ** 2 * 0.9


def test_power_abs():
    out = power_abs(np.array([-2.0, 0.0, 3.0]), 0.5)
    assert out[1] == 0.0
    assert out[0] == pytest.approx(math.sqrt(2))
    with pytest.raises(NonFiniteError):
        power_abs(np.array([1e200]), 3.0)


def test_hartree_gamma_zero_is_pointwise_power(rng):
    g = make_grid(1, 64, 4.0)
    u = RealField(g, rng.standard_normal(g.shape))
    out = hartree_nonlinearity(u, 1.3, 2.1, NO_RIESZ)
    assert np.allclose(out.samples, np.abs(u.samples) ** 3.4, rtol=1e-13)


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.9])
@pytest.mark.parametrize("localized", [False, True])
def test_hartree_positive_for_positive_data(rng, gamma, localized):
    # with the mean mode weighted the torus kernel is positive; the default
    # convention removes the mean of |u|^p1 and is positive only up to that mean
    g = make_grid(1, 256, 16.0)
    samples = np.abs(rng.standard_normal(g.shape))
    if localized:
        samples *= np.exp(-g.coords[0] ** 2 / 4)
    out = hartree_nonlinearity(RealField(g, samples), 1.5, 1.5, RieszParams(gamma, 1, "lattice"))
    assert out.samples.min() >= -1e-12


def test_hartree_default_mean_removal_is_small_for_localized_data():
    g = make_grid(1, 1024, 64)
    u = _gaussian(g)
    assert hartree_nonlinearity(u, 1.5, 1.5, RieszParams(0.5, 1)).samples.min() >= -1e-12


def test_hartree_matches_direct_quadrature():
    g = make_grid(1, 1024, 64)
    u = _gaussian(g)
    params = RieszParams(0.5, 1)
    spectral = hartree_nonlinearity(u, 1.0, 1.0, params)
    direct = RealField(g, riesz_direct(RealField(g, np.abs(u.samples)), params).samples * np.abs(u.samples))
    assert lp_norm(spectral - direct, 2) / lp_norm(direct, 2) < 1e-3


def test_hartree_rejects_bad_powers():
    g = make_grid(1, 16, 1.0)
    with pytest.raises(ValueError):
        hartree_nonlinearity(RealField.zeros(g), 0.0, 1.0, NO_RIESZ)


def test_zero_data_stays_zero():
    g = make_grid(1, 128, 20.0)
    z = RealField.zeros(g)
    traj = semilinear_solve(z, z, 2.0, 2.0, NO_RIESZ, 2.0, 0.1)
    assert len(traj) == 21
    assert not traj.blown_up
    assert np.all(traj.series("l2") == 0) and np.all(traj.series("dt_l2") == 0)


def test_linear_consistency(rng):
    g = make_grid(1, 256, 30.0)
    u0 = make_besov_data(g, 0.25, 1.0)
    u1 = RealField(g, np.exp(-g.coords[0] ** 2))
    traj = semilinear_solve(u0, u1, 2.0, 2.0, NO_RIESZ, 4.0, 0.1,
                            forcing_override=lambda t: 0.0, snapshot_every=1)
    for t, snap in traj.snapshots.items():
        exact = linear_solve(u0, u1, t).u
        assert lp_norm(snap - exact, 2) <= 1e-10 * lp_norm(exact, 2)


def _mms_error(dt, T=4.0):
    g = make_grid(1, 64, 8 * math.pi)  # sin(x) is the lattice mode with |xi| = 1
    x = g.coords[0]
    shape = np.sin(x)
    # u = e^{-t} sin x: u_tt + u_t - u_xx = e^{-t} sin x
    forcing = lambda t: RealField(g, math.exp(-t) * shape)  # noqa: E731
    traj = semilinear_solve(RealField(g, shape), RealField(g, -shape), 1.0, 1.0, NO_RIESZ, T, dt,
                            forcing_override=forcing, snapshot_every=1)
    return max(lp_norm(u - RealField(g, math.exp(-t) * shape), 2) for t, u in traj.snapshots.items())


def test_manufactured_solution_second_order():
    errors = [_mms_error(dt) for dt in (0.2, 0.1, 0.05)]
    assert errors[0] / errors[1] >= 3.5
    assert errors[1] / errors[2] >= 3.5


def test_small_supercritical_data_stays_bounded():
    g = make_grid(1, 1024, 128)
    u0 = make_besov_data(g, 0.0, 1e-2)
    traj = semilinear_solve(u0, u0, 3.0, 3.0, NO_RIESZ, 100.0, 0.05)
    assert not traj.blown_up
    assert traj.series("l2").max() <= 2 * traj.l2[0]


def test_large_data_blows_up():
    g = make_grid(1, 1024, 128)
    u0 = make_besov_data(g, 0.0, 1.0)
    traj = semilinear_solve(u0, u0, 1.5, 1.5, NO_RIESZ, 50.0, 0.05)
    assert traj.blown_up
    assert 0 < traj.blowup_time < 10
    assert traj.t[-1] == pytest.approx(traj.blowup_time)


def test_solver_guards():
    g = make_grid(1, 16, 1.0)
    z = RealField.zeros(g)
    with pytest.raises(ValueError):
        semilinear_solve(z, z, 2.0, 2.0, NO_RIESZ, 1.0, 0.0)
    with pytest.raises(ValueError):
        semilinear_solve(z, z, 2.0, 2.0, NO_RIESZ, 1.0, 2.0)


def test_wraparound_time():
    assert wraparound_time(make_grid(1, 64, 100.0)) == pytest.approx(80.0)


def test_trajectory_bookkeeping(tmp_path):
    g = make_grid(1, 128, 10.0)
    u0 = _gaussian(g)
    traj = linear_trajectory(u0, RealField.zeros(g), [0.0, 1.0, 2.0], snapshot_times=[1.0])
    with pytest.raises(ValueError):
        traj.record(1.5, 1, 1, 1, 1)
    with pytest.raises(KeyError):
        traj.series("energy")
    lines = traj.to_csv(tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,l2,hdot_alpha,dt_l2,blown_up"
    assert len(lines) == 4
    (path,) = traj.dump_snapshots(tmp_path / "snaps")
    assert np.allclose(load_field(path).samples, linear_solve(u0, RealField.zeros(g), 1.0).u.samples)


def test_blown_up_flag_in_csv(tmp_path):
    traj = Trajectory()
    traj.record(0.0, 1, 1, 1, 1)
    traj.record(1.0, 9, 9, 9, 9)
    traj.blown_up, traj.blowup_time = True, 1.0
    rows = traj.to_csv(tmp_path / "t.csv").read_text().splitlines()
    assert rows[1].endswith(",0") and rows[2].endswith(",1")
