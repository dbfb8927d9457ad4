import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dampedwave.analysis import (
    CriticalParams,
    SolverConfig,
    TestFunctionPair,
    boundary_growth_exponent,
    boundary_term,
    check_gn,
    check_hls,
    critical_exponent,
    detect_blowup,
    fit_decay_rate,
    gn_exponent,
    hls_target_exponent,
    sweep_criticality,
    weak_functional,
    xt_norm,
)
from dampedwave.besov import make_besov_data
from dampedwave.evolution import Trajectory, linear_trajectory, semilinear_solve
from dampedwave.grid import RealField, hdot_norm, lp_norm, make_grid, random_band_limited
from dampedwave.riesz import RieszParams

from oracles import LOG2_1000, P_FUJI


# -- decay fits ----------------------------------------------------------------


def test_exact_power_law_fit():
    t = np.linspace(0, 100, 60)
    slope, err = fit_decay_rate(list(zip(t, (1 + t) ** -0.75)), (0, 100))
    assert slope == pytest.approx(-0.75, abs=1e-12)
    assert err < 1e-8


def test_constant_series_fit():
    t = np.linspace(0, 10, 20)
    assert fit_decay_rate((t, np.full(t.size, 3.0)), (0, 10)) == (0.0, 0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), rate=st.floats(-2, 0))
def test_noisy_power_law_fit(seed, rate):
    rng = np.random.default_rng(seed)
    t = np.geomspace(1, 100, 50)
    v = (1 + t) ** rate * (1 + 0.01 * rng.standard_normal(t.size))
    slope, _ = fit_decay_rate((t, v), (1, 100))
    assert abs(slope - rate) <= 0.02


def test_fit_guards():
    t = np.linspace(0, 10, 20)
    with pytest.raises(ValueError, match="need 8"):
        fit_decay_rate((t, np.ones(t.size)), (0, 2))
    with pytest.raises(ValueError, match="positive"):
        fit_decay_rate((t, -np.ones(t.size)), (0, 10))


# -- blow-up detection and the X(T) norm -----------------------------------------


def _traj_from(times, linf, blown_up=False):
    traj = Trajectory()
    for t, v in zip(times, linf):
        traj.record(t, v, v, v, v)
    traj.blown_up = blown_up
    traj.blowup_time = times[-1] if blown_up else None
    return traj


def test_detect_exponential_growth():
    t = np.linspace(0, 12, 49)
    found = detect_blowup(_traj_from(t, 2.0**t), 1e3)
    assert found == pytest.approx(LOG2_1000, abs=1e-9)


def test_detect_none_for_decay():
    t = np.linspace(0, 12, 49)
    assert detect_blowup(_traj_from(t, np.exp(-t)), 1e3) is None


def test_detect_passes_solver_flag():
    traj = _traj_from([0.0, 1.0, 2.0], [1.0, 2.0, 3.0], blown_up=True)
    assert detect_blowup(traj, 1e6) == 2.0
    with pytest.raises(ValueError):
        detect_blowup(traj, 0.0)


def test_xt_norm_trivial_cases():
    assert xt_norm(Trajectory(), 0.25) == 0.0
    zero = _traj_from([0.0, 1.0], [0.0, 0.0])
    assert xt_norm(zero, 0.25) == 0.0
    single = Trajectory()
    single.record(0.0, 1.5, 2.0, 0.25, 9.0)
    assert xt_norm(single, 0.3) == pytest.approx(3.75)


def test_xt_norm_infinite_after_blowup():
    norm = xt_norm(_traj_from([0.0, 1.0], [1.0, 1e9], blown_up=True), 0.0)
    assert math.isinf(norm) and norm.detect_time == 1.0


def test_xt_norm_rejects_mismatched_order():
    with pytest.raises(ValueError):
        xt_norm(Trajectory(alpha=1.0), 0.0, alpha=0.5)


def test_xt_norm_of_linear_solution_is_controlled_by_data():
    g = make_grid(1, 4096, 256)
    u0 = make_besov_data(g, 0.25, 1.0)
    traj = linear_trajectory(u0, u0, np.linspace(0, 50, 201))
    norm = xt_norm(traj, 0.25)
    data = lp_norm(u0, 2) + hdot_norm(u0, 1)
    assert math.isfinite(norm)
    assert norm / data < 3.0


# -- critical exponents and sweeps ----------------------------------------------


@pytest.mark.parametrize("key", sorted(P_FUJI))
def test_critical_exponent_values(key):
    assert critical_exponent(CriticalParams(*key)) == pytest.approx(P_FUJI[key], rel=1e-15)


def test_critical_exponent_monotonicity():
    for n in (1, 2, 3):
        betas = np.linspace(0, n / 2, 7)
        gammas = np.linspace(0, n * 0.99, 7)
        for gamma in gammas:
            vals = [critical_exponent(CriticalParams(n, b, gamma)) for b in betas]
            assert np.all(np.diff(vals) < 0)
        for beta in betas:
            vals = [critical_exponent(CriticalParams(n, beta, g)) for g in gammas]
            assert np.all(np.diff(vals) > 0)


def test_critical_params_derived_and_guards():
    p = CriticalParams(2, 0.5, 1.0)
    assert p.m_beta == pytest.approx(4 / 3)
    for bad in [(0, 0, 0), (1, 0.6, 0), (1, 0, 1.0), (1, -0.1, 0)]:
        with pytest.raises(ValueError):
            CriticalParams(*bad)


def test_solver_config_wrap_guard():
    with pytest.raises(ValueError, match="wrap-around"):
        SolverConfig(half_length=64, T=60)
    with pytest.raises(ValueError):
        SolverConfig(threads=0)


@pytest.fixture(scope="module")
def small_sweeps():
    params = CriticalParams(1, 0.0, 0.0)
    config = SolverConfig(1024, 128.0, 100.0, 0.05, threads=2)
    strong = sweep_criticality(params, [(1.2, 1.2)], 1.0, config)
    weak = sweep_criticality(params, [(3.0, 3.0)], 1e-2, config)
    return strong, weak


def test_sweep_subcritical_row(small_sweeps):
    strong, _ = small_sweeps
    assert strong.p_fuji == 5.0
    row = strong.rows[0]
    assert row.outcome in ("grew", "blown_up")
    if row.outcome == "blown_up":
        assert row.detect_time is not None and row.detect_time > 0


def test_sweep_supercritical_small_data_decays(small_sweeps):
    _, weak = small_sweeps
    assert weak.outcome(3.0, 3.0) == "decayed"
    with pytest.raises(KeyError):
        weak.outcome(1.0, 1.0)


def test_sweep_outputs(tmp_path, small_sweeps):
    strong, _ = small_sweeps
    lines = strong.to_csv(tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "p1,p2,p_sum,p_fuji,outcome,detect_time,final_l2,xt_norm,note"
    assert ",5.0," in lines[1]
    heat = strong.write_heatmap(tmp_path / "h.dat").read_text().splitlines()
    assert heat[1].split()[2] in ("1", "2")


def test_sweep_records_row_errors():
    params = CriticalParams(1, 0.0, 0.0)
    config = SolverConfig(64, 16.0, 1.0, 0.5)
    report = sweep_criticality(params, [(1e-300, 1.0)], 1.0, config)
    assert report.rows[0].outcome in ("decayed", "grew", "blown_up", "error")
    with pytest.raises(ValueError):
        sweep_criticality(params, [(0.0, 1.0)], 1.0, config)


# -- weak formulation -------------------------------------------------------------


def test_test_function_pair():
    tf = TestFunctionPair.from_powers(4.0, 1.5, 2.5)
    assert tf.p_tilde == 2.0 and tf.q_tilde == 2.0
    chi, d1, d2 = tf.chi_derivatives(np.array([0.0, 8.0, 12.0, 16.0, 20.0]))
    assert chi[0] == 1.0 and chi[1] == 1.0 and chi[3] == 0.0 and chi[4] == 0.0
    assert d1[2] < 0
    with pytest.raises(ValueError):
        TestFunctionPair(0.0, 2.0)
    with pytest.raises(ValueError):
        TestFunctionPair(1.0, 1.0)


@pytest.mark.parametrize("p_tilde", [1.2, 1.5, 2.0, 4.0])
@pytest.mark.parametrize("dims", [1, 2, 3])
def test_hoelder_bounds_are_finite(p_tilde, dims):
    tf = TestFunctionPair(1.0, p_tilde)
    assert math.isfinite(tf.log_time_bound())
    assert math.isfinite(tf.log_space_bound(dims))


def test_laplacian_of_phi_matches_finite_differences():
    g = make_grid(1, 2048, 16.0)
    tf = TestFunctionPair(5.0, 2.0)
    phi = tf.phi(g)
    h = g.spacing
    fd = (np.roll(phi, -1) - 2 * phi + np.roll(phi, 1)) / h**2
    assert np.max(np.abs(fd - tf.laplacian_phi(g))) < 1e-3 * np.max(np.abs(fd))


def test_zero_solution_reduces_to_data_term():
    g = make_grid(1, 512, 32.0)
    u0 = make_besov_data(g, 0.0, 1.0)
    z = RealField.zeros(g)
    tf = TestFunctionPair(4.0, 2.0)
    snaps = {float(t): z for t in np.linspace(0, 16, 65)}
    wf = weak_functional(snaps, (u0, u0), tf, 1.0, 1.0, 0.0)
    assert wf.K_R == 0.0 and wf.M_R == 0.0
    assert wf.residual == -boundary_term(u0, u0, tf)


def test_weak_functional_guards():
    g = make_grid(1, 256, 16.0)
    z = RealField.zeros(g)
    tf = TestFunctionPair(4.0, 2.0)
    with pytest.raises(ValueError, match="need"):
        weak_functional({0.0: z, 16.0: z}, (z, z), tf, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError, match="cover"):
        weak_functional({float(t): z for t in np.linspace(0, 10, 40)}, (z, z), tf, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError, match="too large"):
        weak_functional({}, (z, z), TestFunctionPair(15.0, 2.0), 1.0, 1.0, 0.0)


def test_weak_residual_small_on_solved_trajectory():
    g = make_grid(1, 1024, 64)
    u0 = make_besov_data(g, 0.0, 0.05)
    R = 6.0
    traj = semilinear_solve(u0, u0, 1.5, 1.5, RieszParams(0.5, 1), R * R, 0.05, snapshot_every=10)
    wf = weak_functional(traj, (u0, u0), TestFunctionPair.from_powers(R, 1.5, 1.5), 1.5, 1.5, 0.5)
    assert wf.relative_residual <= 0.05


def test_boundary_growth_exponent_returns_both_slopes():
    g = make_grid(1, 4096, 128)
    u0 = make_besov_data(g, 0.25, 1.0)
    raw, corrected = boundary_growth_exponent(u0, u0, np.geomspace(8, 64, 7))
    assert corrected > raw > 0
    with pytest.raises(ValueError):
        boundary_growth_exponent(u0, u0, [8, 16])


# -- inequalities ---------------------------------------------------------------


@pytest.fixture(scope="module")
def samples():
    rng = np.random.default_rng(7)
    g = make_grid(1, 1024, 64)
    return [random_band_limited(g, rng, 4.0) for _ in range(20)]


def test_hls_exponent():
    assert hls_target_exponent(0.5, 4 / 3, 1) == pytest.approx(4.0)


def test_hls_report(samples, tmp_path):
    rep = check_hls(samples, 0.5, 4 / 3)
    assert rep.passed and math.isfinite(rep.max_ratio)
    assert rep.parameters["m1"] == pytest.approx(4.0)
    assert len(rep.to_csv(tmp_path / "h.csv").read_text().splitlines()) == 21


def test_hls_gaussian_sample():
    g = make_grid(1, 1024, 64)
    f = RealField.from_function(g, lambda x: np.exp(-x * x / 2))
    assert math.isfinite(check_hls([f], 0.5, 4 / 3).max_ratio)


def test_hls_rejects_invalid_exponents(samples):
    with pytest.raises(ValueError):
        check_hls(samples, 0.5, 4.0)
    with pytest.raises(ValueError):
        check_hls(samples, 1.0, 1.5)
    with pytest.raises(ValueError):
        check_hls([], 0.5, 1.5)


def test_gn_degenerate_case_is_identity(samples):
    rep = check_gn(samples, 0.0, 1.0, 2.0, 2.0, 2.0)
    assert rep.parameters["omega"] == 0.0
    assert np.allclose(rep.ratios, 1.0, rtol=1e-14)


def test_gn_scan_finite(samples):
    rep = check_gn(samples, 0.5, 1.0, 2.0, 2.0, 2.0)
    assert rep.passed and math.isfinite(rep.max_ratio)


def test_gn_exponent_reproduces_hartree_interpolation_exponent():
    # theta = 0, a = alpha, p0 = p1 = 2 and p = r n p1 / (n + r gamma)
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        r = rng.uniform(2.5, 8)
        gamma = rng.uniform(0, 0.9 * n)
        p1 = rng.uniform(1.1, 4)
        alpha = rng.uniform(0.5, 2)
        target = (r * n * p1 - 2 * n - 2 * r * gamma) / (2 * r * alpha * p1)
        q = r * n * p1 / (n + r * gamma)
        assert gn_exponent(0.0, alpha, q, 2.0, 2.0, n) == pytest.approx(target, rel=1e-12)


def test_gn_rejects_invalid(samples):
    with pytest.raises(ValueError):
        check_gn(samples, 0.5, 1.0, 1.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        check_gn(samples, 1.5, 1.0, 2.0, 2.0, 2.0)
    with pytest.raises(ValueError, match="omega"):
        check_gn(samples, 0.5, 1.0, 2.0, 8.0, 8.0)
