import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dampedwave.profiles import plateau, plateau_derivatives, smooth_step, smooth_step_log_derivatives


def _reference_step(s):
    # e^{-1/s} / (e^{-1/s} + e^{-1/(1-s)}) written out directly
    a, b = np.exp(-1 / s), np.exp(-1 / (1 - s))
    return a / (a + b)


def test_smooth_step_ends():
    assert np.array_equal(smooth_step([-1.0, 0.0, 1.0, 2.0]), [0.0, 0.0, 1.0, 1.0])
    assert smooth_step(0.5) == pytest.approx(0.5)


def test_smooth_step_matches_direct_formula():
    s = np.linspace(0.05, 0.95, 91)
    assert np.allclose(smooth_step(s), _reference_step(s), rtol=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_smooth_step_monotone(a, b):
    lo, hi = sorted((a, b))
    assert smooth_step(lo) <= smooth_step(hi)


def test_log_derivatives_match_finite_differences():
    s = np.linspace(0.1, 0.9, 33)
    h = 1e-5
    log_one_minus, log_d1, log_d2, sign = smooth_step_log_derivatives(s)
    assert np.allclose(np.exp(log_one_minus), 1 - smooth_step(s), rtol=1e-12)
    fd1 = (smooth_step(s + h) - smooth_step(s - h)) / (2 * h)
    fd2 = (smooth_step(s + h) - 2 * smooth_step(s) + smooth_step(s - h)) / h**2
    assert np.allclose(np.exp(log_d1), fd1, rtol=1e-7)
    assert np.allclose(sign * np.exp(log_d2), fd2, rtol=1e-4, atol=1e-5)


def test_log_derivatives_stay_finite_near_edges():
    s = np.array([1e-3, 1 - 1e-3])
    log_one_minus, log_d1, log_d2, _ = smooth_step_log_derivatives(s)
    # the values underflow in linear form but their logs are ordinary numbers
    assert np.all(np.isfinite(log_d1)) and np.all(log_d1 < -500)
    assert np.isfinite(log_one_minus[1]) and log_one_minus[1] < -500


def test_plateau_shapes():
    r = np.array([0.0, 0.5, 0.75, 1.0, 1.5])
    v = plateau(r, 0.5, 1.0)
    assert np.array_equal(v[[0, 1]], [1.0, 1.0])
    assert v[3] == 0.0 and v[4] == 0.0
    assert 0 < v[2] < 1
    w = plateau(np.array([0.75, 4 / 3]), 0.75, 4 / 3, log_scale=True)
    assert w[0] == 1.0 and w[1] == 0.0


def test_plateau_derivative_signs():
    r = np.linspace(0.51, 0.99, 25)
    log_v, log_d1, _, _ = plateau_derivatives(r, 0.5, 1.0)
    assert np.allclose(np.exp(log_v), plateau(r, 0.5, 1.0), rtol=1e-12)
    h = 1e-6
    fd = (plateau(r + h, 0.5, 1.0) - plateau(r - h, 0.5, 1.0)) / (2 * h)
    assert np.all(fd <= 0)
    assert np.allclose(-np.exp(log_d1), fd, rtol=1e-6, atol=1e-12)
