"""Scaling fit inversion, invariances, and error handling."""

import numpy as np
import pytest

from spinquench.errors import FitError
from spinquench.scaling import fit_power_law_with_offset, fit_pure_power_law

LADDER = np.array([500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0])


def test_offset_fit_exact_inversion():
    chi = 0.07 + 48.0 * LADDER ** (-0.71)
    fit = fit_power_law_with_offset(LADDER, chi)
    assert fit.offset_a == pytest.approx(0.07, abs=1e-6)
    assert fit.amplitude_b == pytest.approx(48.0, abs=1e-4)
    assert fit.exponent_gamma == pytest.approx(0.71, abs=1e-6)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.sse <= 1e-12


def test_offset_fit_negative_amplitude():
    chi = 28.3 - 36.3 * LADDER ** (-0.092)
    fit = fit_power_law_with_offset(LADDER, chi)
    assert fit.offset_a == pytest.approx(28.3, rel=1e-4)
    assert fit.amplitude_b == pytest.approx(-36.3, rel=1e-4)
    assert fit.exponent_gamma == pytest.approx(0.092, abs=1e-5)


def test_offset_fit_pure_decay_gives_zero_offset():
    chi = 5.0 * LADDER ** (-1.0)
    fit = fit_power_law_with_offset(LADDER, chi)
    assert fit.exponent_gamma == pytest.approx(1.0, abs=1e-6)
    assert abs(fit.offset_a) <= 1e-8
    assert fit.amplitude_b == pytest.approx(5.0, rel=1e-6)


def test_offset_fit_exponent_stays_in_bracket():
    rng = np.random.default_rng(2)
    chi = 1.0 + rng.uniform(-0.1, 0.1, size=LADDER.size)
    fit = fit_power_law_with_offset(LADDER, chi, gamma_bracket=(-0.2, 2.0))
    assert -0.2 <= fit.exponent_gamma <= 2.0


def test_offset_fit_residual_orthogonality():
    rng = np.random.default_rng(8)
    chi = 0.3 + 7.0 * LADDER ** (-0.6) + rng.normal(scale=1e-3, size=LADDER.size)
    fit = fit_power_law_with_offset(LADDER, chi)
    x = LADDER ** (-fit.exponent_gamma)
    resid = chi - fit.offset_a - fit.amplitude_b * x
    scale = float(np.linalg.norm(chi))
    assert abs(resid.sum()) <= 1e-8 * scale
    assert abs(resid @ x) <= 1e-8 * scale


def test_offset_fit_scale_invariance():
    chi = 0.12 + 3.0 * LADDER ** (-0.45)
    a = fit_power_law_with_offset(LADDER, chi)
    b = fit_power_law_with_offset(LADDER, 100.0 * chi)
    assert b.exponent_gamma == pytest.approx(a.exponent_gamma, abs=1e-6)
    assert b.offset_a == pytest.approx(100.0 * a.offset_a, rel=1e-6)
    assert b.amplitude_b == pytest.approx(100.0 * a.amplitude_b, rel=1e-6)


def test_pure_fit_recovers_growth_law():
    chi = 0.8 * LADDER ** 0.5
    fit = fit_pure_power_law(LADDER, chi)
    assert fit.offset_a == 0.0
    assert fit.exponent_gamma == pytest.approx(0.5, abs=1e-12)
    assert fit.amplitude_b == pytest.approx(0.8, rel=1e-10)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_pure_fit_scale_invariance():
    chi = 2.0 * LADDER ** 0.91
    a = fit_pure_power_law(LADDER, chi)
    b = fit_pure_power_law(LADDER, 13.0 * chi)
    assert b.exponent_gamma == pytest.approx(a.exponent_gamma, abs=1e-12)


def test_error_handling():
    with pytest.raises(FitError):
        fit_power_law_with_offset([100.0, 100.0, 200.0, 300.0], [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(FitError):
        fit_power_law_with_offset([100.0, 200.0, 300.0], [1.0, 2.0, 3.0])
    with pytest.raises(FitError):
        fit_power_law_with_offset(LADDER, np.full(LADDER.size, np.nan))
    with pytest.raises(FitError):
        fit_power_law_with_offset(-LADDER, np.ones(LADDER.size))
    with pytest.raises(FitError):
        fit_pure_power_law(LADDER, np.zeros(LADDER.size))
    with pytest.raises(FitError):
        fit_pure_power_law(LADDER, -np.ones(LADDER.size))
