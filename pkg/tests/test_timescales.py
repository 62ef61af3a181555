"""Timescale predictions against the evolved dynamics and symmetry checks."""

import numpy as np
import pytest

from spinquench.errors import UndefinedTimescale
from spinquench.quench import QuenchSpec, QuenchResult, evolve_n0, run_quench
from spinquench.timescales import (
    predict_timescales,
    scaling_of_timescales,
    to_physical_seconds,
)

REFERENCE = QuenchSpec(2000, -1.0, -3.0, -0.5)


@pytest.fixture(scope="module")
def reference_result():
    return run_quench(REFERENCE)


@pytest.fixture(scope="module")
def reference_report(reference_result):
    return predict_timescales(reference_result)


def test_reference_quench_values(reference_report):
    n = REFERENCE.n_atoms
    assert 0.01 <= reference_report.t_collapse / n <= 0.03
    assert reference_report.t_revival / n == pytest.approx(0.735, rel=0.10)
    assert reference_report.sigma_index_offset >= 1


def test_separation_of_scales(reference_report):
    r = reference_report
    assert 0.0 < r.t_oscillation <= r.t_collapse <= r.t_revival <= r.t_randomize


def test_identity_quench_is_undefined():
    result = run_quench(QuenchSpec(400, -1.0, -3.0, -3.0))
    with pytest.raises(UndefinedTimescale):
        predict_timescales(result)


def test_antisymmetry_of_timescales():
    fwd = predict_timescales(run_quench(QuenchSpec(600, -1.0, -3.0, -0.5, "ground"),
                                        band_width=1))
    rev = predict_timescales(run_quench(QuenchSpec(600, 1.0, 3.0, 0.5, "most_excited"),
                                        band_width=1))
    assert fwd.t_collapse == pytest.approx(rev.t_collapse, rel=1e-9)
    assert fwd.t_revival == pytest.approx(rev.t_revival, rel=1e-9)
    assert fwd.t_oscillation == pytest.approx(rev.t_oscillation, rel=1e-9)
    assert fwd.t_randomize == pytest.approx(rev.t_randomize, rel=1e-9)


def test_collapse_envelope_reaches_the_plateau(reference_result, reference_report):
    t_c = reference_report.t_collapse
    times = np.linspace(2.0 * t_c, 6.0 * t_c, 500)
    signal = evolve_n0(reference_result, times)
    pde = reference_result.pde
    assert np.abs(signal - pde).max() <= 0.05 * abs(pde)
    # before the collapse the signal still oscillates visibly
    early = evolve_n0(reference_result, np.linspace(0.0, t_c, 500))
    assert np.abs(early - pde).max() > 0.2 * abs(pde)


def test_revival_happens_at_the_predicted_time(reference_result, reference_report):
    t_r = reference_report.t_revival
    times = np.linspace(0.80 * t_r, 1.20 * t_r, 1200)
    signal = evolve_n0(reference_result, times)
    dev = np.abs(signal - reference_result.pde)
    t_peak = times[np.argmax(dev)]
    assert abs(t_peak - t_r) <= 0.10 * t_r
    assert dev.max() > 0.1 * abs(reference_result.pde)


def test_oscillation_matches_dominant_frequency(reference_result, reference_report):
    t_osc = reference_report.t_oscillation
    n_t, dt = 4096, t_osc / 40.0
    times = np.arange(n_t) * dt
    signal = evolve_n0(reference_result, times)
    spectrum = np.abs(np.fft.rfft(signal - signal.mean()))
    freqs = np.fft.rfftfreq(n_t, dt)
    f_peak = freqs[np.argmax(spectrum)]
    assert abs(f_peak - 1.0 / t_osc) <= freqs[1]  # within one grid bin


def test_multi_peak_distribution_raises_with_diagnostics(reference_result):
    band = reference_result.overlap_band.copy()
    rows = np.arange(band.shape[0])
    third = band.shape[0] // 3
    dist_col = (np.exp(-0.5 * ((rows - third) / 4.0) ** 2)
                + 0.9 * np.exp(-0.5 * ((rows - 2 * third) / 4.0) ** 2))
    band[:, 1] = dist_col
    doctored = QuenchResult(
        spec=reference_result.spec, energies=reference_result.energies,
        eon=reference_result.eon, eev=reference_result.eev,
        mean_energy=reference_result.mean_energy, pde=reference_result.pde,
        effective_dimension=reference_result.effective_dimension,
        retained=reference_result.retained,
        retained_weight=reference_result.retained_weight,
        band_width=reference_result.band_width, overlap_band=band,
        n0_t0=reference_result.n0_t0, h_norm=reference_result.h_norm)
    with pytest.raises(UndefinedTimescale) as err:
        predict_timescales(doctored)
    assert len(err.value.peaks) == 2
    assert all("t_revival" in p for p in err.value.peaks)


def test_scaling_of_timescales_small_ladder():
    sizes, reports, fit_c, fit_r = scaling_of_timescales(
        -1.0, -3.0, -0.5, (500, 750, 1000, 1500, 2000))
    assert fit_r.exponent_gamma == pytest.approx(1.0, abs=0.1)
    assert fit_c.exponent_gamma == pytest.approx(0.5, abs=0.15)
    assert all(r.t_revival / n == pytest.approx(0.735, rel=0.1)
               for r, n in zip(reports, sizes))
    with pytest.raises(ValueError):
        scaling_of_timescales(-1.0, -3.0, -0.5, (500, 1000))


def test_physical_units(reference_report):
    seconds = to_physical_seconds(reference_report, -2.0 * np.pi * 9.0)
    assert seconds["t_revival_s"] == pytest.approx(25.0, rel=0.15)
    assert 0.25 <= seconds["t_collapse_s"] <= 1.0
    with pytest.raises(ValueError):
        to_physical_seconds(reference_report, 0.0)
