"""Microcanonical windows, ETH indicators, kink detection, classification."""

import numpy as np
import pytest

from spinquench.eigensolver import decompose
from spinquench.errors import NoKink, NoValidWindow
from spinquench.model import SpinorModel, build_hamiltonian, build_observable_n0
from spinquench.quench import QuenchSpec, run_quench
from spinquench.thermalization import (
    Region,
    classify_region,
    detect_kink,
    eth_condition,
    eth_indicators,
    kink_overlap_weight,
    make_window,
    mc_prediction,
    participation_ratio,
    participation_ratios,
    select_window,
    smoothed_eev_curve,
)


@pytest.fixture(scope="module")
def thermal_quench():
    return run_quench(QuenchSpec(2000, -1.0, -3.0, -0.5), band_width=0)


@pytest.fixture(scope="module")
def kink_quench():
    return run_quench(QuenchSpec(2000, -1.0, -3.0, 0.5), band_width=0)


@pytest.fixture(scope="module")
def kink_eigensystem():
    model = SpinorModel(2000, -1.0, 0.5)
    system = decompose(build_hamiltonian(model))
    eev = (system.vectors ** 2).T @ build_observable_n0(model)
    return system, eev


def test_single_member_window():
    energies = np.array([0.0, 1.0, 2.0, 5.0])
    eev = np.array([10.0, 20.0, 30.0, 40.0])
    window = make_window(energies, 2.1, 0.3, "symmetric")
    assert window.n_members == 1
    assert mc_prediction(window, eev) == 30.0


def test_window_width_cap():
    energies = np.linspace(0.0, 10.0, 50)
    with pytest.raises(ValueError):
        make_window(energies, 5.0, 3.0, "symmetric")
    with pytest.raises(ValueError):
        make_window(energies, 100.0, 0.5, "symmetric")  # empty


def test_constant_eev_prediction_independent_of_width():
    energies = np.linspace(0.0, 100.0, 400)
    eev = np.full(400, 7.5)
    for half in (0.5, 2.0, 9.0):
        w = make_window(energies, 50.0, half, "symmetric")
        assert mc_prediction(w, eev) == pytest.approx(7.5, abs=1e-12)
        if w.n_members >= 2:
            rep = eth_indicators(w, eev)
            assert rep.noise == rep.support == rep.max_divergence == 0.0
            assert rep.mean_eev_difference == 0.0


def test_select_window_thermal_case(thermal_quench):
    window = select_window(thermal_quench)
    mc = mc_prediction(window, thermal_quench.eev)
    assert abs(mc - thermal_quench.pde) <= 0.01 * abs(thermal_quench.pde)
    # three placements agree at the selected size
    for variant in ("below", "above"):
        alt = make_window(thermal_quench.energies, window.center,
                          window.half_width, variant)
        assert mc_prediction(alt, thermal_quench.eev) == pytest.approx(mc, rel=5e-3)


def test_select_window_fails_on_kink(kink_quench):
    with pytest.raises(NoValidWindow):
        select_window(kink_quench)


def test_select_window_large_system():
    result = run_quench(QuenchSpec(10000, -1.0, -3.0, -0.5), band_width=0)
    window = select_window(result)
    mc = mc_prediction(window, result.eev)
    assert abs(mc - result.pde) <= 2e-3 * abs(result.pde)


def test_eth_condition_regimes(thermal_quench, kink_quench, kink_eigensystem):
    window = select_window(thermal_quench)
    assert eth_condition(thermal_quench.energies, thermal_quench.eev, window) < 1e-2
    system, eev = kink_eigensystem
    kink = detect_kink(system, eev)
    kw = make_window(kink_quench.energies, kink_quench.energies[kink.index],
                     30.0, "symmetric")
    assert eth_condition(kink_quench.energies, kink_quench.eev, kw) > 0.5


def test_eth_condition_synthetic_limits():
    energies = np.linspace(-10.0, 10.0, 501)
    window = make_window(energies, 0.0, 1.0, "symmetric")
    linear = 5.0 + 0.3 * energies
    assert eth_condition(energies, linear, window) <= 1e-10
    constant = np.full_like(energies, 4.0)
    assert eth_condition(energies, constant, window) == 0.0
    # vanishing value with finite curvature flags the division hazard
    assert eth_condition(energies, energies ** 2, window) == np.inf


def test_indicator_bounds_on_random_windows():
    rng = np.random.default_rng(42)
    energies = np.sort(rng.normal(size=400)) * 50.0
    for _ in range(25):
        eev = rng.uniform(0.0, 100.0, size=400)
        center = rng.uniform(-30.0, 30.0)
        half = rng.uniform(0.5, 5.0)
        try:
            w = make_window(energies, center, half, "symmetric")
        except ValueError:
            continue
        if w.n_members < 2:
            continue
        rep = eth_indicators(w, eev)
        assert rep.noise >= 0.0 and rep.support >= 0.0
        assert rep.max_divergence <= rep.support + 1e-12
        assert rep.noise <= rep.support + 1e-12


def test_indicators_invariant_under_energy_shift(thermal_quench):
    window = select_window(thermal_quench)
    rep = eth_indicators(window, thermal_quench.eev)
    shifted = make_window(thermal_quench.energies + 100.0,
                          window.center + 100.0, window.half_width, "symmetric")
    rep2 = eth_indicators(shifted, thermal_quench.eev)
    assert rep2 == rep


def test_symmetric_prediction_bracketed_for_monotone_eev():
    energies = np.linspace(0.0, 100.0, 800)
    eev = 3.0 * energies + 1.0  # monotone
    center = 47.3
    preds = {v: mc_prediction(make_window(energies, center, 4.0, v), eev)
             for v in ("below", "symmetric", "above")}
    assert preds["below"] <= preds["symmetric"] <= preds["above"]


def test_participation_ratio_limits():
    basis = np.zeros(64)
    basis[3] = 1.0
    assert participation_ratio(basis) == pytest.approx(1.0, rel=1e-12)
    uniform = np.full(64, 1.0 / 8.0)
    assert participation_ratio(uniform) == pytest.approx(64.0, rel=1e-12)
    with pytest.raises(ValueError):
        participation_ratio(np.full(64, 0.2))


def test_participation_ratio_invariances():
    rng = np.random.default_rng(9)
    v = rng.normal(size=100)
    v /= np.linalg.norm(v)
    p = participation_ratio(v)
    assert participation_ratio(-v) == p
    perm = rng.permutation(100)
    assert participation_ratio(v[perm]) == pytest.approx(p, rel=1e-12)
    m = np.stack([v, -v], axis=1)
    assert np.allclose(participation_ratios(m), [p, p], rtol=1e-12)


def test_detect_kink_and_cross_checks(kink_eigensystem):
    system, eev = kink_eigensystem
    kink = detect_kink(system, eev)
    assert kink.agreement
    assert abs(kink.index - 559) <= 5
    assert kink.pr_dip_ratio < 0.2
    # the kink state is the extremum of the EEV curve
    assert eev[kink.index] == pytest.approx(eev.max(), rel=1e-6)


def test_no_kink_beyond_transition():
    for q in (4.5, 5.0, -5.0):
        model = SpinorModel(1000, -1.0, q)
        system = decompose(build_hamiltonian(model))
        eev = (system.vectors ** 2).T @ build_observable_n0(model)
        with pytest.raises(NoKink):
            detect_kink(system, eev)


def test_kink_drift_with_system_size():
    fracs = []
    for n in (1000, 2000, 4000):
        model = SpinorModel(n, -1.0, 0.5)
        system = decompose(build_hamiltonian(model))
        eev = (system.vectors ** 2).T @ build_observable_n0(model)
        kink = detect_kink(system, eev)
        fracs.append(kink.index / system.dim)
    steps = np.diff(fracs)
    assert np.all(steps > 0.0) or np.all(steps < 0.0)  # monotone drift
    assert np.abs(steps).max() <= 0.03                 # a few percent at most


def test_smoothed_curve_reproduces_quadratic():
    energies = np.linspace(0.0, 10.0, 300)
    eev = 2.0 + 0.5 * energies - 0.25 * energies ** 2
    values, second = smoothed_eev_curve(energies, eev, half_points=7)
    assert np.abs(values - eev).max() <= 1e-9
    assert np.abs(second + 0.5).max() <= 1e-9


def test_classify_reference_quenches():
    for q_i, q_f, expected in ((-3.0, -0.5, Region.I),
                               (-3.0, 0.5, Region.II),
                               (4.1, 2.0, Region.III)):
        spec = QuenchSpec(2000, -1.0, q_i, q_f)
        result = run_quench(spec, band_width=0)
        assert classify_region(spec, result) is expected


def test_classify_table_boundaries():
    # boundary boxes decide III/IV without any kink information
    spec = QuenchSpec(400, -1.0, 4.5, 2.0)
    assert classify_region(spec, run_quench(spec, band_width=0)) is Region.III
    spec = QuenchSpec(400, -1.0, -4.5, -2.0)
    assert classify_region(spec, run_quench(spec, band_width=0)) is Region.III
    spec = QuenchSpec(400, -1.0, 4.5, -2.0)
    assert classify_region(spec, run_quench(spec, band_width=0)) is Region.IV
    spec = QuenchSpec(400, -1.0, 5.0, 5.5)
    assert classify_region(spec, run_quench(spec, band_width=0)) is Region.IV
    # quenching to |q_f| > 4 from inside: kink-free spectrum, thermal
    spec = QuenchSpec(400, -1.0, -3.0, 5.0)
    assert classify_region(spec, run_quench(spec, band_width=0)) is Region.I


def test_classify_antiferromagnetic_ground():
    # AFM ground-state quenches keep a narrow occupation window: III or IV only
    spec = QuenchSpec(600, 1.0, -2.0, 0.5)
    assert classify_region(spec, run_quench(spec, band_width=0)) is Region.III
    spec = QuenchSpec(600, 1.0, -2.0, -0.5)
    assert classify_region(spec, run_quench(spec, band_width=0)) is Region.IV


def test_classify_most_excited_start():
    # FM most-excited starts are the exact mirrors of AFM ground starts
    spec = QuenchSpec(600, -1.0, 3.0, -2.0, "most_excited")
    assert classify_region(spec, run_quench(spec, band_width=0)) is Region.III
    spec = QuenchSpec(600, -1.0, 3.0, 2.5, "most_excited")
    assert classify_region(spec, run_quench(spec, band_width=0)) is Region.IV


def test_kink_overlap_weight_extremes(kink_quench, thermal_quench, kink_eigensystem):
    system, _ = kink_eigensystem
    kink = detect_kink(system, kink_quench.eev)
    assert kink_overlap_weight(kink_quench, kink.index) > 0.1
    # thermal case: same final-q sign structure but occupation far from kink
    model = SpinorModel(2000, -1.0, -0.5)
    sys2 = decompose(build_hamiltonian(model))
    kink2 = detect_kink(sys2, thermal_quench.eev)
    assert kink_overlap_weight(thermal_quench, kink2.index) < 1e-6
