"""Microcanonical comparison, thermalization indicators, and quench classification.

The microcanonical prediction is the unweighted EEV average over a narrow
energy window around the quench mean energy E_o.  Window sizes are chosen
by a sensitivity sweep: the prediction must not move (relatively, beyond a
tolerance) under changes of the window size or of the window placement
(below / symmetric / above E_o); if no such plateau exists the ensemble is
undefined there, which happens exactly when the occupied window touches
the nonthermal kink states.

Four indicators quantify how sharply the EEVs cluster inside a window:
RMS fluctuation around the window mean, the support (max - min), the
maximum divergence from the window mean, and the mean adjacent-EEV
difference.  Localization is measured by the participation ratio
P = 1 / sum_n psi(n)^4 in the Fock basis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .eigensolver import EigenSystem, decompose
from .errors import NoKink, NoValidWindow
from .model import build_hamiltonian
from .quench import QuenchResult, QuenchSpec

__all__ = ["McWindow", "EthReport", "KinkInfo", "Region", "make_window",
           "select_window", "mc_prediction", "eth_condition", "eth_indicators",
           "participation_ratio", "participation_ratios", "smoothed_eev_curve",
           "detect_kink", "kink_overlap_weight", "classify_region"]

MAX_SPAN_FRACTION = 0.1
VARIANTS = ("below", "symmetric", "above")


@dataclass(frozen=True)
class McWindow:
    """One microcanonical energy window and its member eigenstates."""

    center: float
    half_width: float
    variant: str
    member_indices: np.ndarray

    @property
    def n_members(self) -> int:
        return self.member_indices.size


@dataclass(frozen=True)
class EthReport:
    """Window statistics of the EEVs (in whatever units the EEVs were given)."""

    mc_prediction: float
    noise: float
    support: float
    max_divergence: float
    mean_eev_difference: float
    n_members: int


def _window_bounds(center: float, half_width: float, variant: str):
    if variant == "below":
        return center - half_width, center
    if variant == "above":
        return center, center + half_width
    if variant == "symmetric":
        return center - half_width, center + half_width
    raise ValueError(f"unknown window variant {variant!r}")


def make_window(energies: np.ndarray, center: float, half_width: float,
                variant: str = "symmetric",
                max_span_fraction: float = MAX_SPAN_FRACTION) -> McWindow:
    """Window of eigenstates with energy in the variant's interval around center."""
    energies = np.asarray(energies)
    span = float(energies[-1] - energies[0])
    if half_width <= 0.0:
        raise ValueError("half_width must be positive")
    if span > 0.0 and half_width > max_span_fraction * span:
        raise ValueError(
            f"half_width {half_width:g} exceeds {max_span_fraction} of the "
            f"spectral span {span:g}; not a narrow window"
        )
    lo, hi = _window_bounds(center, half_width, variant)
    members = np.nonzero((energies >= lo) & (energies <= hi))[0]
    if members.size == 0:
        raise ValueError("window contains no eigenstates")
    return McWindow(center=center, half_width=half_width, variant=variant,
                    member_indices=members)


def mc_prediction(window: McWindow, eev: np.ndarray) -> float:
    """Unweighted EEV average over the window members."""
    if window.n_members == 0:
        raise ValueError("empty microcanonical window")
    return float(np.mean(np.asarray(eev)[window.member_indices]))


def select_window(result: QuenchResult, variant: str = "symmetric",
                  sensitivity_tol: float = 1e-3, n_steps: int = 40,
                  min_fraction: float = 1e-4,
                  max_fraction: float = MAX_SPAN_FRACTION,
                  min_members: int = 2,
                  min_stable_points: int = 3) -> McWindow:
    """Largest window size whose prediction is insensitive to size and placement.

    Sweeps half-widths geometrically between ``min_fraction`` and
    ``max_fraction`` of the spectral span.  A sweep point is stable when all
    three placements hold at least ``min_members`` states, agree with each
    other to ``sensitivity_tol`` relative, and none of the predictions moved
    by more than ``sensitivity_tol`` since the previous populated point.
    Raises NoValidWindow when no stable plateau of at least
    ``min_stable_points`` populated points exists.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown window variant {variant!r}")
    energies, eev = result.energies, result.eev
    center = result.mean_energy
    span = float(energies[-1] - energies[0])
    if span <= 0.0:
        raise NoValidWindow("spectrum has zero span")
    deltas = np.geomspace(min_fraction, max_fraction, n_steps) * span
    eev_scale = max(float(np.max(np.abs(eev))), 1e-300)

    last_preds = None
    n_stable = 0
    best_delta = None
    for delta in deltas:
        preds = []
        populated = True
        for var in VARIANTS:
            lo, hi = _window_bounds(center, delta, var)
            members = (energies >= lo) & (energies <= hi)
            if int(members.sum()) < min_members:
                populated = False
                break
            preds.append(float(eev[members].mean()))
        if not populated:
            continue
        ref = max(abs(preds[1]), 1e-9 * eev_scale)
        spread_ok = (max(preds) - min(preds)) <= sensitivity_tol * ref
        drift_ok = last_preds is None or all(
            abs(p - q) <= sensitivity_tol * ref for p, q in zip(preds, last_preds))
        if spread_ok and drift_ok:
            n_stable += 1
            best_delta = delta
            last_preds = preds
        else:
            break
    if best_delta is None or n_stable < min_stable_points:
        raise NoValidWindow(
            f"microcanonical prediction never stabilizes at tolerance "
            f"{sensitivity_tol} (stable points: {n_stable})"
        )
    return make_window(energies, center, float(best_delta), variant,
                       max_span_fraction=max_fraction)


def eth_indicators(window: McWindow, eev: np.ndarray) -> EthReport:
    """The four window indicators; ``eev`` is indexed by eigenstate."""
    if window.n_members < 2:
        raise ValueError("need at least 2 window members for indicators")
    vals = np.asarray(eev, dtype=np.float64)[window.member_indices]
    mc = float(vals.mean())
    dev = vals - mc
    return EthReport(
        mc_prediction=mc,
        noise=float(np.sqrt(np.mean(dev * dev))),
        support=float(vals.max() - vals.min()),
        max_divergence=float(np.abs(dev).max()),
        mean_eev_difference=float(np.mean(np.abs(np.diff(vals)))),
        n_members=int(vals.size),
    )


def smoothed_eev_curve(energies: np.ndarray, eev: np.ndarray,
                       half_points: int | None = None):
    """Local-quadratic least-squares smoothing of the EEV-vs-energy cloud.

    Returns (values, second_derivatives) evaluated at every eigenstate; the
    fit window is 2*half_points + 1 states (default half_points =
    ceil(D/200)).
    """
    energies = np.asarray(energies, dtype=np.float64)
    eev = np.asarray(eev, dtype=np.float64)
    d = energies.size
    if half_points is None:
        half_points = int(np.ceil(d / 200))
    h = max(1, int(half_points))
    values = np.empty(d)
    second = np.empty(d)
    for i in range(d):
        lo, hi = max(0, i - h), min(d, i + h + 1)
        x = energies[lo:hi] - energies[i]
        y = eev[lo:hi]
        a = np.stack([np.ones_like(x), x, x * x], axis=1)
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        values[i] = coef[0]
        second[i] = 2.0 * coef[2]
    return values, second


def eth_condition(energies: np.ndarray, eev: np.ndarray, window: McWindow,
                  half_points: int | None = None) -> float:
    """Window-size validity measure (delta E)^2 |<N0>''(E_o) / <N0>(E_o)|.

    Values much below 1 mean the window sits on a locally linear stretch of
    the EEV curve.  Returns +inf when the smoothed curve vanishes at E_o
    while its curvature does not (division hazard).
    """
    energies = np.asarray(energies, dtype=np.float64)
    eev = np.asarray(eev, dtype=np.float64)
    d = energies.size
    if half_points is None:
        half_points = int(np.ceil(d / 200))
    h = max(1, int(half_points))
    i0 = int(np.argmin(np.abs(energies - window.center)))
    lo, hi = max(0, i0 - h), min(d, i0 + h + 1)
    x = energies[lo:hi] - window.center
    w_x = max(float(np.max(np.abs(x))), 1e-300)
    xs = x / w_x  # scaled abscissa keeps the fit well conditioned
    y = eev[lo:hi]
    a = np.stack([np.ones_like(xs), xs, xs * xs], axis=1)
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    value, curv_scaled = coef[0], 2.0 * coef[2]
    scale = max(float(np.max(np.abs(eev))), 1e-300)
    if abs(curv_scaled) < 1e-11 * scale:
        return 0.0
    if abs(value) < 1e-11 * scale:
        return np.inf
    return float((window.half_width / w_x) ** 2 * abs(curv_scaled / value))


def participation_ratio(vector: np.ndarray, norm_tol: float = 1e-8) -> float:
    """P = 1 / sum_n |psi_n|^4 for a unit vector; 1 = localized, D = uniform."""
    v = np.asarray(vector, dtype=np.float64)
    norm = float(v @ v)
    if abs(norm - 1.0) > norm_tol:
        raise ValueError(f"vector norm^2 = {norm:.12f} is not 1 within {norm_tol}")
    return float(1.0 / np.sum(v ** 4))


def participation_ratios(vectors: np.ndarray) -> np.ndarray:
    """Participation ratio of every column of a (D, m) eigenvector matrix."""
    return 1.0 / np.sum(np.asarray(vectors) ** 4, axis=0)


@dataclass(frozen=True)
class KinkInfo:
    """Location of the nonthermal kink region, with locator cross-checks.

    ``index`` is the participation-ratio dip; the curvature and
    level-spacing locators are recorded alongside and ``agreement`` says
    whether all three fall within ``agree_frac`` of the dimension.
    """

    index: int
    pr_index: int
    curvature_index: int
    spacing_index: int
    pr_dip_ratio: float
    agreement: bool


def detect_kink(eigensystem: EigenSystem, eev: np.ndarray,
                edge_margin_frac: float = 0.02,
                dip_ratio_max: float = 0.5,
                rise_factor: float = 2.0,
                agree_frac: float = 0.05) -> KinkInfo:
    """Interior localized (kink) eigenstate of one spectrum.

    The primary locator is the interior minimum of the participation ratio;
    it is cross-checked against the extremum of the smoothed EEV curvature
    and the interior minimum of the level spacing.  Raises NoKink when the
    PR minimum is not a genuine interior dip -- it must sit inside the
    interior band, be well below the interior median, and have the PR rise
    back above it on both sides.  All three conditions fail for |q| > 4,
    where the profile only falls off toward the spectrum edges.
    """
    d = eigensystem.dim
    margin = max(1, int(round(edge_margin_frac * d)))
    if d < 2 * margin + 3:
        raise NoKink(f"dimension {d} too small for interior search")
    interior = np.arange(margin, d - margin)

    pr = participation_ratios(eigensystem.vectors)
    pr_index = int(interior[np.argmin(pr[interior])])
    if pr_index <= margin or pr_index >= d - margin - 1:
        raise NoKink("participation-ratio minimum sits at the interior boundary")
    dip_ratio = float(pr[pr_index] / np.median(pr[interior]))
    if dip_ratio > dip_ratio_max:
        raise NoKink(
            f"participation-ratio dip ratio {dip_ratio:.3f} exceeds "
            f"{dip_ratio_max}; no localized interior region"
        )
    left = pr[margin:pr_index]
    right = pr[pr_index + 1:d - margin]
    floor = rise_factor * pr[pr_index]
    if left.size == 0 or right.size == 0 or left.max() < floor or right.max() < floor:
        raise NoKink("participation ratio does not rise on both sides; "
                     "edge falloff, not an interior dip")

    _, curvature = smoothed_eev_curve(eigensystem.values, eev)
    curvature_index = int(interior[np.argmax(np.abs(curvature[interior]))])

    gaps = np.diff(eigensystem.values)
    gap_interior = np.arange(margin, d - 1 - margin)
    spacing_index = int(gap_interior[np.argmin(gaps[gap_interior])])

    tol = max(1, int(round(agree_frac * d)))
    agreement = (abs(pr_index - curvature_index) <= tol
                 and abs(pr_index - spacing_index) <= tol)
    return KinkInfo(index=pr_index, pr_index=pr_index,
                    curvature_index=curvature_index,
                    spacing_index=spacing_index,
                    pr_dip_ratio=dip_ratio, agreement=agreement)


def kink_overlap_weight(result: QuenchResult, kink_index: int,
                        neighborhood_frac: float = 0.02) -> float:
    """Occupation weight within +-neighborhood_frac * D of the kink index."""
    d = result.dim
    half = max(1, int(round(neighborhood_frac * d)))
    lo = max(0, kink_index - half)
    hi = min(d, kink_index + half + 1)
    return float(result.eon[lo:hi].sum())


class Region(enum.Enum):
    """Quench-map region labels (dynamical behaviour classes)."""

    I = "I"      # thermal: collapse, equilibration at the MC value, revivals
    II = "II"    # nonthermal equilibration: collapse, no collective revival
    III = "III"  # few-mode oscillation, no equilibration
    IV = "IV"    # initial state already in equilibrium

    def __str__(self):
        return self.value


def classify_region(spec: QuenchSpec, result: QuenchResult,
                    kink_index: int | str | None = "auto",
                    eigensystem: EigenSystem | None = None,
                    overlap_threshold: float = 1e-2,
                    neighborhood_frac: float = 0.02,
                    dominance_threshold: float = 0.5) -> Region:
    """Region label of one quench.

    The spectrum of (c1, q) is the exact negation of (-c1, -q), so every
    quench is first mapped onto the ferromagnetic (c1 < 0) problem, flipping
    the initial-state kind along with the signs.  Ground-state quenches then
    follow the map-region boundaries, with the I/II distinction decided by
    the occupation weight near the kink.  Quenches starting from the
    canonical most-excited state (this covers anti-ferromagnetic
    ground-state maps) always keep a narrow occupation window: they are
    labeled IV when a single eigenstate dominates and III otherwise.

    ``kink_index`` may be a precomputed index, None (treat as no overlap),
    or "auto" to detect it here; pass ``eigensystem`` to reuse an existing
    decomposition of the final Hamiltonian.
    """
    q_i, q_f = spec.q_initial, spec.q_final
    kind = spec.initial_state_kind
    if spec.c1 > 0:
        q_i, q_f = -q_i, -q_f
        kind = "most_excited" if kind == "ground" else "ground"

    if kind != "ground":
        if float(result.eon.max()) >= dominance_threshold:
            return Region.IV
        return Region.III

    if (q_i > 4.0 and 0.0 < q_f < 4.0) or (q_i < -4.0 and -4.0 < q_f < 0.0):
        return Region.III
    if abs(q_i) >= 4.0:
        return Region.IV

    if kink_index == "auto":
        if abs(q_f) >= 4.0:
            return Region.I  # the kink region exists only for |q| < 4
        try:
            es_f = eigensystem
            if es_f is None:
                es_f = decompose(build_hamiltonian(spec.final_model()))
            kink_index = detect_kink(es_f, result.eev).index
        except NoKink:
            return Region.I
    if kink_index is None:
        return Region.I
    weight = kink_overlap_weight(result, int(kink_index), neighborhood_frac)
    return Region.II if weight >= overlap_threshold else Region.I
