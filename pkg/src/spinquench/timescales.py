"""Collapse, revival, oscillation, and randomizing times from spectral data.

The dynamics after a quench is a sum of cosines whose weights are the
first off-diagonal overlaps A(a, a+1) ("overlap distribution") and whose
frequencies are the level spacings Delta_a = E_{a+1} - E_a.  With m the
distribution's peak index and s its weighted standard deviation in index
units:

    t_osc      = 2 pi / Delta_m                      dominant period
    t_collapse = 2 pi / |Delta_{m+s} - Delta_{m-s}|  dephasing of the spread
    t_revival  = 2 pi / |Delta_m - Delta_{m'}|       rephasing of neighbours
    t_randomize= 2 pi / |D'_{m+s}  - D'_{m-s}|       drift of the gap slope

where m' is the gap index adjacent to m on the side of the distribution
mean and D'_a = Delta_a - Delta_{a'} is the gap difference read in the
same direction.  All times are in units of 1/|c1|; divide by |c1| (as an
angular frequency) for seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedTimescale
from .quench import QuenchResult, QuenchSpec, overlap_distribution, run_quench
from .scaling import fit_pure_power_law

__all__ = ["TimescaleReport", "predict_timescales", "scaling_of_timescales",
           "to_physical_seconds"]


@dataclass(frozen=True)
class TimescaleReport:
    """Predicted timescales of one quench (units of 1/|c1|)."""

    t_collapse: float
    t_revival: float
    t_oscillation: float
    t_randomize: float
    m_index: int
    sigma_index_offset: int


def _peak_indices(weights: np.ndarray, significance: float, peak_rel: float):
    """Positions of significant local maxima of the weight profile."""
    w_max = weights.max()
    peaks = []
    for i in range(weights.size):
        if weights[i] < peak_rel * w_max:
            continue
        left = weights[i - 1] if i > 0 else -1.0
        right = weights[i + 1] if i + 1 < weights.size else -1.0
        if weights[i] >= left and weights[i] >= right:
            peaks.append(i)
    # a flat-topped peak yields adjacent indices; merge runs
    merged = []
    for p in peaks:
        if merged and p == merged[-1][-1] + 1:
            merged[-1].append(p)
        else:
            merged.append([p])
    return [run[len(run) // 2] for run in merged]


def predict_timescales(result: QuenchResult, sigma_multiplier: float = 1.0,
                       significance: float = 1e-3,
                       peak_rel: float = 0.5) -> TimescaleReport:
    """Timescales from the overlap distribution and the level spacings.

    Raises UndefinedTimescale when fewer than 3 distribution points carry
    weight above ``significance`` of the maximum (nothing dephases: e.g. an
    identity quench) or when several comparable peaks coexist (multi-peak
    distributions attempt revivals at conflicting times); the exception then
    carries per-peak diagnostics.
    """
    dist = overlap_distribution(result)
    total = np.abs(dist.amplitudes).sum()
    if total == 0.0:
        raise UndefinedTimescale("overlap distribution carries no weight")
    weights, indices = dist.weights, dist.indices
    significant = weights >= significance * weights.max()
    if int(significant.sum()) < 3:
        raise UndefinedTimescale(
            f"only {int(significant.sum())} significant overlap points"
        )

    gaps = np.diff(result.energies)

    peaks = _peak_indices(weights, significance, peak_rel)
    if len(peaks) > 1:
        diagnostics = []
        for p in peaks:
            a = int(indices[p])
            entry = {"index": a, "weight": float(weights[p])}
            if 1 <= a <= gaps.size - 2:
                entry["t_oscillation"] = float(2.0 * np.pi / abs(gaps[a]))
                entry["t_revival"] = float(2.0 * np.pi / abs(gaps[a] - gaps[a - 1]))
            diagnostics.append(entry)
        raise UndefinedTimescale(
            f"{len(peaks)} comparable peaks in the overlap distribution",
            peaks=diagnostics,
        )

    m_pos = int(np.argmax(weights))
    m = int(indices[m_pos])
    mean_index = float(np.sum(weights * indices))
    sigma = float(np.sqrt(np.sum(weights * (indices - mean_index) ** 2)))
    s = max(1, int(round(sigma_multiplier * sigma)))

    # the neighbour gap sits on the side of the distribution mean, and the
    # gap-difference sequence is oriented the same way; this keeps every
    # prediction covariant under spectrum reversal (the c1, q -> -c1, -q map)
    toward_mean = -1 if mean_index <= m else +1
    hi, lo = m + s, m - s
    neighbour = m + toward_mean
    if lo < 0 or hi > gaps.size - 1 or not (0 <= neighbour <= gaps.size - 1):
        raise UndefinedTimescale(
            f"peak {m} with spread {s} leaves the spectrum (D = {result.dim})"
        )

    def inv(x):
        return float(2.0 * np.pi / abs(x)) if x != 0.0 else np.inf

    def dgap(a):
        # g_a - g_(a+1) read toward the distribution mean
        b = a + toward_mean
        return gaps[a] - gaps[b]

    t_c = inv(gaps[hi] - gaps[lo])
    t_r = inv(gaps[m] - gaps[neighbour])
    t_osc = inv(gaps[m])
    if 0 <= lo + toward_mean and hi + toward_mean <= gaps.size - 1:
        t_rz = inv(dgap(hi) - dgap(lo))
    else:
        t_rz = np.inf
    return TimescaleReport(t_collapse=t_c, t_revival=t_r, t_oscillation=t_osc,
                           t_randomize=t_rz, m_index=m, sigma_index_offset=s)


def scaling_of_timescales(c1: float, q_initial: float, q_final: float,
                          sizes, initial_state_kind: str = "ground",
                          sigma_multiplier: float = 1.0):
    """Collapse/revival times across system sizes plus their power-law fits.

    Returns (sizes, reports, fit_collapse, fit_revival); the fits are pure
    power laws t ~ N^gamma.  Needs at least 5 sizes.
    """
    sizes = [int(n) for n in sizes]
    if len(sizes) < 5:
        raise ValueError(f"need at least 5 system sizes, got {len(sizes)}")
    reports = []
    for n in sizes:
        spec = QuenchSpec(n, c1, q_initial, q_final, initial_state_kind)
        result = run_quench(spec, band_width=1)
        reports.append(predict_timescales(result, sigma_multiplier))
    t_c = np.array([r.t_collapse for r in reports])
    t_r = np.array([r.t_revival for r in reports])
    fit_c = fit_pure_power_law(sizes, t_c)
    fit_r = fit_pure_power_law(sizes, t_r)
    return sizes, reports, fit_c, fit_r


def to_physical_seconds(report: TimescaleReport, c1_hz: float) -> dict:
    """Times in seconds for an interaction strength given in angular Hz.

    ``c1_hz`` is the dimensionful c1 as an angular frequency (for instance
    -2 pi * 9 Hz for a condensate at density 5e14 cm^-3); dimensionless
    times divide by its magnitude.
    """
    if c1_hz == 0.0 or not np.isfinite(c1_hz):
        raise ValueError("c1_hz must be finite and nonzero")
    w = abs(c1_hz)
    return {
        "t_collapse_s": report.t_collapse / w,
        "t_revival_s": report.t_revival / w,
        "t_oscillation_s": report.t_oscillation / w,
        "t_randomize_s": report.t_randomize / w,
    }
