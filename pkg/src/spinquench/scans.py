"""System-size scans: ETH indicators, participation ratios, effective dimension.

Fixed-energy-interval scans place a window of constant absolute width (in
units of |c1|) either at the spectrum's median energy or around the kink,
then track window statistics across a ladder of system sizes.  Indicator
scans use the intensive observable N0/N so different sizes are comparable;
the Hilbert-space dimension grows like N, so thermal windows show the
characteristic 1/N decay of all four indicators.

The kink drifts slowly through the spectrum as N grows, so offset fits
against a fixed absolute window probe a crossover rather than a clean
asymptote; ETH_OFFSET_LADDER is the size ladder calibrated for those fits.
"""

from __future__ import annotations

import numpy as np

from . import eigensolver
from .errors import NoKink
from .model import SpinorModel, TridiagonalOperator, build_hamiltonian, build_observable_n0
from .quench import QuenchSpec, run_quench
from .thermalization import EthReport, McWindow, eth_indicators

__all__ = ["DEFAULT_LADDER", "ETH_OFFSET_LADDER", "ETH_WINDOW_WIDTH",
           "KINK_WINDOW_WIDTH", "median_energy", "spacing_kink_energy",
           "fixed_interval_window", "eth_indicator_scan", "pr_extremal_scan",
           "pr_window_scan", "effective_dimension_scan", "ground_state_curve"]

DEFAULT_LADDER = (500, 1000, 2000, 4000, 8000, 16000)
# calibrated for the saturating-offset indicator fits (kink inside the window
# over the whole ladder); see the scan notes in the module docstring
ETH_OFFSET_LADDER = (1500, 3000, 6000, 12000, 24000, 48000)
ETH_WINDOW_WIDTH = 60.0   # |c1| units, mid-spectrum indicator window
KINK_WINDOW_WIDTH = 25.0  # |c1| units, low-PR window around the kink

INDICATOR_NAMES = ("noise", "support", "max_divergence", "mean_eev_difference")


def median_energy(op: TridiagonalOperator) -> float:
    """Median eigenvalue (the middle of the spectrum by state count)."""
    j = (op.dim - 1) // 2
    return float(eigensolver.eigenvalues_by_index(op, j, j)[0])


def spacing_kink_energy(op: TridiagonalOperator, edge_margin_frac: float = 0.02) -> float:
    """Kink energy located through the interior level-spacing minimum.

    Cheaper than the participation-ratio locator (eigenvalues only), which
    matters for size ladders; the two agree where the kink exists.
    """
    vals = eigensolver.eigenvalues(op)
    d = vals.size
    margin = max(1, int(round(edge_margin_frac * d)))
    if d < 2 * margin + 3:
        raise NoKink(f"dimension {d} too small for interior search")
    gaps = np.diff(vals)
    interior = np.arange(margin, d - 1 - margin)
    j = int(interior[np.argmin(gaps[interior])])
    return float(vals[j])


def fixed_interval_window(op: TridiagonalOperator, center: float, width: float):
    """Eigenvalues and eigenvectors inside [center - width/2, center + width/2]."""
    rng = eigensolver.index_range_for_energies(op, center - 0.5 * width,
                                               center + 0.5 * width)
    if rng is None:
        raise ValueError(f"no eigenstates in a width-{width} window at {center}")
    j0, j1 = rng
    vals = eigensolver.eigenvalues_by_index(op, j0, j1)
    vecs = eigensolver.eigenvectors_for(op, vals)
    return j0, vals, vecs


def eth_indicator_scan(c1: float, q_final: float, sizes=DEFAULT_LADDER,
                       width: float = ETH_WINDOW_WIDTH, center: str = "median"):
    """The four window indicators of N0/N across system sizes.

    Returns (sizes, table, reports) where table maps indicator name to an
    array over sizes.  ``center`` is "median" or "kink".
    """
    sizes = [int(n) for n in sizes]
    reports: list[EthReport] = []
    for n in sizes:
        model = SpinorModel(n, c1, q_final)
        op = build_hamiltonian(model)
        c = median_energy(op) if center == "median" else spacing_kink_energy(op)
        j0, vals, vecs = fixed_interval_window(op, c, width)
        eev = (vecs * vecs).T @ build_observable_n0(model) / n
        window = McWindow(center=c, half_width=0.5 * width, variant="symmetric",
                          member_indices=np.arange(vals.size))
        reports.append(eth_indicators(window, eev))
    table = {
        "noise": np.array([r.noise for r in reports]),
        "support": np.array([r.support for r in reports]),
        "max_divergence": np.array([r.max_divergence for r in reports]),
        "mean_eev_difference": np.array([r.mean_eev_difference for r in reports]),
    }
    return sizes, table, reports


def pr_extremal_scan(c1: float, q: float, sizes=DEFAULT_LADDER,
                     which: str = "ground") -> np.ndarray:
    """Participation ratio of the ground or most-excited state across sizes."""
    out = []
    for n in sizes:
        op = build_hamiltonian(SpinorModel(int(n), c1, q))
        _, vec = eigensolver.extremal_state(op, which)
        out.append(1.0 / float(np.sum(vec ** 4)))
    return np.array(out)


def pr_window_scan(c1: float, q: float, sizes=DEFAULT_LADDER,
                   width: float = ETH_WINDOW_WIDTH,
                   center: str = "median") -> np.ndarray:
    """Mean participation ratio over a fixed energy interval, across sizes."""
    out = []
    for n in sizes:
        op = build_hamiltonian(SpinorModel(int(n), c1, q))
        c = median_energy(op) if center == "median" else spacing_kink_energy(op)
        _, _, vecs = fixed_interval_window(op, c, width)
        out.append(float(np.mean(1.0 / np.sum(vecs ** 4, axis=0))))
    return np.array(out)


def effective_dimension_scan(c1: float, q_initial: float, q_final: float,
                             sizes=DEFAULT_LADDER,
                             initial_state_kind: str = "ground") -> np.ndarray:
    """Effective dimension d_e of one quench family across sizes."""
    out = []
    for n in sizes:
        spec = QuenchSpec(int(n), c1, q_initial, q_final, initial_state_kind)
        out.append(run_quench(spec, band_width=0).effective_dimension)
    return np.array(out)


def ground_state_curve(c1: float, n_atoms: int, q_values) -> np.ndarray:
    """<N0>/N of the ground state over a grid of Zeeman strengths."""
    out = []
    for q in q_values:
        model = SpinorModel(n_atoms, c1, float(q))
        op = build_hamiltonian(model)
        _, vec = eigensolver.extremal_state(op, "ground")
        n0 = build_observable_n0(model)
        out.append(float(vec @ (n0 * vec)) / n_atoms)
    return np.array(out)
