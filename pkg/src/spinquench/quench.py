"""Sudden quenches: spectral expansion of the initial state and dynamics.

A quench prepares the extremal state of the Hamiltonian at q_initial and
evolves it under the Hamiltonian at q_final.  Everything observable is
derived from the expansion coefficients c_a = <psi_a(q_f)|psi_0(q_i)>:

    occupation (EON)      |c_a|^2
    expectation (EEV)     N0_aa = sum_k psi_a(k)^2 (N - 2k)
    diagonal ensemble     PDE = sum_a |c_a|^2 N0_aa
    mean energy           E_o = sum_a |c_a|^2 E_a
    effective dimension   d_e = 1 / sum_a |c_a|^4
    dynamics              <N0(t)> = sum_{a>=b} A_ab cos((E_a - E_b) t)

with A_ab = 2 c_a c_b N0_ab off the diagonal and c_a^2 N0_aa on it.  Since
the occupied window is much smaller than the sector dimension, the overlap
matrix is kept only on the retained index set and a narrow band |a-b| <=
band_width; both are configurable and the retained weight is recorded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import eigensolver
from .eigensolver import EigenSystem, extremal_state
from .errors import RetentionError
from .model import SpinorModel, TridiagonalOperator, build_hamiltonian, build_observable_n0

__all__ = ["QuenchSpec", "QuenchResult", "OverlapDistribution", "run_quench",
           "evolve_n0", "overlap_distribution", "long_time_average",
           "suggest_time_grid"]

DEFAULT_BAND_WIDTH = 5
DEFAULT_RETAIN_WEIGHT = 1.0 - 1e-8
_CHUNK = 1024


@dataclass(frozen=True)
class QuenchSpec:
    """Parameters of one sudden quench q_initial -> q_final."""

    n_atoms: int
    c1: float
    q_initial: float
    q_final: float
    initial_state_kind: str = "ground"

    def __post_init__(self):
        if self.initial_state_kind not in ("ground", "most_excited"):
            raise ValueError(
                f"initial_state_kind must be 'ground' or 'most_excited', "
                f"got {self.initial_state_kind!r}"
            )
        # validate both parameter sets through the model constructor
        self.initial_model()
        self.final_model()

    def initial_model(self) -> SpinorModel:
        return SpinorModel(self.n_atoms, self.c1, self.q_initial)

    def final_model(self) -> SpinorModel:
        return SpinorModel(self.n_atoms, self.c1, self.q_final)


@dataclass(frozen=True)
class QuenchResult:
    """Spectral data of one quench in the final eigenbasis.

    ``overlap_band[r, j]`` holds A(a, a+j) for a = retained[r]; entries
    whose partner a+j falls outside the spectrum are zero.  ``eon``,
    ``eev`` and ``energies`` cover the full spectrum.
    """

    spec: QuenchSpec
    energies: np.ndarray
    eon: np.ndarray
    eev: np.ndarray
    mean_energy: float
    pde: float
    effective_dimension: float
    retained: np.ndarray
    retained_weight: float
    band_width: int
    overlap_band: np.ndarray
    n0_t0: float
    h_norm: float

    @property
    def dim(self) -> int:
        return self.energies.size


@dataclass(frozen=True)
class OverlapDistribution:
    """First off-diagonal of the overlap matrix over the retained window."""

    indices: np.ndarray     # a with A(a, a+1) recorded
    amplitudes: np.ndarray  # signed A(a, a+1)
    weights: np.ndarray     # |A| normalized to unit sum (zeros if all vanish)


def _chunk_bounds(values: np.ndarray, chunk: int, cluster_tol: float):
    """Chunk edges that do not split clusters of close eigenvalues."""
    n = values.size
    bounds = [0]
    i = chunk
    while i < n:
        while i < n and values[i] - values[i - 1] <= cluster_tol:
            i += 1
        bounds.append(min(i, n))
        i += chunk
    if bounds[-1] != n:
        bounds.append(n)
    return bounds


def _project_initial_state(spec: QuenchSpec, psi0: np.ndarray,
                           op_f: TridiagonalOperator, n0: np.ndarray,
                           eigensystem: EigenSystem | None, chunk: int):
    """Energies, c_a and EEVs of the final Hamiltonian, chunked if needed."""
    if eigensystem is not None:
        vals = eigensystem.values
        coeff = eigensystem.vectors.T @ psi0
        eev = (eigensystem.vectors * eigensystem.vectors).T @ n0
        scale = eigensystem.scale
        return vals, coeff, eev, scale
    vals = eigensolver.eigenvalues(op_f)
    scale = op_f.norm_bound()
    d = vals.size
    coeff = np.empty(d)
    eev = np.empty(d)
    bounds = _chunk_bounds(vals, chunk, eigensolver.CLUSTER_TOL * scale)
    for i0, i1 in zip(bounds[:-1], bounds[1:]):
        vecs = eigensolver.eigenvectors_for(op_f, vals[i0:i1])
        coeff[i0:i1] = vecs.T @ psi0
        eev[i0:i1] = (vecs * vecs).T @ n0
    return vals, coeff, eev, scale


def run_quench(spec: QuenchSpec, band_width: int = DEFAULT_BAND_WIDTH,
               retain_weight: float = DEFAULT_RETAIN_WEIGHT,
               eigensystem: EigenSystem | None = None,
               chunk: int = _CHUNK) -> QuenchResult:
    """Expand the initial extremal state in the final eigenbasis.

    Pass a precomputed ``eigensystem`` of the final Hamiltonian to share one
    decomposition across many initial states (quench maps); otherwise the
    eigenvectors are processed in chunks and never stored whole.
    """
    model_f = spec.final_model()
    op_i = build_hamiltonian(spec.initial_model())
    op_f = build_hamiltonian(model_f)
    n0 = build_observable_n0(model_f)
    _, psi0 = extremal_state(op_i, spec.initial_state_kind)

    vals, coeff, eev, scale = _project_initial_state(
        spec, psi0, op_f, n0, eigensystem, chunk)
    eon = coeff * coeff
    mean_energy = float(eon @ vals)
    pde = float(eon @ eev)
    d_e = float(1.0 / np.sum(eon * eon))

    order = np.argsort(eon, kind="stable")[::-1]
    cum = np.cumsum(eon[order])
    n_keep = int(np.searchsorted(cum, retain_weight) + 1)
    n_keep = min(n_keep, eon.size)
    retained = np.sort(order[:n_keep])
    retained_weight = float(eon[retained].sum())

    band_width = int(min(band_width, vals.size - 1))
    band = _overlap_band(op_f, vals, coeff, eev, eon, n0, retained,
                         band_width, eigensystem, scale, chunk)

    n0_t0 = float(psi0 @ (n0 * psi0))
    return QuenchResult(
        spec=spec, energies=vals, eon=eon, eev=eev, mean_energy=mean_energy,
        pde=pde, effective_dimension=d_e, retained=retained,
        retained_weight=retained_weight, band_width=band_width,
        overlap_band=band, n0_t0=n0_t0, h_norm=scale,
    )


def _overlap_band(op_f, vals, coeff, eev, eon, n0, retained, band_width,
                  eigensystem, scale, chunk):
    d = vals.size
    if band_width == 0:
        band = np.empty((retained.size, 1))
        band[:, 0] = eon[retained] * eev[retained]
        return band
    needed = np.unique(np.concatenate(
        [np.clip(retained + j, 0, d - 1) for j in range(band_width + 1)]))
    if eigensystem is not None:
        w = eigensystem.vectors[:, needed]
    else:
        w = np.empty((d, needed.size))
        bounds = _chunk_bounds(vals[needed], chunk,
                               eigensolver.CLUSTER_TOL * scale)
        for i0, i1 in zip(bounds[:-1], bounds[1:]):
            w[:, i0:i1] = eigensolver.eigenvectors_for(op_f, vals[needed[i0:i1]])
    col_of = {int(a): i for i, a in enumerate(needed)}
    r_cols = np.array([col_of[int(a)] for a in retained])
    wn0 = w[:, r_cols] * n0[:, None]  # rows k, columns r

    band = np.zeros((retained.size, band_width + 1))
    band[:, 0] = eon[retained] * eev[retained]
    for j in range(1, band_width + 1):
        partner = retained + j
        ok = partner < d
        if not np.any(ok):
            continue
        p_cols = np.array([col_of[int(a)] for a in partner[ok]])
        n0_cross = np.einsum("kr,kr->r", wn0[:, ok], w[:, p_cols])
        band[ok, j] = 2.0 * coeff[retained[ok]] * coeff[partner[ok]] * n0_cross
    return band


def evolve_n0(result: QuenchResult, times, allow_truncated: bool = False) -> np.ndarray:
    """<N0(t)> on the given time grid from the retained banded overlap sum."""
    if not allow_truncated and result.retained_weight < DEFAULT_RETAIN_WEIGHT:
        raise RetentionError(
            f"retained occupation weight {result.retained_weight:.12f} is below "
            f"{DEFAULT_RETAIN_WEIGHT}; rerun the quench with a larger retain_weight "
            f"or pass allow_truncated=True"
        )
    times = np.asarray(times, dtype=np.float64)
    amps, gaps = _pair_arrays(result)
    out = np.empty(times.size)
    step = max(1, 8_000_000 // max(1, amps.size))
    for i0 in range(0, times.size, step):
        block = times[i0:i0 + step]
        out[i0:i0 + step] = amps @ np.cos(np.outer(gaps, block))
    return out


def _pair_arrays(result: QuenchResult):
    d = result.dim
    amps = [result.overlap_band[:, 0]]
    gaps = [np.zeros(result.retained.size)]
    for j in range(1, result.band_width + 1):
        partner = result.retained + j
        ok = partner < d
        amps.append(result.overlap_band[ok, j])
        gaps.append(result.energies[partner[ok]] - result.energies[result.retained[ok]])
    return np.concatenate(amps), np.concatenate(gaps)


def long_time_average(result: QuenchResult) -> float:
    """Infinite-time average of <N0(t)>: the diagonal ensemble value plus any
    band terms whose gap is numerically degenerate (they never dephase)."""
    amps, gaps = _pair_arrays(result)
    frozen = (np.abs(gaps) < eigensolver.DEGENERACY_TOL * result.h_norm)
    # the j = 0 terms are by definition part of the PDE already
    extra = float(amps[frozen].sum() - result.overlap_band[:, 0].sum())
    return result.pde + extra


def overlap_distribution(result: QuenchResult) -> OverlapDistribution:
    """A(a, a+1) over the retained window plus its normalized weight profile.

    Amplitudes at rounding level relative to the diagonal band (residual
    non-orthogonality, e.g. after an identity quench) are zeroed.
    """
    if result.band_width < 1:
        raise ValueError("quench was run with band_width < 1; no first off-diagonal")
    ok = result.retained + 1 < result.dim
    indices = result.retained[ok]
    amplitudes = result.overlap_band[ok, 1].copy()
    floor = 1e-12 * max(float(np.abs(result.overlap_band[:, 0]).max()), 1e-300)
    amplitudes[np.abs(amplitudes) <= floor] = 0.0
    total = np.abs(amplitudes).sum()
    if total > 0.0:
        weights = np.abs(amplitudes) / total
    else:
        weights = np.zeros_like(amplitudes)
    return OverlapDistribution(indices=indices, amplitudes=amplitudes, weights=weights)


def suggest_time_grid(result: QuenchResult, n_points: int = 1000,
                      kind: str = "log", t_min: float | None = None,
                      t_max: float | None = None) -> np.ndarray:
    """Heuristic time grid from the fastest band gap to a dephasing-revival scale."""
    _, gaps = _pair_arrays(result)
    gaps = np.abs(gaps[gaps != 0.0])
    if gaps.size == 0:
        return np.linspace(0.0 if t_min is None else t_min,
                           1.0 if t_max is None else t_max, n_points)
    fastest = gaps.max()
    spread = gaps.max() - gaps.min()
    if t_min is None:
        t_min = 0.1 * 2.0 * np.pi / fastest
    if t_max is None:
        t_max = 20.0 * 2.0 * np.pi / max(spread, fastest * 1e-6)
    if kind == "log":
        return np.geomspace(max(t_min, 1e-12), t_max, n_points)
    return np.linspace(t_min, t_max, n_points)
