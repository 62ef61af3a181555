"""Finite-size scaling fits.

Two fit forms cover every scan in the package:

  * offset power law   chi(N) = a + b * N**(-gamma)  -- gamma is the decay
    power; a is the surviving value in the thermodynamic limit.  Solved by
    a gamma grid scan with closed-form linear least squares for (a, b) at
    each gamma, refined by a golden-section search.  Statistics (R^2, RMSE,
    SSE) are computed on the data.
  * pure power law     chi(N) = b * N**gamma         -- gamma is the growth
    power (signed).  Solved by linear regression in log-log coordinates;
    statistics are computed on log chi, which is what the regression
    minimizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError

__all__ = ["ScalingFit", "fit_power_law_with_offset", "fit_pure_power_law",
           "GAMMA_BRACKET", "GAMMA_GRID_STEP"]

GAMMA_BRACKET = (-0.2, 2.0)
GAMMA_GRID_STEP = 1e-3
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScalingFit:
    """Fitted parameters and fit quality of one scaling law."""

    offset_a: float
    amplitude_b: float
    exponent_gamma: float
    r_squared: float
    rmse: float
    sse: float


def _validate(n_values, chi_values, min_points):
    n = np.asarray(n_values, dtype=np.float64)
    chi = np.asarray(chi_values, dtype=np.float64)
    if n.ndim != 1 or n.shape != chi.shape:
        raise FitError(f"need matching 1-d arrays, got {n.shape} and {chi.shape}")
    if n.size < min_points:
        raise FitError(f"need at least {min_points} points, got {n.size}")
    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(chi))):
        raise FitError("non-finite input")
    if np.any(n <= 0.0):
        raise FitError("system sizes must be positive")
    if np.unique(n).size != n.size:
        raise FitError("system sizes must be distinct")
    return n, chi


def _offset_sse(n, chi, gamma):
    x = n ** (-gamma)
    design = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(design, chi, rcond=None)
    resid = chi - design @ coef
    return float(resid @ resid), coef


def fit_power_law_with_offset(n_values, chi_values,
                              gamma_bracket=GAMMA_BRACKET,
                              grid_step=GAMMA_GRID_STEP) -> ScalingFit:
    """Least-squares fit of chi(N) = a + b * N**(-gamma).

    gamma is scanned over ``gamma_bracket`` on a ``grid_step`` grid (with
    (a, b) solved exactly at each point) and the best grid cell is refined
    by golden-section search.  The bracket's small negative tail lets
    near-constant data fit cleanly.
    """
    n, chi = _validate(n_values, chi_values, min_points=4)
    g_lo, g_hi = float(gamma_bracket[0]), float(gamma_bracket[1])
    if not g_lo < g_hi:
        raise FitError(f"invalid gamma bracket {gamma_bracket}")

    grid = np.arange(g_lo, g_hi + 0.5 * grid_step, grid_step)
    sses = np.array([_offset_sse(n, chi, g)[0] for g in grid])
    best = int(np.argmin(sses))

    lo = max(g_lo, grid[best] - grid_step)
    hi = min(g_hi, grid[best] + grid_step)
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = _offset_sse(n, chi, c)[0]
    fd = _offset_sse(n, chi, d)[0]
    for _ in range(60):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = _offset_sse(n, chi, c)[0]
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = _offset_sse(n, chi, d)[0]
    gamma = 0.5 * (a + b)
    sse, coef = _offset_sse(n, chi, gamma)
    sst = float(np.sum((chi - chi.mean()) ** 2))
    r2 = 1.0 - sse / sst if sst > 0.0 else 1.0
    return ScalingFit(offset_a=float(coef[0]), amplitude_b=float(coef[1]),
                      exponent_gamma=float(gamma), r_squared=float(r2),
                      rmse=float(np.sqrt(sse / n.size)), sse=float(sse))


def fit_pure_power_law(n_values, chi_values) -> ScalingFit:
    """Log-log linear regression chi(N) = b * N**gamma (offset fixed to 0).

    The reported gamma is the signed growth power (positive for quantities
    growing with N); R^2, RMSE and SSE refer to log chi.
    """
    n, chi = _validate(n_values, chi_values, min_points=2)
    if np.any(chi <= 0.0):
        raise FitError("pure power-law fit needs positive chi values")
    ln = np.log(n)
    lchi = np.log(chi)
    design = np.stack([np.ones_like(ln), ln], axis=1)
    coef, *_ = np.linalg.lstsq(design, lchi, rcond=None)
    resid = lchi - design @ coef
    sse = float(resid @ resid)
    sst = float(np.sum((lchi - lchi.mean()) ** 2))
    r2 = 1.0 - sse / sst if sst > 0.0 else 1.0
    return ScalingFit(offset_a=0.0, amplitude_b=float(np.exp(coef[0])),
                      exponent_gamma=float(coef[1]), r_squared=float(r2),
                      rmse=float(np.sqrt(sse / n.size)), sse=float(sse))
