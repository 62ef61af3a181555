"""Quench dynamics and thermalization of a spin-1 condensate (single-mode approximation)."""

from .errors import (
    ConfigError,
    EigensolverError,
    FitError,
    ModelError,
    NoKink,
    NoValidWindow,
    RetentionError,
    SpinQuenchError,
    UndefinedTimescale,
)
from .model import (
    FockSector,
    SpinorModel,
    TridiagonalOperator,
    build_hamiltonian,
    build_observable_n0,
    lattice_parameters,
)
from .eigensolver import (
    EigenSystem,
    decompose,
    eigenvalues,
    eigenvalues_by_index,
    eigenvectors_for,
    extremal_state,
    index_range_for_energies,
)
from .quench import (
    OverlapDistribution,
    QuenchResult,
    QuenchSpec,
    evolve_n0,
    long_time_average,
    overlap_distribution,
    run_quench,
    suggest_time_grid,
)
from .thermalization import (
    EthReport,
    KinkInfo,
    McWindow,
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
from .timescales import (
    TimescaleReport,
    predict_timescales,
    scaling_of_timescales,
    to_physical_seconds,
)
from .scaling import ScalingFit, fit_power_law_with_offset, fit_pure_power_law

__version__ = "0.1.0"
