"""Exception types shared across the package."""


class SpinQuenchError(Exception):
    """Base class for all spinquench errors."""


class ModelError(SpinQuenchError):
    """Invalid model parameters (odd or non-positive atom number, c1 = 0, ...)."""


class EigensolverError(SpinQuenchError):
    """Eigensolver failed to converge or received a malformed operator."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class RetentionError(SpinQuenchError):
    """A quench result does not retain enough occupation weight for the request."""


class NoValidWindow(SpinQuenchError):
    """No microcanonical window size leaves the ensemble prediction stable."""


class NoKink(SpinQuenchError):
    """The spectrum has no interior localized region to anchor a kink index."""


class UndefinedTimescale(SpinQuenchError):
    """The overlap distribution does not support a single set of timescales.

    ``peaks`` carries per-peak diagnostics when the distribution is
    multi-peaked (one entry per detected peak).
    """

    def __init__(self, message, peaks=None):
        super().__init__(message)
        self.peaks = peaks if peaks is not None else []


class FitError(SpinQuenchError):
    """Scaling fit received degenerate or non-finite input."""


class ConfigError(SpinQuenchError):
    """Invalid run configuration."""
