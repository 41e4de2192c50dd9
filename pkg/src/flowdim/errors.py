"""Exception types shared across the package."""


class FlowdimError(Exception):
    """Base class for all flowdim errors."""


class InvalidHorizonError(FlowdimError, ValueError):
    """Orbit-metric window length is zero or negative."""


class MetricInvariantError(FlowdimError, ValueError):
    """A distance table violates symmetry, positivity, or the triangle inequality."""


class UnsupportedDirectionError(FlowdimError, ValueError):
    """Backward suspension flow requested on a system without an inverse."""


class InvariantViolationError(FlowdimError, ValueError):
    """A structured point (solenoid, suspension) fails its consistency checks."""


class IncompatibleSignalError(FlowdimError, ValueError):
    """Two signals do not share a common grid."""


class WindowExhaustedError(FlowdimError, ValueError):
    """A time shift would consume more window than the signal has left."""


class BandError(FlowdimError, ValueError):
    """A signal's frequency band is outside what the operation supports."""


class TruncationDepthError(FlowdimError, ValueError):
    """A solenoid point is too shallow for the requested embedding."""


class QuadratureError(FlowdimError, RuntimeError):
    """Numerical integration failed to reach the requested tolerance."""

    def __init__(self, message, achieved_tol=None):
        super().__init__(message)
        self.achieved_tol = achieved_tol


class NotEmbeddingImageError(FlowdimError, ValueError):
    """A signal does not look like the image of a solenoid point."""


class PreconditionError(FlowdimError, ValueError):
    """A documented operation precondition fails on the given data."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SearchBudgetError(FlowdimError, RuntimeError):
    """Randomized search exhausted its retry budget."""

    def __init__(self, message, best_pair=None):
        super().__init__(message)
        self.best_pair = best_pair


class ConfigurationError(FlowdimError, ValueError):
    """An experiment or kernel configuration is inconsistent."""
