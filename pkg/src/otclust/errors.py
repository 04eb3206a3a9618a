"""Exception types shared across the package."""


class InvalidMeasureError(ValueError):
    """A measure violates its invariants (zero/negative mass, shape mismatch)."""


class DegenerateConfigurationError(RuntimeError):
    """Solver hit an unrecoverable geometric degeneracy (e.g. a cell emptied
    and no step could restore it).

    Carries the last solver state in ``state`` so callers can inspect or
    dump partial results.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class DegenerateClusterError(RuntimeError):
    """A centroid update was asked for an empty cluster."""


class UnsupportedModeError(ValueError):
    """The requested operation is not available for this input kind
    (e.g. Newton mode on a discrete-only high-dimensional measure)."""


class UnsupportedRenderError(ValueError):
    """Rendering was requested for data that is not two-dimensional."""


class NonConvergenceError(RuntimeError):
    """Iteration budget exhausted before the stopping rule was met.

    Carries the last solver state in ``state`` so callers can inspect or
    dump partial results.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
