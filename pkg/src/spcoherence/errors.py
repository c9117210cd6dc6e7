"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain of the operation."""


class ResolutionError(ValueError):
    """A sampling grid is too coarse for the requested computation."""


class AliasingError(ValueError):
    """Spectral content too close to the Nyquist band edge."""


class MetricUndefinedError(ValueError):
    """A divergence metric cannot be evaluated on the given spectrum.

    ``rms`` carries the RMS width, which is always defined.
    """

    def __init__(self, message, rms=None):
        super().__init__(message)
        self.rms = rms


class EmptySliceError(ValueError):
    """A conditional distribution has zero total probability."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical run."""


class StabilityError(NumericalError):
    """Non-finite field values appeared during time stepping."""


class IncompleteRunError(NumericalError):
    """The run ended before the source finished its transit."""


class ConvergenceError(NumericalError):
    """A steady state was not reached; ``residual`` holds the last value."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(ValueError):
    """Invalid run configuration; ``issues`` lists field-level problems."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {i}" for i in self.issues))
