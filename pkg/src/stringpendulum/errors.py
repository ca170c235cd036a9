"""Exception hierarchy shared across the package."""


class StringPendulumError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(StringPendulumError):
    """Invalid configuration file or parameter set."""


class DegenerateElementError(StringPendulumError):
    """Two adjacent string nodes coincide; the tension direction is undefined."""


class FullyDeployedError(StringPendulumError):
    """Unstretched element length is not positive (string fully deployed)."""


class ReelLimitError(StringPendulumError):
    """The reel coordinate left its admissible range during a simulation."""


class CayleyBoundaryError(StringPendulumError):
    """Rotation angle of pi is outside the Cayley chart."""


class IOFailure(StringPendulumError):
    """Filesystem failure while writing run outputs."""


class NonConvergenceError(StringPendulumError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, message, residual_norm=None, iterations=None):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations
