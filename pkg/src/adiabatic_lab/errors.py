"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid model, integrator or experiment configuration."""


class DegenerateSpectrumError(ArithmeticError):
    """The instantaneous gap collapsed where a nondegenerate spectrum is required."""


class GaugePoleError(ArithmeticError):
    """An analytic eigenvector gauge is undefined at the requested point."""


class SingularPointError(ArithmeticError):
    """A connection was requested at a clamped (singular) parameter value."""


class StepTooLargeError(ArithmeticError):
    """Finite-difference neighbours could not be phase aligned."""


class InsufficientDataError(ValueError):
    """Too few usable points for a fit or a verdict."""


class IntegrationError(RuntimeError):
    """Propagation stopped early.

    The partial trajectory (samples reached before the failure) is kept on
    ``trajectory`` so callers can still write it out.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
