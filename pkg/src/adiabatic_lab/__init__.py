"""Numerical experiments on the adiabatic theorem for driven two-level systems.

The package propagates spin-1/2 Hamiltonians with a slowly varying parameter,
measures the fidelity with the adiabatic approximation, and relates its
convergence as the drive slows to the singular structure of the Berry
connection.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigurationError,
    DegenerateSpectrumError,
    GaugePoleError,
    InsufficientDataError,
    IntegrationError,
    SingularPointError,
    StepTooLargeError,
)
from .integrate import IntegratorConfig, Trajectory, propagate, propagate_model  # noqa: E402
from .models import (  # noqa: E402
    Linear,
    LinearTime,
    Log,
    ModelSpec,
    NonlinearTime,
    Power,
)

__all__ = [
    "ConfigurationError",
    "DegenerateSpectrumError",
    "GaugePoleError",
    "InsufficientDataError",
    "IntegrationError",
    "IntegratorConfig",
    "Linear",
    "LinearTime",
    "Log",
    "ModelSpec",
    "NonlinearTime",
    "Power",
    "SingularPointError",
    "StepTooLargeError",
    "Trajectory",
    "propagate",
    "propagate_model",
]
