"""Hyperbolic normal mean curvature flow: ODE reductions, curve flow and graph solvers."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BlowUpError,
    CFLViolation,
    ConfigError,
    ConvexityGuardError,
    DegenerateGeometryError,
    DomainError,
    HMCFError,
    NonInvertibleStateError,
)
from .kernels import BACKEND  # noqa: F401
