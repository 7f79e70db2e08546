"""Exception types raised across the package."""


class HMCFError(Exception):
    """Base class for all package errors."""


class DegenerateGeometryError(HMCFError, ValueError):
    """A curve has a (near) zero-length edge or otherwise invalid geometry."""


class DomainError(HMCFError, ValueError):
    """An argument lies outside the domain of a closed-form expression."""


class CFLViolation(HMCFError, ValueError):
    """A requested time step exceeds the CFL-admissible step."""


class NonInvertibleStateError(HMCFError):
    """Symmetric variables could not be mapped back to conserved variables."""


class ConvexityGuardError(HMCFError, ValueError):
    """A graph state left the region where the entropy is certified convex."""


class BlowUpError(HMCFError):
    """A run produced non-finite or unbounded values.

    Attributes
    ----------
    time : float
        Simulation time at which the blow-up was detected.
    reason : str
        Short reason code (``"nonfinite"``, ``"sigma_bound"``, ``"dt_collapse"``).
    """

    def __init__(self, time, reason="nonfinite", message=None):
        self.time = float(time)
        self.reason = reason
        super().__init__(message or f"blow-up ({reason}) detected at t={self.time:.6g}")


class ConfigError(HMCFError, ValueError):
    """Scenario configuration failed validation; ``errors`` lists every problem."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
