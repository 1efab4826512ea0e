"""Exception hierarchy shared by all fracblow modules."""


class FracBlowError(Exception):
    """Base class for every error raised by the package."""


class InvalidSpec(FracBlowError, ValueError):
    """Singularity exponents or other declared metadata violate their invariants."""


class NonConvergence(FracBlowError, RuntimeError):
    """An iterative or adaptive procedure ran out of budget before agreeing."""


class DomainError(FracBlowError, ValueError):
    """A point or parameter lies outside the admissible domain."""


class BracketError(FracBlowError, RuntimeError):
    """No sign change was found where a root was expected."""


class DivergentIntegrand(FracBlowError, ValueError):
    """An integrand is not integrable against the required weight."""


class InvalidLevel(FracBlowError, ValueError):
    """Truncation level is not above g(0)."""


class SubcriticalityViolated(FracBlowError, ValueError):
    """The nonlinearity fails the integral subcriticality condition."""


class SupersolutionViolated(FracBlowError, RuntimeError):
    """A candidate super-solution has a negative residual somewhere."""

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)


class InsufficientWindow(FracBlowError, ValueError):
    """A rate-fit window contains too few grid levels."""


class DegenerateField(FracBlowError, ValueError):
    """A field is constant (or non-positive) where a decay fit needs variation."""


class Inconclusive(FracBlowError, RuntimeError):
    """Neither regime criterion triggered; the raw numbers are attached."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class ConfigError(FracBlowError, ValueError):
    """Experiment configuration failed validation."""
