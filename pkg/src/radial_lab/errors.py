"""Exception types shared across the package."""


class RadialLabError(Exception):
    """Base class for package errors."""


class ParameterError(RadialLabError, ValueError):
    """Invalid argument (grid size, dimension, out-of-range option)."""


class HypothesisError(RadialLabError, ValueError):
    """A structural hypothesis on the coefficients fails at a sample point."""


class ValidationError(RadialLabError, ValueError):
    """A derived quantity (growth witness, truncation constant) is unusable."""


class NumericError(RadialLabError, ArithmeticError):
    """A linear solve or root search failed numerically."""


class BarrierError(RadialLabError, ValueError):
    """The energy barrier estimate between wells is not positive."""


class MechanismError(RadialLabError, RuntimeError):
    """The second-eigenvalue descent mechanism is absent or too weak."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InternalInvariantError(RadialLabError, RuntimeError):
    """An internal invariant that must hold by construction was violated."""
