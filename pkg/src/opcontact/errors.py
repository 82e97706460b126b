"""Package-specific error types."""


class BudgetExceededError(RuntimeError):
    """Raised when an exact enumeration would exceed its configured budget."""


class BracketError(ValueError):
    """Raised when a bisection bracket does not straddle the survival threshold."""

    def __init__(self, message, survival_lo=None, survival_hi=None):
        super().__init__(message)
        self.survival_lo = survival_lo
        self.survival_hi = survival_hi


class DivergenceError(ValueError):
    """Raised when a requested quantity is infinite by construction (e.g. d=1 walk moment)."""
