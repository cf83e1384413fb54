"""Exception types shared across modules."""


class DomainError(ValueError):
    """Argument outside the domain of the evaluated formula."""


class BranchCutError(DomainError):
    """Spectral parameter on the cut (-inf, 0] of the principal square root."""

    def __init__(self, s):
        super().__init__(f"s={s!r} lies on the branch cut (-inf, 0]")
        self.s = s


class PoleError(ArithmeticError):
    """A resolvent or transfer-function denominator vanishes."""

    def __init__(self, s, what="denominator"):
        super().__init__(f"{what} vanishes at s={s!r}")
        self.s = s


class SeriesBudgetError(RuntimeError):
    """A truncated series needed more terms than its budget allows."""


class SearchError(RuntimeError):
    """A bracketing root search found no sign change in its window."""

    def __init__(self, message, window=None):
        super().__init__(message if window is None else f"{message} (window {window})")
        self.window = window


class ComputationError(RuntimeError):
    """Numerical failure inside a solver (NaN, overflow, divergence)."""
