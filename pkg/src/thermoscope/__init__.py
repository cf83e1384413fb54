"""Feedback-controlled heat equation: kernels, spectra, stability criteria and simulation."""

from .errors import BranchCutError, ComputationError, DomainError, PoleError, SearchError, SeriesBudgetError
from .kernels import LINE, ProblemParams, SeriesControl, transfer_function
from .modes import ModeVector

__all__ = [
    "BranchCutError", "ComputationError", "DomainError", "PoleError", "SearchError",
    "SeriesBudgetError", "LINE", "ProblemParams", "SeriesControl", "transfer_function",
    "ModeVector",
]
__version__ = "0.1.0"
