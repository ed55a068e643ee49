"""Exception types raised across the package."""

from __future__ import annotations


class ContractViolation(ValueError):
    """An argument violates a documented precondition."""


class InfiniteDivergence(ArithmeticError):
    """A Kullback-Leibler divergence is infinite (fitted probability hit 0 or 1)."""


class DegenerateModelError(ValueError):
    """The columns of a candidate model are linearly dependent."""


class NonConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations.

    The partially converged fit and its diagnostics are attached so callers can
    decide whether the iterate is still usable.
    """

    def __init__(self, message, fit=None, diagnostics=None):
        super().__init__(message)
        self.fit = fit
        self.diagnostics = diagnostics


class EnumerationGuardError(ValueError):
    """An exhaustive enumeration would exceed its size guard."""


class CsvFormatError(ValueError):
    """A CSV input file is malformed; the message names the offending line."""


class ConfigError(ValueError):
    """An experiment configuration is invalid."""
