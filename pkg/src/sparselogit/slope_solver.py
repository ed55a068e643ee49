"""Sorted-L1 (Slope) and Lasso penalized GLM estimation.

The solver is a monotone accelerated proximal gradient method with
backtracking and function-value restart; the proximal map of the sorted L1
norm is computed exactly by pool-adjacent-violators.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractViolation
from .model_core import LOGISTIC, FitResult, GlmFamily, as_array, has_unit_columns

SLOPE_LOGISTIC_FLOOR = 20.0 * math.sqrt(6.0)
SLOPE_GLM_FLOOR = 40.0 * math.sqrt(6.0)
UNIT_NORM_TOL = 1e-8


class BelowFloorWarning(UserWarning):
    """The Slope constant A is below the value the risk bound requires."""


@dataclass(frozen=True, eq=False)
class LambdaSchedule:
    lambdas: np.ndarray
    kind: str
    A: float
    c0: float | None = None
    family_factor: float = 1.0
    below_floor: bool = False

    def __len__(self):
        return self.lambdas.shape[0]


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 50_000
    obj_tol: float = 1e-10
    step_rule: str = "backtracking"
    restart: bool = True
    patience: int = 5

    def __post_init__(self):
        if self.max_iter < 1:
            raise ContractViolation("max_iter must be >= 1")
        if not self.obj_tol > 0:
            raise ContractViolation("obj_tol must be positive")
        if self.step_rule not in ("fixed_lipschitz", "backtracking"):
            raise ContractViolation(f"unknown step rule {self.step_rule!r}")


@dataclass(frozen=True)
class SolverDiagnostics:
    iterations: int
    converged: bool
    lipschitz: float
    objective_trace: np.ndarray


def _check_lambdas(lambdas) -> np.ndarray:
    lam = np.ascontiguousarray(lambdas, dtype=float)
    if lam.ndim != 1:
        raise ContractViolation("lambdas must be one-dimensional")
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise ContractViolation("lambdas must be finite and nonnegative")
    if np.any(np.diff(lam) > 0):
        raise ContractViolation("lambdas must be nonincreasing")
    return lam


def prox_sorted_l1(y, lambdas, t: float = 1.0) -> np.ndarray:
    """argmin_b  0.5 ||b - y||^2 + t sum_j lambda_j |b|_(j)."""
    y = np.ascontiguousarray(y, dtype=float)
    lam = _check_lambdas(lambdas)
    if lam.shape != y.shape:
        raise ContractViolation("lambdas and y must have equal length")
    if t < 0:
        raise ContractViolation("t must be nonnegative")
    return kernels.prox_sorted_l1(y, t * lam)


def sorted_l1_norm(beta, lambdas) -> float:
    return float(kernels.sorted_l1_norm(np.ascontiguousarray(beta, dtype=float), _check_lambdas(lambdas)))


def slope_weights(d: int) -> np.ndarray:
    """sqrt(ln(2d / j)), j = 1..d."""
    j = np.arange(1, d + 1)
    return np.sqrt(np.log(2.0 * d / j))


def build_schedule(kind: str, d: int, A: float, c0: float = 3.0,
                   family: GlmFamily = LOGISTIC) -> LambdaSchedule:
    """Tuning sequence for Slope or Lasso.

    ``slope_logistic``: A (c0+1)/(c0-1) sqrt(ln(2d/j)), floor A >= 20 sqrt 6.
    ``slope_glm``: the same times sqrt(U / a), floor A >= 40 sqrt 6.
    ``lasso``: the constant sequence A.
    A below the floor is allowed but flagged and warned about.
    """
    if d < 1:
        raise ContractViolation("d must be >= 1")
    if not A > 0:
        raise ContractViolation("A must be positive")
    if kind == "lasso":
        return LambdaSchedule(np.full(d, float(A)), kind, float(A))
    if kind not in ("slope_logistic", "slope_glm"):
        raise ContractViolation(f"unknown schedule kind {kind!r}")
    if not c0 > 1:
        raise ContractViolation("c0 must exceed 1")
    factor = 1.0
    floor = SLOPE_LOGISTIC_FLOOR
    if kind == "slope_glm":
        factor = math.sqrt(family.variance_upper / family.scale_a)
        floor = SLOPE_GLM_FLOOR
    below = A < floor
    if below:
        warnings.warn(f"A={A:g} is below the floor {floor:.4g} for {kind}", BelowFloorWarning, stacklevel=2)
    lam = float(A) * (c0 + 1.0) / (c0 - 1.0) * factor * slope_weights(d)
    return LambdaSchedule(lam, kind, float(A), float(c0), factor, below)


def slope_objective(family: GlmFamily, X, y, beta, lambdas) -> float:
    """-loglik(beta) + sum lambda_j |beta|_(j), with loglik = sum (y theta - b(theta)) / a."""
    X = as_array(X)
    theta = np.ascontiguousarray(X @ np.asarray(beta, dtype=float))
    nll = float(kernels.neg_loglik(theta, np.asarray(y, dtype=float), family.code)) / family.scale_a
    return nll + sorted_l1_norm(beta, lambdas)


def _lipschitz0(family: GlmFamily, X) -> float:
    # the kernel minimises a times the objective, whose smooth part has curvature <= U smax^2
    smax = np.linalg.norm(X, 2) if X.size else 0.0
    return max(family.variance_upper * smax * smax, 1e-12)


def fit_slope(family: GlmFamily, X, y, schedule, cfg: SolverConfig = SolverConfig(),
              beta0=None, require_unit_columns: bool = True) -> FitResult:
    """Penalized MLE with the sorted-L1 penalty given by ``schedule``.

    Minimises  -loglik(beta) + sum_j lambda_j |beta|_(j)  (see
    :func:`slope_objective`).  ``schedule`` may be a :class:`LambdaSchedule`
    or a plain nonincreasing array.  X must have unit-norm columns.  No
    intercept is added.
    """
    X = as_array(X)
    y = family.check_response(y)
    n, d = X.shape
    if y.shape[0] != n:
        raise ContractViolation(f"response has {y.shape[0]} rows, design has {n}")
    if require_unit_columns and not np.all(np.abs(np.linalg.norm(X, axis=0) - 1.0) <= UNIT_NORM_TOL):
        raise ContractViolation("Slope requires unit-norm design columns (see unit_normalize_columns)")
    lam = _check_lambdas(schedule.lambdas if isinstance(schedule, LambdaSchedule) else schedule)
    if lam.shape[0] != d:
        raise ContractViolation(f"schedule has {lam.shape[0]} entries, design has {d} columns")
    b0 = np.zeros(d) if beta0 is None else np.ascontiguousarray(beta0, dtype=float)
    beta, it, conv, L, trace = kernels.slope_apg(
        X, y, lam * family.scale_a, family.code, _lipschitz0(family, X), cfg.max_iter, cfg.obj_tol, cfg.patience,
        cfg.step_rule == "backtracking", cfg.restart, b0)
    trace = np.asarray(trace) / family.scale_a
    diag = SolverDiagnostics(int(it), bool(conv), float(L), trace)
    name = schedule.kind if isinstance(schedule, LambdaSchedule) else "slope"
    return FitResult(np.asarray(beta), name, float(trace[-1]), bool(conv), int(it), diag)


def fit_lasso(family: GlmFamily, X, y, lam: float, cfg: SolverConfig = SolverConfig(),
              require_unit_columns: bool = True) -> FitResult:
    if lam < 0:
        raise ContractViolation("lasso penalty must be nonnegative")
    d = as_array(X).shape[1]
    fit = fit_slope(family, X, y, np.full(d, float(lam)), cfg, require_unit_columns=require_unit_columns)
    return FitResult(fit.beta, "lasso", fit.objective, fit.converged, fit.iterations, fit.diagnostics)


__all__ = ["LambdaSchedule", "SolverConfig", "SolverDiagnostics", "BelowFloorWarning", "prox_sorted_l1",
           "sorted_l1_norm", "build_schedule", "fit_slope", "fit_lasso", "slope_objective", "slope_weights",
           "has_unit_columns"]
