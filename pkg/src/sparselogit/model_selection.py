"""Complexity-penalized model selection: exhaustive and forward search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ContractViolation, DegenerateModelError, EnumerationGuardError, NonConvergenceError
from .mle_irls import IrlsConfig, criterion_value, fit_restricted_mle
from .model_core import FitResult, GlmFamily, as_array, numerical_rank

ENUMERATION_GUARD = 2_000_000
C_MARGIN = 0.01


@dataclass(frozen=True)
class ComplexityPenalty:
    """Pen(k) = c k ln(de/k) with the boundary clause Pen(r) = c r for fixed designs.

    ``r`` is the design rank for ``kind="fixed_design"`` and the size cap
    min(d, n) for ``kind="random_design"``.
    """

    kind: str
    c: float
    d: int
    r: int

    def __post_init__(self):
        if self.kind not in ("fixed_design", "random_design"):
            raise ContractViolation(f"unknown penalty kind {self.kind!r}")
        if not self.c >= 0:
            raise ContractViolation("penalty constant c must be nonnegative")
        if not 1 <= self.r <= self.d:
            raise ContractViolation("need 1 <= r <= d")

    @classmethod
    def fixed(cls, c: float, X) -> "ComplexityPenalty":
        X = as_array(X)
        return cls("fixed_design", float(c), X.shape[1], max(numerical_rank(X), 1))

    @classmethod
    def random(cls, c: float, n: int, d: int) -> "ComplexityPenalty":
        return cls("random_design", float(c), d, min(d, n))

    def __call__(self, k: int) -> float:
        return penalty_value(self, k)


def penalty_value(pen: ComplexityPenalty, k: int) -> float:
    if k != int(k) or not 0 <= k <= pen.r:
        raise ContractViolation(f"model size {k} outside [0, {pen.r}]")
    k = int(k)
    if k == 0:
        return 0.0
    if pen.kind == "fixed_design" and k == pen.r:
        return pen.c * pen.r
    return pen.c * k * math.log(pen.d * math.e / k)


def default_c(delta: float) -> float:
    """Smallest admissible constant 4 / (delta (1 - delta)), inflated by 1%."""
    if not 0.0 < delta < 0.5:
        raise ContractViolation("delta must lie in (0, 1/2)")
    return 4.0 / (delta * (1.0 - delta)) * (1.0 + C_MARGIN)


@dataclass(frozen=True, eq=False)
class SelectionResult:
    model: tuple[int, ...]
    fit: FitResult
    criterion: float
    path: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def beta(self) -> np.ndarray:
        return self.fit.beta


def _order_key(crit: float, model: tuple[int, ...]):
    # smaller criterion, then smaller model, then lexicographic support
    return (crit, len(model), model)


def default_max_size(X) -> int:
    X = as_array(X)
    return max(0, min(numerical_rank(X), X.shape[0] // 2, 50))


def _try_fit(family, X, y, model, cfg):
    try:
        return fit_restricted_mle(family, X, y, model, cfg), None
    except DegenerateModelError as exc:
        return None, f"degenerate: {exc}"
    except NonConvergenceError as exc:
        return None, f"nonconvergence: {exc}"


def count_models(d: int, max_size: int) -> int:
    return sum(math.comb(d, k) for k in range(max_size + 1))


def select_exhaustive(family: GlmFamily, X, y, pen: ComplexityPenalty, max_size: int | None = None,
                      cfg: IrlsConfig = IrlsConfig(), record_path: bool = True) -> SelectionResult:
    """Global minimiser of  -loglik(beta_M) + Pen(|M|)  over all |M| <= max_size.

    Candidates whose fit fails (dependent columns, nonconvergence) are
    skipped and listed in ``skipped``.
    """
    X = as_array(X)
    y = family.check_response(y)
    d = X.shape[1]
    if max_size is None:
        max_size = default_max_size(X)
    max_size = min(int(max_size), pen.r)
    if max_size < 0:
        raise ContractViolation("max_size must be nonnegative")
    total = count_models(d, max_size)
    if total > ENUMERATION_GUARD:
        raise EnumerationGuardError(
            f"{total} candidate models exceed the guard of {ENUMERATION_GUARD}; "
            "use select_forward or lower max_size")
    best = None
    path, skipped = [], []
    for k in range(max_size + 1):
        pk = penalty_value(pen, k)
        for M in combinations(range(d), k):
            fit, why = _try_fit(family, X, y, M, cfg)
            if fit is None:
                skipped.append((M, why))
                continue
            crit = fit.objective + pk
            if record_path:
                path.append((M, crit))
            if best is None or _order_key(crit, M) < _order_key(best[0], best[1]):
                best = (crit, M, fit)
    crit, M, fit = best
    return SelectionResult(M, fit, crit, path, skipped)


def select_forward(family: GlmFamily, X, y, pen: ComplexityPenalty, max_size: int | None = None,
                   cfg: IrlsConfig = IrlsConfig()) -> SelectionResult:
    """Greedy forward path from the empty model, returning the path minimiser.

    At each size the feature whose addition gives the smallest criterion is
    added (equal-size candidates share the penalty, so this is the largest
    likelihood).  The path always runs to ``max_size``.
    """
    X = as_array(X)
    y = family.check_response(y)
    n, d = X.shape
    if max_size is None:
        max_size = default_max_size(X)
    max_size = min(int(max_size), pen.r, d)
    if max_size > min(d, n):
        raise ContractViolation("max_size must not exceed min(d, n)")
    current: tuple[int, ...] = ()
    fit0, _ = _try_fit(family, X, y, current, cfg)
    path = [(current, fit0.objective)]
    fits = {current: fit0}
    skipped = []
    for k in range(1, max_size + 1):
        pk = penalty_value(pen, k)
        step_best = None
        for j in range(d):
            if j in current:
                continue
            M = tuple(sorted(current + (j,)))
            fit, why = _try_fit(family, X, y, M, cfg)
            if fit is None:
                skipped.append((M, why))
                continue
            crit = fit.objective + pk
            if step_best is None or _order_key(crit, M) < _order_key(step_best[0], step_best[1]):
                step_best = (crit, M, fit)
        if step_best is None:
            break
        crit, current, fit = step_best
        path.append((current, crit))
        fits[current] = fit
    crit, M = min(((c, m) for m, c in path), key=lambda cm: _order_key(cm[0], cm[1]))
    return SelectionResult(M, fits[M], crit, path, skipped)


__all__ = ["ComplexityPenalty", "SelectionResult", "penalty_value", "default_c",
           "select_exhaustive", "select_forward", "default_max_size", "count_models", "criterion_value"]
