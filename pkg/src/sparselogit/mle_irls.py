"""Restricted maximum likelihood over a fixed support by IRLS (damped Newton)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .errors import ContractViolation, DegenerateModelError, NonConvergenceError
from .model_core import LOGISTIC, FitResult, GlmFamily, as_array, numerical_rank

# |theta| beyond this makes a fitted probability suspiciously close to 0 or 1;
# only then is the (comparatively expensive) separation LP solved.
_SATURATION = 15.0


@dataclass(frozen=True)
class IrlsConfig:
    max_iter: int = 100
    grad_tol: float = 1e-8
    step_halving_max: int = 30
    box_C0: float | None = None
    separation_norm: float = 1e3

    def __post_init__(self):
        if self.max_iter < 1:
            raise ContractViolation("max_iter must be >= 1")
        if not self.grad_tol > 0:
            raise ContractViolation("grad_tol must be positive")
        if self.box_C0 is not None and not self.box_C0 > 0:
            raise ContractViolation("box_C0 must be positive when set")


@dataclass(frozen=True)
class IrlsDiagnostics:
    iterations: int
    final_grad_norm: float
    separation_detected: bool
    boundary_active: bool
    converged: bool
    loglik_trace: np.ndarray


def is_separated(X, y) -> bool:
    """True if some nonzero beta has (2y_i - 1) x_i^T beta >= 0 for every i.

    Covers complete and quasi-complete separation; solved as a small LP.
    """
    X = as_array(X)
    if X.shape[1] == 0:
        return False
    s = 2.0 * np.asarray(y, dtype=float) - 1.0
    A = s[:, None] * X
    res = linprog(-A.sum(axis=0), A_ub=-A, b_ub=np.zeros(X.shape[0]),
                  bounds=[(-1.0, 1.0)] * X.shape[1], method="highs")
    return bool(res.status == 0 and -res.fun > 1e-9 * max(1.0, np.abs(A).sum()))


def _validate_model(model: Iterable[int], d: int) -> tuple[int, ...]:
    M = tuple(sorted(int(j) for j in model))
    if len(set(M)) != len(M):
        raise ContractViolation("model contains repeated indices")
    if M and (M[0] < 0 or M[-1] >= d):
        raise ContractViolation(f"model indices must lie in [0, {d})")
    return M


def fit_restricted_mle(family: GlmFamily, X, y, model: Iterable[int] = None,
                       cfg: IrlsConfig = IrlsConfig(), *, check_rank: bool = True) -> FitResult:
    """Maximise the log-likelihood over beta supported on ``model``.

    ``model=None`` means all columns.  Coefficients outside the model are
    exactly zero.  Perfectly separated data are reported through
    ``diagnostics.separation_detected`` rather than raised; running out of
    iterations on non-separated data raises :class:`NonConvergenceError`.
    """
    X = as_array(X)
    y = family.check_response(y)
    n, d = X.shape
    if y.shape[0] != n:
        raise ContractViolation(f"response has {y.shape[0]} rows, design has {n}")
    M = tuple(range(d)) if model is None else _validate_model(model, d)
    beta = np.zeros(d)
    if not M:
        ll = -float(kernels.neg_loglik(np.zeros(n), y, family.code))
        diag = IrlsDiagnostics(0, 0.0, False, False, True, np.array([ll]))
        return FitResult(beta, "restricted_mle", -ll / family.scale_a, True, 0, diag, {"model": M})
    XM = np.ascontiguousarray(X[:, M])
    if check_rank and numerical_rank(XM) < len(M):
        raise DegenerateModelError(f"columns {M} are linearly dependent")
    box = -1.0 if cfg.box_C0 is None else float(cfg.box_C0)
    try:
        bM, theta, it, gmax, status, boundary, trace = kernels.irls_newton(
            XM, y, family.code, cfg.max_iter, cfg.grad_tol, cfg.step_halving_max, box, cfg.separation_norm)
    except np.linalg.LinAlgError as exc:
        raise DegenerateModelError(f"singular information matrix for model {M}") from exc
    boundary_active = bool(boundary) and float(np.max(np.abs(theta))) >= box * (1.0 - 1e-9)
    separated = False
    if family.name == "logistic":
        if status == kernels.IRLS_DIVERGING:
            separated = True
        elif boundary_active or np.max(np.abs(theta)) > _SATURATION:
            separated = is_separated(XM, y)
    converged = status == kernels.IRLS_CONVERGED and not separated
    if status == kernels.IRLS_STALLED and not boundary:
        # no ascent direction left at working precision: accept as a numerical optimum
        converged = not separated and gmax <= 1e3 * cfg.grad_tol
    beta[list(M)] = bM
    diag = IrlsDiagnostics(int(it), float(gmax), separated, boundary_active, converged, np.asarray(trace))
    fit = FitResult(beta, "restricted_mle", -float(trace[-1]) / family.scale_a, converged, int(it), diag,
                    {"model": M})
    if not (converged or separated or boundary_active):
        raise NonConvergenceError(
            f"IRLS did not converge on model {M} within {cfg.max_iter} iterations "
            f"(gradient {gmax:.3g})", fit=fit, diagnostics=diag)
    return fit


def criterion_value(family: GlmFamily, X, y, fit: FitResult, pen: float) -> float:
    """Negative log-likelihood of ``fit`` plus the penalty ``pen``."""
    X = as_array(X)
    y = family.check_response(y)
    theta = X @ fit.beta
    return float(kernels.neg_loglik(np.ascontiguousarray(theta), y, family.code)) / family.scale_a + float(pen)


__all__ = ["IrlsConfig", "IrlsDiagnostics", "fit_restricted_mle", "criterion_value", "is_separated", "LOGISTIC"]
