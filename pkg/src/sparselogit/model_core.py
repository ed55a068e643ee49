"""GLM / logistic model primitives: families, designs, likelihoods, divergences."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import kernels
from .errors import ContractViolation, InfiniteDivergence

RANK_RTOL = 1e-10
NORM_ATOL = 1e-12


@dataclass(frozen=True)
class GlmFamily:
    """One-parameter natural exponential family with canonical link.

    ``variance_upper`` is the uniform bound U on b''; the lower bound L is
    range dependent, see :meth:`variance_lower`.
    """

    name: str
    scale_a: float = 1.0
    variance_upper: float = 0.25

    def __post_init__(self):
        if self.name not in ("logistic", "gaussian"):
            raise ContractViolation(f"unknown family {self.name!r}")
        if self.scale_a <= 0:
            raise ContractViolation("scale_a must be positive")

    @classmethod
    def logistic(cls) -> "GlmFamily":
        return cls("logistic", 1.0, 0.25)

    @classmethod
    def gaussian(cls, sigma2: float = 1.0) -> "GlmFamily":
        return cls("gaussian", float(sigma2), 1.0)

    @property
    def code(self) -> int:
        return kernels.LOGISTIC if self.name == "logistic" else kernels.GAUSSIAN

    def b(self, theta):
        return kernels.cumulant(_vec(theta), self.code)

    def b_prime(self, theta):
        return kernels.mean_fn(_vec(theta), self.code)

    def b_double_prime(self, theta):
        return kernels.variance_fn(_vec(theta), self.code)

    def variance_lower(self, c0: float | None = None) -> float:
        """Lower bound L of b'' over |theta| <= c0.

        For the logistic family this is delta(1 - delta) with
        delta = 1 / (1 + e^{c0}); the gaussian family has L = 1.
        """
        if self.name == "gaussian":
            return 1.0
        if c0 is None:
            raise ContractViolation("the logistic lower variance bound needs a finite range c0")
        delta = 1.0 / (1.0 + np.exp(c0))
        return delta * (1.0 - delta)

    def check_response(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.ndim != 1:
            raise ContractViolation("response must be one-dimensional")
        if not np.all(np.isfinite(y)):
            raise ContractViolation("response contains non-finite values")
        if self.name == "logistic" and not np.all((y == 0.0) | (y == 1.0)):
            raise ContractViolation("logistic response must be binary (0/1)")
        return y


LOGISTIC = GlmFamily.logistic()


def delta_from_c0(c0: float) -> float:
    """delta such that |theta| < c0  <=>  delta < p < 1 - delta."""
    return float(1.0 / (1.0 + np.exp(c0)))


def c0_from_delta(delta: float) -> float:
    if not 0.0 < delta < 0.5:
        raise ContractViolation("delta must lie in (0, 1/2)")
    return float(np.log((1.0 - delta) / delta))


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """An n x d design with its numerical rank and normalization state."""

    entries: np.ndarray
    rank_r: int
    columns_unit_normalized: bool
    feature_names: tuple[str, ...] = ()

    @classmethod
    def from_array(cls, X, feature_names=None) -> "DesignMatrix":
        X = np.ascontiguousarray(X, dtype=float)
        if X.ndim != 2:
            raise ContractViolation("design must be a 2-D array")
        if not np.all(np.isfinite(X)):
            raise ContractViolation("design contains non-finite values")
        names = tuple(feature_names) if feature_names is not None else tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ContractViolation("feature_names length does not match column count")
        return cls(X, numerical_rank(X), has_unit_columns(X), names)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def d(self) -> int:
        return self.entries.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def as_array(X) -> np.ndarray:
    if isinstance(X, DesignMatrix):
        return X.entries
    return np.ascontiguousarray(X, dtype=float)


def numerical_rank(X) -> int:
    X = as_array(X)
    if X.size == 0:
        return 0
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def has_unit_columns(X, atol: float = NORM_ATOL) -> bool:
    X = as_array(X)
    return bool(np.all(np.abs(np.linalg.norm(X, axis=0) - 1.0) <= atol))


@dataclass(frozen=True, eq=False)
class CoefVector:
    beta: np.ndarray

    @property
    def support(self) -> tuple[int, ...]:
        return support_of(self.beta)

    @property
    def l0(self) -> int:
        return int(np.count_nonzero(self.beta))


def support_of(beta) -> tuple[int, ...]:
    return tuple(int(j) for j in np.flatnonzero(np.asarray(beta)))


@dataclass(frozen=True, eq=False)
class FitResult:
    """Coefficients plus diagnostics from any estimator in the package."""

    beta: np.ndarray
    estimator: str
    objective: float
    converged: bool
    iterations: int
    diagnostics: Any = None
    extra: dict = field(default_factory=dict)

    @property
    def support(self) -> tuple[int, ...]:
        return support_of(self.beta)

    @property
    def coef(self) -> CoefVector:
        return CoefVector(self.beta)


def _vec(a) -> np.ndarray:
    return np.ascontiguousarray(np.atleast_1d(np.asarray(a, dtype=float)))


def linear_predictor(X, beta) -> np.ndarray:
    X = as_array(X)
    beta = np.asarray(beta.beta if isinstance(beta, CoefVector) else beta, dtype=float)
    if beta.ndim != 1 or X.shape[1] != beta.shape[0]:
        raise ContractViolation(f"design has {X.shape[1]} columns but beta has shape {beta.shape}")
    return X @ beta


def inv_logit(theta) -> np.ndarray:
    """e^t / (1 + e^t), evaluated on the branch that cannot overflow."""
    theta = np.asarray(theta, dtype=float)
    out = kernels.expit(_vec(theta.ravel()))
    return out.reshape(theta.shape)


def logit(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return np.log(p) - np.log1p(-p)


def softplus(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return kernels.softplus(_vec(theta.ravel())).reshape(theta.shape)


def prob_vector(p, delta: float | None = None, clamp: bool = False, eps: float = 1e-12) -> np.ndarray:
    """Validate probabilities; clamp to [eps, 1 - eps] only when asked.

    With ``delta`` given, the bounded-probability box delta < p < 1 - delta is enforced.
    """
    p = np.asarray(p, dtype=float)
    if clamp:
        p = np.clip(p, eps, 1.0 - eps)
    lo = 0.0 if delta is None else delta
    if not np.all((p > lo) & (p < 1.0 - lo)):
        raise ContractViolation(f"probabilities must lie strictly inside ({lo}, {1.0 - lo})")
    return p


def log_likelihood(family: GlmFamily, X, beta, y) -> float:
    """sum_i (theta_i y_i - b(theta_i)) / a, without the c(y, a) term."""
    y = family.check_response(y)
    theta = linear_predictor(X, beta)
    if theta.shape != y.shape:
        raise ContractViolation("response length does not match the design")
    return -float(kernels.neg_loglik(_vec(theta), y, family.code)) / family.scale_a


def kl_divergence(p, p_hat) -> float:
    """Averaged Bernoulli KL divergence  (1/n) sum KL(Bin(1, p_i) || Bin(1, p_hat_i))."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(p_hat, dtype=float)
    if p.shape != q.shape:
        raise ContractViolation("p and p_hat have different lengths")
    if np.any((p <= 0) | (p >= 1)):
        raise ContractViolation("true probabilities must lie in (0, 1)")
    if np.any((q <= 0) | (q >= 1)):
        raise InfiniteDivergence("a fitted probability equals 0 or 1")
    terms = p * (np.log(p) - np.log(q)) + (1 - p) * (np.log1p(-p) - np.log1p(-q))
    return float(np.mean(terms))


def glm_kl(family: GlmFamily, theta, theta_hat) -> float:
    """(1/(n a)) sum { b'(t)(t - t_hat) - (b(t) - b(t_hat)) }."""
    theta = _vec(theta)
    theta_hat = _vec(theta_hat)
    if theta.shape != theta_hat.shape:
        raise ContractViolation("theta and theta_hat have different lengths")
    terms = family.b_prime(theta) * (theta - theta_hat) - (family.b(theta) - family.b(theta_hat))
    # exact zero when theta_hat == theta; tiny negative rounding otherwise clipped
    return max(float(np.mean(terms)) / family.scale_a, 0.0)


def bernoulli_hellinger_sq(p1: float, p2: float) -> float:
    if not (0 < p1 < 1 and 0 < p2 < 1):
        raise ContractViolation("Bernoulli parameters must lie in (0, 1)")
    return 1.0 - (np.sqrt(p1 * p2) + np.sqrt((1 - p1) * (1 - p2)))
