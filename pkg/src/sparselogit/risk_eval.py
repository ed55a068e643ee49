"""Plug-in linear classifiers and their misclassification risks.

All classifiers use the tie rule  eta(x) = 1  iff  beta^T x >= 0,  for fitted
and Bayes rules alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design_lab import RandomDesignSpec
from .errors import ContractViolation, EnumerationGuardError
from .model_core import CoefVector, as_array, inv_logit, linear_predictor

MC_SLACK_SE = 3.0
MIN_MC_N = 1000


@dataclass(frozen=True, eq=False)
class LinearClassifier:
    beta: np.ndarray

    def __post_init__(self):
        b = self.beta.beta if isinstance(self.beta, CoefVector) else self.beta
        object.__setattr__(self, "beta", np.asarray(b, dtype=float))

    def predict(self, X) -> np.ndarray:
        return classify(self, X)


@dataclass(frozen=True)
class RiskReport:
    empirical_error: float
    oracle_error_R_star: float
    excess: float
    kl: float
    margin_min: float


def classify(clf: LinearClassifier, X) -> np.ndarray:
    """I{X beta >= 0} as an int array."""
    beta = clf.beta if isinstance(clf, LinearClassifier) else np.asarray(clf, dtype=float)
    return (linear_predictor(X, beta) >= 0.0).astype(np.int64)


def bayes_risk_fixed(X, p) -> float:
    """(1/n) sum min(p_i, 1 - p_i); X only fixes n."""
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ContractViolation("probabilities must lie in [0, 1]")
    if X is not None and as_array(X).shape[0] != p.shape[0]:
        raise ContractViolation("p and X have different lengths")
    return float(np.mean(np.minimum(p, 1.0 - p)))


def misclassification_fixed(clf: LinearClassifier, X, p) -> float:
    """(1/n) sum P(Y_i != eta(x_i)) for Y_i ~ Bin(1, p_i)."""
    lab = classify(clf, X)
    p = np.asarray(p, dtype=float)
    return float(np.mean(np.where(lab == 1, 1.0 - p, p)))


def excess_risk_fixed(clf: LinearClassifier, X, p, bayes: LinearClassifier) -> float:
    """(1/n) sum I{clf_i != bayes_i} |2 p_i - 1|."""
    p = np.asarray(p, dtype=float)
    disagree = classify(clf, X) != classify(bayes, X)
    return float(np.mean(disagree * np.abs(2.0 * p - 1.0)))


def excess_risk_random_mc(clf: LinearClassifier, bayes: LinearClassifier, spec: RandomDesignSpec,
                          beta_true, mc_n: int, seed) -> tuple[float, float]:
    """Monte Carlo E_x[ I{clf != bayes} |2 p(x) - 1| ] over fresh rows from ``spec``.

    Returns ``(estimate, standard error)``.
    """
    if mc_n < MIN_MC_N:
        raise ContractViolation(f"mc_n must be at least {MIN_MC_N}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    X = spec.sample(int(mc_n), rng)
    p = inv_logit(X @ np.asarray(beta_true, dtype=float))
    vals = (classify(clf, X) != classify(bayes, X)) * np.abs(2.0 * p - 1.0)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(mc_n))


def vc_bounds(d0: int, d: int) -> tuple[float, float]:
    """(d0 log2(2d/d0), 2 d0 log2(de/d0)) for d0-sparse linear classifiers."""
    if not 1 <= d0 <= d:
        raise ContractViolation("need 1 <= d0 <= d")
    return d0 * math.log2(2.0 * d / d0), 2.0 * d0 * math.log2(d * math.e / d0)


def bartlett_bound_check(kl: float, excess: float, eps_mc: float = 0.0) -> bool:
    """excess <= sqrt(2 kl) + eps_mc."""
    if kl < 0:
        raise ContractViolation("KL divergence must be nonnegative")
    return bool(excess <= math.sqrt(2.0 * kl) + eps_mc)


def sauer_bound(n_points: int, vc: float) -> float:
    """Sauer-Shelah: at most sum_{i <= vc} C(n, i) labelings."""
    return float(sum(math.comb(n_points, i) for i in range(int(math.floor(vc)) + 1)))


def count_sparse_labelings(X, d0: int, guard: int = 16) -> int:
    """Distinct labelings I{X beta >= 0} of the rows over d0-sparse beta.

    For each support of size d0 the sign patterns realizable by some beta are
    found by checking each labeling for strict feasibility
    (s_i x_i^T beta >= 1 for the negatives / >= 0 for the positives) with an LP.
    Exhaustive over 2^rows labelings; rows are capped by ``guard``.
    """
    from itertools import combinations

    from scipy.optimize import linprog

    X = as_array(X)
    n, d = X.shape
    if n > guard:
        raise EnumerationGuardError(f"{n} rows exceed the labeling guard {guard}")
    found = set()
    for S in combinations(range(d), d0):
        XS = X[:, S]
        for code in range(2 ** n):
            if code in found:
                continue
            lab = np.array([(code >> i) & 1 for i in range(n)])
            # positives: x^T b >= 0 ; negatives: x^T b <= -1 (strict, scale-free)
            A_ub = np.where(lab[:, None] == 1, -XS, XS)
            b_ub = np.where(lab == 1, 0.0, -1.0)
            res = linprog(np.zeros(d0), A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * d0, method="highs")
            if res.status == 0:
                found.add(code)
    return len(found)


def risk_report(clf: LinearClassifier, X, beta_true, theta_hat=None) -> RiskReport:
    """Conditional fixed-design report for a fitted classifier against the truth."""
    from .model_core import LOGISTIC, glm_kl

    X = as_array(X)
    theta = X @ np.asarray(beta_true, dtype=float)
    p = inv_logit(theta)
    bayes = LinearClassifier(np.asarray(beta_true, dtype=float))
    emp = misclassification_fixed(clf, X, p)
    r_star = bayes_risk_fixed(X, p)
    th = X @ clf.beta if theta_hat is None else np.asarray(theta_hat, dtype=float)
    return RiskReport(emp, r_star, excess_risk_fixed(clf, X, p, bayes), glm_kl(LOGISTIC, theta, th),
                      float(np.min(np.abs(p - 0.5))) if p.size else 0.0)


__all__ = ["LinearClassifier", "RiskReport", "classify", "bayes_risk_fixed", "misclassification_fixed",
           "excess_risk_fixed", "excess_risk_random_mc", "vc_bounds", "bartlett_bound_check", "sauer_bound",
           "count_sparse_labelings", "risk_report", "MC_SLACK_SE"]
