"""Design constructions: shattered sign matrices, the worst-case stacked design,
random bounded designs, column normalization and WRE cone eigenvalues.

Logarithm bases matter here: the shattering construction uses log2(2d/d0)
rows per block, the cone weights use natural logs sqrt(ln(2d/j)).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import kernels
from .errors import ContractViolation, EnumerationGuardError
from .model_core import DesignMatrix, as_array, inv_logit

SHATTER_ROW_GUARD = 20
RANDOM_DISTRIBUTIONS = ("uniform_ball", "gaussian_rescaled", "rademacher_rescaled")


# ---------------------------------------------------------------- sign matrices

def _shatter_k(d0: int, d: int) -> int:
    if d0 < 1 or d < d0:
        raise ContractViolation("need 1 <= d0 <= d")
    ratio = 2 * d / d0
    k = round(math.log2(ratio)) if ratio > 0 else 0
    if d % d0 != 0 or 2 ** k != ratio or k < 1:
        m = max(1, round(math.log2(max(d / d0, 1))))
        raise ContractViolation(
            f"2d/d0 must be a power of two (d0={d0}, d={d}); nearest admissible: d0={d0}, d={d0 * 2 ** m}")
    return k


def sign_block(k: int) -> np.ndarray:
    """k x 2^(k-1) matrix whose columns are all +-1 vectors with first entry 1."""
    m = 2 ** (k - 1)
    K = np.ones((k, m))
    for c in range(m):
        for r in range(1, k):
            if (c >> (k - 1 - r)) & 1:
                K[r, c] = -1.0
    return K


def build_shatter_matrix_W(d0: int, d: int) -> np.ndarray:
    """Block-diagonal (d0 k) x d matrix of copies of the sign block, k = log2(2d/d0)."""
    k = _shatter_k(d0, d)
    K = sign_block(k)
    m = K.shape[1]
    W = np.zeros((d0 * k, d))
    for g in range(d0):
        W[g * k:(g + 1) * k, g * m:(g + 1) * m] = K
    return W


def labeling_table(W, d0: int) -> np.ndarray:
    """Boolean table over all 2^rows labelings: realised by a one-(+-1)-per-block vector?"""
    W = np.ascontiguousarray(W, dtype=float)
    rows, d = W.shape
    if rows > SHATTER_ROW_GUARD:
        raise EnumerationGuardError(f"{rows} rows exceed the 2^{SHATTER_ROW_GUARD} labeling guard")
    if d0 < 1 or d % d0 != 0:
        raise ContractViolation("d must be divisible by d0")
    return kernels.sparse_sign_labelings(W, int(d0))


def verify_shattering(W, d0: int) -> bool:
    return bool(np.all(labeling_table(W, d0)))


def count_labelings(W, d0: int) -> int:
    return int(np.sum(labeling_table(W, d0)))


def block_sign_vector(W, d0: int, labels) -> np.ndarray:
    """The one-(+-1)-per-block vector beta with I{W beta >= 0} = labels, for a shattered W."""
    W = np.asarray(W, dtype=float)
    labels = np.asarray(labels).astype(int)
    rows, d = W.shape
    if labels.shape != (rows,):
        raise ContractViolation(f"need {rows} labels")
    k = rows // d0
    m = d // d0
    beta = np.zeros(d)
    want = 2.0 * labels - 1.0
    for g in range(d0):
        block = W[g * k:(g + 1) * k, g * m:(g + 1) * m]
        s = want[g * k:(g + 1) * k]
        sgn = 1.0 if s[0] > 0 else -1.0
        hits = np.flatnonzero(np.all(block == sgn * s[:, None], axis=0))
        if hits.size == 0:
            raise ContractViolation("labeling not realisable by a block sign vector")
        beta[g * m + hits[0]] = sgn
    return beta


# ---------------------------------------------------------------- worst-case design

def margin_logit(h: float) -> float:
    """ln((1 + 2h) / (1 - 2h)): the |theta| at which |p - 1/2| = h."""
    if not 0.0 <= h < 0.5:
        raise ContractViolation("margin h must lie in [0, 1/2)")
    return math.log((1 + 2 * h) / (1 - 2 * h))


def proof_kappa(h: float, n: int, V: int) -> int:
    """floor(1 / (18 h^2)) clamped to [1, floor(n / (V - 1))]; h = 0 gives the upper clamp."""
    cap = n // (V - 1)
    if h <= 0:
        return max(1, cap)
    return int(min(max(math.floor(1.0 / (18.0 * h * h)), 1), cap))


def small_margin(n: int, V: int) -> float:
    """sqrt((V - 1) / (18 n)), the margin used when the nominal margin is below it."""
    return math.sqrt((V - 1) / (18.0 * n))


@dataclass(frozen=True, eq=False)
class WorstCaseDesign:
    X: DesignMatrix
    W: np.ndarray
    d0: int
    h: float
    kappa: int
    row_of: np.ndarray = field(repr=False)

    @property
    def V(self) -> int:
        return self.W.shape[0]

    def beta_for(self, labels) -> np.ndarray:
        """d0-sparse beta with beta^T w_i = +-ln((1+2h)/(1-2h)), signs given by ``labels``."""
        return margin_logit(self.h) * block_sign_vector(self.W, self.d0, labels)

    def labels_on_rows(self, labels) -> np.ndarray:
        return np.asarray(labels)[self.row_of]

    def bayes_vectors(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """All (labels, beta) pairs over the hypercube {0,1}^V."""
        if self.V > SHATTER_ROW_GUARD:
            raise EnumerationGuardError("hypercube too large to enumerate")
        for code in range(2 ** self.V):
            b = np.array([(code >> i) & 1 for i in range(self.V)])
            yield b, self.beta_for(b)


def build_worst_case_X0(d0: int, d: int, n: int, h: float, kappa: int | None = None) -> WorstCaseDesign:
    """kappa copies of w_1..w_{V-1}, the remaining n - (V-1) kappa rows equal to w_V."""
    W = build_shatter_matrix_W(d0, d)
    V = W.shape[0]
    if V < 2:
        raise ContractViolation("need V = d0 log2(2d/d0) >= 2")
    if V > n:
        raise ContractViolation(f"V = {V} exceeds n = {n}")
    margin_logit(h)
    cap = n // (V - 1)
    kappa = cap if kappa is None else int(kappa)
    if not 1 <= kappa <= cap:
        raise ContractViolation(f"kappa must lie in [1, {cap}]")
    row_of = np.concatenate([np.repeat(np.arange(V - 1), kappa), np.full(n - (V - 1) * kappa, V - 1)])
    X = DesignMatrix.from_array(W[row_of])
    return WorstCaseDesign(X, W, d0, float(h), kappa, row_of)


def orthogonal_design(n: int, d: int) -> np.ndarray:
    """Rows cycle through the standard basis e_1..e_d (orthogonal columns)."""
    if n < d:
        raise ContractViolation("orthogonal design needs n >= d")
    return np.eye(d)[np.arange(n) % d]


# ---------------------------------------------------------------- normalization

def unit_normalize_columns(X) -> tuple[DesignMatrix, np.ndarray]:
    """Scale columns to unit Euclidean norm; returns (design, column norms).

    Coefficients fitted on the normalized design map back as beta / norms.
    """
    X = as_array(X)
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0):
        raise ContractViolation(f"zero column(s) {np.flatnonzero(norms == 0).tolist()} cannot be normalized")
    Z = X / norms
    return DesignMatrix(np.ascontiguousarray(Z), DesignMatrix.from_array(Z).rank_r, True), norms


def back_map(beta_normalized, norms) -> np.ndarray:
    return np.asarray(beta_normalized, dtype=float) / np.asarray(norms, dtype=float)


# ---------------------------------------------------------------- WRE cone

@dataclass(frozen=True)
class WreParams:
    d0: int
    c0: float

    def __post_init__(self):
        if self.d0 < 1:
            raise ContractViolation("d0 must be >= 1")
        if not self.c0 > 1:
            raise ContractViolation("c0 must exceed 1")


def _cone_weights(d: int) -> np.ndarray:
    return np.sqrt(np.log(2.0 * d / np.arange(1, d + 1)))


def cone_slack(u, params: WreParams) -> float:
    """RHS - LHS of the cone inequality (>= 0 inside the cone); scale-equivariant."""
    u = np.asarray(u, dtype=float)
    d = u.shape[0]
    w = _cone_weights(d)
    lhs = float(np.sum(w * np.sort(np.abs(u))[::-1]))
    rhs = (1 + params.c0) * float(np.linalg.norm(u)) * math.sqrt(float(np.sum(w[: min(params.d0, d)] ** 2)))
    return rhs - lhs


def in_cone(u, params: WreParams, slack: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        return False
    return cone_slack(u / np.linalg.norm(u), params) >= -slack


@dataclass(frozen=True, eq=False)
class KappaEstimate:
    value: float
    u: np.ndarray
    starts: int
    note: str = "estimate (upper bound on the cone minimum)"


def _ratio(X, u) -> float:
    return float(np.linalg.norm(X @ u) / np.linalg.norm(u))


def _cone_descent(X, G, u, params, steps: int = 200) -> tuple[np.ndarray, float]:
    """Feasible-direction descent of ||Xu||^2 / ||u||^2 that never leaves the cone."""
    u = u / np.linalg.norm(u)
    f = float(u @ G @ u)
    lr = 0.5
    for _ in range(steps):
        g = 2.0 * (G @ u - f * u)
        if np.linalg.norm(g) < 1e-12:
            break
        moved = False
        step = lr
        for _ in range(30):
            v = u - step * g
            nv = np.linalg.norm(v)
            if nv > 0:
                v = v / nv
                fv = float(v @ G @ v)
                if fv < f and in_cone(v, params, slack=0.0):
                    u, f, moved = v, fv, True
                    break
            step *= 0.5
        if not moved:
            break
        lr = min(2.0 * step, 1.0)
    return u, math.sqrt(max(f, 0.0))


def estimate_kappa_wre(X, params: WreParams, budget: int = 10_000, seed: int = 0,
                       refine: int = 20) -> KappaEstimate:
    """Budgeted search for min ||Xu|| / ||u|| over the WRE cone.

    Candidates: the bottom eigenvectors of X^T X, all e_i - e_j differences
    (for small d) and ``budget`` random directions (sparse ones always lie in
    the cone).  The ``refine`` best are polished by cone-feasible descent.
    The result is an upper bound on the true cone minimum.
    """
    X = as_array(X)
    n, d = X.shape
    G = X.T @ X
    rng = np.random.default_rng(seed)
    cands = []
    evals, evecs = np.linalg.eigh(G)
    for i in range(min(d, 5)):
        for s in (1.0, -1.0):
            cands.append(s * evecs[:, i])
    if d <= 200:
        for i in range(d):
            for j in range(i + 1, d):
                u = np.zeros(d)
                u[i], u[j] = 1.0, -1.0
                cands.append(u)
    sizes = rng.integers(1, max(2, min(d, 2 * params.d0 + 2)) + 1, size=budget)
    for s in sizes:
        u = np.zeros(d)
        idx = rng.choice(d, size=min(int(s), d), replace=False)
        u[idx] = rng.standard_normal(idx.size)
        cands.append(u)
    C = np.array([u for u in cands if np.any(u) and in_cone(u, params)])
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    ratios = np.linalg.norm(C @ X.T, axis=1)
    order = np.argsort(ratios, kind="stable")
    best_u, best = C[order[0]], float(ratios[order[0]])
    for i in order[:refine]:
        u, r = _cone_descent(X, G, C[i], params)
        if r < best:
            best_u, best = u, r
    return KappaEstimate(best, best_u, len(C))


# ---------------------------------------------------------------- random designs

@dataclass(frozen=True)
class RandomDesignSpec:
    """Row distribution for random designs.

    ``margin_alpha`` (with ``margin_direction``) switches on a low-noise
    construction: the component along the direction has |t| distributed as
    r U^(1/alpha), r = 1/sqrt(2), so P(|beta^T X| <= s) grows like s^alpha.
    """

    distribution: str
    d: int
    rescale_to_unit_ball: bool = True
    margin_alpha: float | None = None
    margin_direction: tuple = ()

    def __post_init__(self):
        if self.distribution not in RANDOM_DISTRIBUTIONS:
            raise ContractViolation(f"unknown distribution {self.distribution!r}")
        if self.d < 1:
            raise ContractViolation("d must be >= 1")
        if self.margin_alpha is not None:
            if not self.margin_alpha > 0:
                raise ContractViolation("margin_alpha must be positive")
            if len(self.margin_direction) != self.d:
                raise ContractViolation("margin_direction must have length d")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _draw_rows(self, n, rng)


def _draw_base(dist: str, d: int, n: int, rescale: bool, rng) -> np.ndarray:
    if dist == "rademacher_rescaled":
        Z = rng.choice(np.array([-1.0, 1.0]), size=(n, d))
        return Z / math.sqrt(d) if rescale else Z
    if dist == "gaussian_rescaled":
        Z = rng.standard_normal((n, d))
        if not rescale:
            return Z
        Z /= math.sqrt(d)
        norms = np.linalg.norm(Z, axis=1)
        return Z / np.maximum(norms, 1.0)[:, None]
    Z = rng.standard_normal((n, d))
    Z /= np.linalg.norm(Z, axis=1)[:, None]
    return Z * rng.random(n)[:, None] ** (1.0 / d)


def _draw_rows(spec: RandomDesignSpec, n: int, rng) -> np.ndarray:
    if spec.margin_alpha is None:
        return _draw_base(spec.distribution, spec.d, n, spec.rescale_to_unit_ball, rng)
    u = np.asarray(spec.margin_direction, dtype=float)
    u = u / np.linalg.norm(u)
    Z = _draw_base(spec.distribution, spec.d, n, True, rng)
    Z = Z - np.outer(Z @ u, u)
    r = 1.0 / math.sqrt(2.0)
    t = r * rng.random(n) ** (1.0 / spec.margin_alpha) * rng.choice(np.array([-1.0, 1.0]), size=n)
    return r * Z + np.outer(t, u)


def sample_random_design(spec: RandomDesignSpec, n: int, rng_seed) -> DesignMatrix:
    if n < 1:
        raise ContractViolation("n must be >= 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return DesignMatrix.from_array(spec.sample(n, rng))


@dataclass(frozen=True, eq=False)
class MarginSample:
    y: np.ndarray
    p: np.ndarray
    min_margin: float
    h_grid: np.ndarray
    margin_fraction: np.ndarray


def sample_margin_response(X, beta, rng_seed=0, h_grid=None) -> MarginSample:
    """Y_i ~ Bin(1, p_i) plus margin statistics of p.

    ``margin_fraction[k]`` is the empirical P(|p - 1/2| <= h_grid[k]).
    """
    X = as_array(X)
    p = inv_logit(X @ np.asarray(beta, dtype=float))
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    y = (rng.random(p.shape[0]) < p).astype(float)
    h_grid = np.linspace(0.0, 0.5, 51) if h_grid is None else np.asarray(h_grid, dtype=float)
    dev = np.abs(p - 0.5)
    frac = np.array([np.mean(dev <= h) for h in h_grid]) if dev.size else np.zeros_like(h_grid)
    return MarginSample(y, p, float(dev.min()) if dev.size else 0.0, h_grid, frac)


# ---------------------------------------------------------------- CSV

def save_design_csv(path, X, feature_names=None) -> None:
    """Header row of feature names, then one row per observation (17 significant digits)."""
    X = as_array(X)
    names = feature_names or (X.feature_names if isinstance(X, DesignMatrix) else None) \
        or [f"x{j + 1}" for j in range(X.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in X:
            w.writerow([repr(float(v)) for v in row])


def save_response_csv(path, y) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["y"])
        for v in np.asarray(y):
            w.writerow([int(v)])


__all__ = [
    "build_shatter_matrix_W", "sign_block", "verify_shattering", "count_labelings", "labeling_table",
    "block_sign_vector", "margin_logit", "proof_kappa", "small_margin", "WorstCaseDesign",
    "build_worst_case_X0", "orthogonal_design", "unit_normalize_columns", "back_map", "WreParams",
    "cone_slack", "in_cone", "KappaEstimate", "estimate_kappa_wre", "RandomDesignSpec",
    "sample_random_design", "MarginSample", "sample_margin_response", "save_design_csv", "save_response_csv",
]
