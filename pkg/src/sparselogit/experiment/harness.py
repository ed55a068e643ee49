"""Monte Carlo harness: planted models, replicated fits, risk aggregation.

Seeding: every random draw comes from ``SeedSequence([seed, tag, cell, rep])``
so a replicate's stream depends only on the master seed and its own
coordinates.  Reports are therefore identical for any worker count.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from ..design_lab import (RandomDesignSpec, WreParams, back_map, build_worst_case_X0, estimate_kappa_wre,
                          orthogonal_design, proof_kappa, small_margin, unit_normalize_columns)
from ..errors import ConfigError, ContractViolation
from ..model_core import LOGISTIC, as_array, glm_kl, inv_logit
from ..model_selection import ComplexityPenalty, default_c, default_max_size, select_exhaustive, select_forward
from ..risk_eval import LinearClassifier, classify, excess_risk_fixed
from ..slope_solver import SLOPE_LOGISTIC_FLOOR, BelowFloorWarning, build_schedule, fit_lasso, fit_slope
from .config import ExperimentConfig
from .data import load_csv_dataset

TAG_REP, TAG_DESIGN, TAG_MC, TAG_PAIR, TAG_SPLIT, TAG_CV = range(6)
FAILURE_FLAG_FRACTION = 0.10
EXHAUSTIVE_MAX_D = 20
EXHAUSTIVE_MAX_SIZE = 8
CV_FOLDS = 5
CHUNK = 25
TRANSITION_SLOPE = -0.75
ENVELOPE_SAFETY = 0.5


def rng_for(seed: int, tag: int, cell: int, rep: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag, cell, rep]))


# ---------------------------------------------------------------- grid

@dataclass(frozen=True)
class Cell:
    index: int
    n: int
    d: int
    d0: int
    h: float
    alpha: float


def grid_cells(cfg: ExperimentConfig) -> list[Cell]:
    """Cells in the order d, d0, h, alpha, n (n varies fastest); d0 > d is skipped."""
    if cfg.scenario == "csv_benchmark":
        return [Cell(0, 0, 0, 0, 0.0, 0.0)]
    out = []
    for d, d0, h, a, n in product(cfg.d_grid, cfg.d0_grid, cfg.h_grid, cfg.alpha_grid, cfg.n_grid):
        if d0 > d:
            continue
        out.append(Cell(len(out), int(n), int(d), int(d0), float(h), float(a)))
    if not out:
        raise ConfigError("the grid has no admissible cell (every d0 exceeds d)")
    return out


# ---------------------------------------------------------------- estimators

@dataclass(frozen=True)
class Tuning:
    penalty_c: float
    slope_a: float
    c0: float
    lasso_lambda: float | None
    max_size: int | None
    random_design: bool = False

    @classmethod
    def from_config(cls, cfg: ExperimentConfig, random_design: bool = False) -> "Tuning":
        c = default_c(cfg.delta) if cfg.penalty_c is None else float(cfg.penalty_c)
        a = SLOPE_LOGISTIC_FLOOR if cfg.slope_a is None else float(cfg.slope_a)
        return cls(c, a, float(cfg.c0), cfg.lasso_lambda, cfg.max_size, random_design)

    def with_constant(self, estimator: str, value: float) -> "Tuning":
        if estimator in ("exhaustive", "forward"):
            return replace(self, penalty_c=float(value))
        if estimator == "slope":
            return replace(self, slope_a=float(value))
        if estimator == "lasso":
            return replace(self, lasso_lambda=float(value))
        raise ConfigError(f"estimator {estimator!r} has no tuning constant")


def fit_estimator(name: str, X, y, tun: Tuning, beta_true=None) -> tuple[np.ndarray, dict]:
    """Fit one estimator and return ``(beta on the original column scale, info)``."""
    X = as_array(X)
    n, d = X.shape
    info = {}
    if name == "oracle":
        if beta_true is None:
            raise ContractViolation("the oracle estimator needs the true beta")
        return np.asarray(beta_true, dtype=float), info
    if name in ("exhaustive", "forward"):
        pen = ComplexityPenalty.random(tun.penalty_c, n, d) if tun.random_design else \
            ComplexityPenalty.fixed(tun.penalty_c, X)
        k = default_max_size(X) if tun.max_size is None else int(tun.max_size)
        if name == "exhaustive" and (d > EXHAUSTIVE_MAX_D or k > EXHAUSTIVE_MAX_SIZE):
            if tun.max_size is None and d <= EXHAUSTIVE_MAX_D:
                k = EXHAUSTIVE_MAX_SIZE
            else:
                name = "forward"
                info["fallback"] = "forward"
        sel = (select_exhaustive if name == "exhaustive" else select_forward)(LOGISTIC, X, y, pen, k)
        info["separated"] = bool(sel.fit.diagnostics.separation_detected) if sel.fit.diagnostics else False
        return sel.beta.copy(), info
    if name in ("slope", "lasso"):
        Z, norms = unit_normalize_columns(X)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BelowFloorWarning)
            sched = build_schedule("slope_logistic", d, tun.slope_a, tun.c0)
        info["below_floor"] = sched.below_floor
        if name == "slope":
            fit = fit_slope(LOGISTIC, Z, y, sched)
        else:
            lam = float(sched.lambdas[0]) if tun.lasso_lambda is None else float(tun.lasso_lambda)
            fit = fit_lasso(LOGISTIC, Z, y, lam)
        info["converged"] = fit.converged
        return back_map(fit.beta, norms), info
    raise ConfigError(f"unknown estimator {name!r}")


# ---------------------------------------------------------------- cross-validation

@dataclass(frozen=True, eq=False)
class CvResult:
    folds: int
    candidate_grid: np.ndarray
    chosen: float
    cv_error_curve: np.ndarray
    skipped_folds: tuple = ()


def stratified_folds(y, k: int, rng: np.random.Generator) -> np.ndarray:
    """Fold label per observation; each class is shuffled and dealt round-robin."""
    y = np.asarray(y)
    fold = np.empty(y.shape[0], dtype=np.int64)
    offset = 0
    for cls in (0.0, 1.0):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.size)]
        fold[idx] = (np.arange(idx.size) + offset) % k
        offset += idx.size
    return fold


def cross_validate(X, y, estimator: str, grid, tuning: Tuning, seed: int = 0, folds: int = CV_FOLDS) -> CvResult:
    """Stratified k-fold choice of the estimator's tuning constant.

    The error curve is the mean validation misclassification over usable
    folds; a fold whose training part has a single class is skipped.  Ties go
    to the smallest candidate.
    """
    X = as_array(X)
    y = np.asarray(y, dtype=float)
    grid = np.sort(np.asarray(list(grid), dtype=float), kind="stable")
    if grid.size == 0:
        raise ContractViolation("candidate grid must be nonempty")
    if X.shape[0] < 10:
        raise ContractViolation("cross-validation needs n >= 10")
    fold = stratified_folds(y, folds, np.random.default_rng(np.random.SeedSequence([int(seed), TAG_CV])))
    errs = np.zeros(grid.size)
    used = 0
    skipped = []
    for f in range(folds):
        tr, va = fold != f, fold == f
        if np.unique(y[tr]).size < 2 or not np.any(va):
            skipped.append(f)
            continue
        used += 1
        for i, cand in enumerate(grid):
            beta, _ = fit_estimator(estimator, X[tr], y[tr], tuning.with_constant(estimator, cand))
            errs[i] += np.mean(classify(LinearClassifier(beta), X[va]) != y[va])
    curve = errs / used if used else np.full(grid.size, np.nan)
    chosen = float(grid[int(np.argmin(curve))]) if used else float(grid[0])
    return CvResult(folds, grid, chosen, curve, tuple(skipped))


# ---------------------------------------------------------------- planted models

def _local_scale(cell: Cell, kind: str) -> float:
    d, d0, n = cell.d, cell.d0, cell.n
    log_term = math.log(2 * d * math.e / d0) if kind == "slope" else math.log(d * math.e / d0)
    return math.sqrt(d0 * log_term / n)


def _sparse_direction(d: int, d0: int, rng) -> np.ndarray:
    beta = np.zeros(d)
    S = rng.choice(d, size=d0, replace=False)
    beta[S] = rng.choice(np.array([-1.0, 1.0]), size=d0)
    return beta


@dataclass
class CellSetup:
    X: np.ndarray | None = None
    beta: np.ndarray | None = None
    spec: RandomDesignSpec | None = None
    X_mc: np.ndarray | None = None
    design: object = None
    y_all: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


def setup_cell(cfg: ExperimentConfig, cell: Cell) -> CellSetup:
    rng = rng_for(cfg.seed, TAG_DESIGN, cell.index)
    sc = cfg.scenario
    if sc in ("rate_fixed", "rate_slope"):
        X = RandomDesignSpec(cfg.design, cell.d).sample(cell.n, rng)
        if sc == "rate_slope":
            X = unit_normalize_columns(X)[0].entries
        beta = _sparse_direction(cell.d, cell.d0, rng)
        rms = float(np.sqrt(np.mean((X @ beta) ** 2)))
        beta *= cfg.signal * _local_scale(cell, "slope" if sc == "rate_slope" else "fixed") / rms
        meta = {}
        if sc == "rate_slope":
            meta["kappa_wre"] = estimate_kappa_wre(X, WreParams(cell.d0, cfg.c0), cfg.kappa_budget,
                                                   seed=cfg.seed).value
        return CellSetup(X=X, beta=beta, meta=meta)
    if sc in ("rate_margin", "lower_bound_X0"):
        V = cell.d0 * round(math.log2(2 * cell.d / cell.d0))
        if cell.h > 0:
            h_eff, kappa = cell.h, proof_kappa(cell.h, cell.n, V)
        else:
            h_eff, kappa = small_margin(cell.n, V), cell.n // (V - 1)
        D = build_worst_case_X0(cell.d0, cell.d, cell.n, h_eff, kappa)
        return CellSetup(X=D.X.entries, design=D, meta={"h_eff": h_eff, "kappa": kappa})
    if sc == "random_design_rate":
        u = _sparse_direction(cell.d, cell.d0, rng)
        u /= np.linalg.norm(u)
        if cell.alpha > 0:
            spec = RandomDesignSpec(cfg.design, cell.d, True, cell.alpha, tuple(u))
            beta = cfg.signal * u
        else:
            spec = RandomDesignSpec(cfg.design, cell.d)
            pilot = spec.sample(10_000, rng)
            rms = float(np.sqrt(np.mean((pilot @ u) ** 2)))
            beta = cfg.signal * _local_scale(cell, "fixed") / rms * u
        X_mc = spec.sample(cfg.mc_n, rng_for(cfg.seed, TAG_MC, cell.index))
        return CellSetup(beta=beta, spec=spec, X_mc=X_mc)
    if sc == "csv_benchmark":
        X, y = load_csv_dataset(cfg.features_csv, cfg.response_csv)
        return CellSetup(X=X.entries, y_all=y, meta={"n": X.n, "d": X.d})
    raise ConfigError(f"unknown scenario {sc!r}")


# ---------------------------------------------------------------- replicates

def _fit_and_score(cfg, est, X, y, tun, beta_true, cell, rep, score):
    try:
        if cfg.tuning == "cv5" and est != "oracle":
            cv = cross_validate(X, y, est, cfg.cv_grid, tun, seed=_cv_seed(cfg.seed, cell.index, rep))
            tun = tun.with_constant(est, cv.chosen)
            chosen = cv.chosen
        else:
            chosen = math.nan
        beta, info = fit_estimator(est, X, y, tun, beta_true)
    except (ContractViolation, ArithmeticError, RuntimeError, ValueError) as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}
    rec = score(beta)
    rec["size"] = float(np.count_nonzero(beta))
    rec["chosen"] = chosen
    rec["below_floor"] = bool(info.get("below_floor", False))
    return rec


def _cv_seed(seed: int, cell: int, rep: int) -> int:
    return int(np.random.SeedSequence([int(seed), TAG_CV, cell, rep]).generate_state(1)[0])


def _fixed_score(X, p, beta_true):
    theta = X @ beta_true
    bayes = LinearClassifier(beta_true)

    def score(beta):
        return {"excess": excess_risk_fixed(LinearClassifier(beta), X, p, bayes),
                "kl": glm_kl(LOGISTIC, theta, X @ beta)}
    return score


def run_replicate(cfg: ExperimentConfig, cell: Cell, setup: CellSetup, rep: int) -> dict:
    """One replicate: draw data, fit every estimator, score against the truth."""
    rng = rng_for(cfg.seed, TAG_REP, cell.index, rep)
    sc = cfg.scenario
    tun = Tuning.from_config(cfg, random_design=(sc == "random_design_rate"))
    out = {}
    if sc in ("rate_fixed", "rate_slope"):
        X, beta = setup.X, setup.beta
        p = inv_logit(X @ beta)
        y = (rng.random(cell.n) < p).astype(float)
        for est in cfg.estimators:
            out[est] = _fit_and_score(cfg, est, X, y, tun, beta, cell, rep, _fixed_score(X, p, beta))
        return out
    if sc in ("rate_margin", "lower_bound_X0"):
        D = setup.design
        b = rng.integers(0, 2, size=D.V)
        beta = D.beta_for(b)
        X = setup.X
        p = inv_logit(X @ beta)
        y = (rng.random(cell.n) < p).astype(float)
        if sc == "lower_bound_X0":
            Xo = orthogonal_design(cell.n, cell.d)
            po = inv_logit(Xo @ beta)
            yo = (rng_for(cfg.seed, TAG_PAIR, cell.index, rep).random(cell.n) < po).astype(float)
        for est in cfg.estimators:
            rec = _fit_and_score(cfg, est, X, y, tun, beta, cell, rep, _fixed_score(X, p, beta))
            if sc == "lower_bound_X0" and "error" not in rec:
                orth = _fit_and_score(cfg, est, Xo, yo, tun, beta, cell, rep, _fixed_score(Xo, po, beta))
                if "error" in orth:
                    rec = orth
                else:
                    rec["excess_orth"] = orth["excess"]
                    rec["x0_harder"] = float(rec["excess"] >= orth["excess"])
            out[est] = rec
        return out
    if sc == "random_design_rate":
        beta = setup.beta
        X = setup.spec.sample(cell.n, rng)
        y = (rng.random(cell.n) < inv_logit(X @ beta)).astype(float)
        Xm = setup.X_mc
        theta_m = Xm @ beta
        pm = inv_logit(theta_m)
        bayes = classify(LinearClassifier(beta), Xm)

        def score(bh):
            vals = (classify(LinearClassifier(bh), Xm) != bayes) * np.abs(2 * pm - 1)
            return {"excess": float(vals.mean()), "kl": glm_kl(LOGISTIC, theta_m, Xm @ bh),
                    "excess_mc_se": float(vals.std(ddof=1) / math.sqrt(vals.size))}
        for est in cfg.estimators:
            out[est] = _fit_and_score(cfg, est, X, y, tun, beta, cell, rep, score)
        return out
    if sc == "csv_benchmark":
        X, y = setup.X, setup.y_all
        n = X.shape[0]
        perm = rng_for(cfg.seed, TAG_SPLIT, 0, rep).permutation(n)
        n_test = max(1, int(round(cfg.test_fraction * n)))
        te, tr = perm[:n_test], perm[n_test:]
        null_err = float(np.mean(y[te] != 1.0))

        def score(bh):
            err = float(np.mean(classify(LinearClassifier(bh), X[te]) != y[te]))
            return {"test_error": err, "null_error": null_err}
        for est in cfg.estimators:
            if est == "oracle":
                out[est] = {"error": "ConfigError: no oracle for observed data"}
                continue
            out[est] = _fit_and_score(cfg, est, X[tr], y[tr], tun, None, cell, rep, score)
        return out
    raise ConfigError(f"unknown scenario {sc!r}")


_SETUP_CACHE: dict = {}


def _run_chunk(cfg_dict: dict, cell_index: int, lo: int, hi: int):
    cfg = ExperimentConfig(**cfg_dict)
    cell = grid_cells(cfg)[cell_index]
    key = (repr(sorted(cfg_dict.items())), cell_index)
    if key not in _SETUP_CACHE:
        _SETUP_CACHE.clear()
        _SETUP_CACHE[key] = setup_cell(cfg, cell)
    setup = _SETUP_CACHE[key]
    return cell_index, lo, [run_replicate(cfg, cell, setup, r) for r in range(lo, hi)], setup.meta


def collect_replicates(cfg: ExperimentConfig, workers: int = 1):
    """Run all replicates; returns ``(cells, records[cell][rep], metas[cell])`` in grid order."""
    cells = grid_cells(cfg)
    tasks = [(c.index, lo, min(lo + CHUNK, cfg.replicates)) for c in cells for lo in range(0, cfg.replicates, CHUNK)]
    cfg_dict = {k: (tuple(v) if isinstance(v, list) else v) for k, v in cfg.to_dict().items()}
    if workers <= 1:
        results = [_run_chunk(cfg_dict, *t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_run_chunk, cfg_dict, *t) for t in tasks]
            results = [f.result() for f in futs]
    records = [[None] * cfg.replicates for _ in cells]
    metas = [{} for _ in cells]
    for ci, lo, recs, meta in sorted(results, key=lambda r: (r[0], r[1])):
        records[ci][lo:lo + len(recs)] = recs
        metas[ci] = meta
    return cells, records, metas


# ---------------------------------------------------------------- aggregation

@dataclass(frozen=True)
class RateFit:
    slope_loglog: float
    stderr: float
    r_squared: float
    points: int


def fit_rate(ns, values) -> RateFit:
    """Least squares of ln(value) on ln(n) over points with value > 0 (needs >= 3)."""
    ns = np.asarray(ns, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = np.isfinite(v) & (v > 0)
    if ok.sum() < 3:
        return RateFit(math.nan, math.nan, math.nan, int(ok.sum()))
    x, y = np.log(ns[ok]), np.log(v[ok])
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    m = x.size
    sxx = float(np.sum((x - x.mean()) ** 2))
    s2 = float(resid @ resid) / (m - 2) if m > 2 else math.nan
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else 1.0
    return RateFit(float(coef[1]), math.sqrt(s2 / sxx) if sxx > 0 else math.nan, r2, m)


ROW_COLUMNS = ("scenario", "estimator", "cell", "n", "d", "d0", "h", "alpha", "replicates", "failures", "flagged",
               "mean_excess", "se_excess", "mean_kl", "se_kl", "bartlett_ok", "bartlett_rep_fraction",
               "mean_size", "h_eff", "kappa", "kappa_wre", "kl_scaled", "x0_harder_fraction",
               "mean_excess_orth", "mean_test_error", "se_test_error", "null_error", "below_floor")


def _mean_se(vals) -> tuple[float, float]:
    v = np.asarray(vals, dtype=float)
    if v.size == 0:
        return math.nan, math.nan
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.nan
    return float(v.mean()), se


@dataclass(eq=False)
class ExperimentReport:
    scenario: str
    config: dict
    rows: list
    rate_fits: list
    summary: dict

    def row_for(self, estimator: str, **coords) -> dict:
        for r in self.rows:
            if r["estimator"] == estimator and all(r[k] == v for k, v in coords.items()):
                return r
        raise KeyError((estimator, coords))

    def rate_fit(self, estimator: str, **coords) -> dict:
        for r in self.rate_fits:
            if r["estimator"] == estimator and all(r[k] == v for k, v in coords.items()):
                return r
        raise KeyError((estimator, coords))


def aggregate(cfg: ExperimentConfig, cells, records, metas) -> ExperimentReport:
    rows = []
    for cell in cells:
        meta = metas[cell.index]
        for est in cfg.estimators:
            recs = [records[cell.index][r][est] for r in range(cfg.replicates)]
            good = [r for r in recs if "error" not in r]
            fails = len(recs) - len(good)
            row = {k: math.nan for k in ROW_COLUMNS}
            row.update(scenario=cfg.scenario, estimator=est, cell=cell.index, n=cell.n, d=cell.d, d0=cell.d0,
                       h=cell.h, alpha=cell.alpha, replicates=cfg.replicates, failures=fails,
                       flagged=fails > FAILURE_FLAG_FRACTION * len(recs))
            for k in ("n", "d", "h_eff", "kappa", "kappa_wre"):
                if k in meta:
                    row[k] = meta[k]
            row["below_floor"] = any(r.get("below_floor", False) for r in good)
            if good:
                row["mean_size"] = _mean_se([r["size"] for r in good])[0]
            if good and "excess" in good[0]:
                ex = [r["excess"] for r in good]
                kl = [r["kl"] for r in good]
                row["mean_excess"], row["se_excess"] = _mean_se(ex)
                row["mean_kl"], row["se_kl"] = _mean_se(kl)
                se = row["se_excess"] if math.isfinite(row["se_excess"]) else 0.0
                row["bartlett_ok"] = bool(row["mean_excess"] <= math.sqrt(2 * row["mean_kl"]) + 3 * se)
                # per replicate the bound is exact, so no slack is added
                slack = [r.get("excess_mc_se", 0.0) * 3 for r in good]
                row["bartlett_rep_fraction"] = float(np.mean(
                    [e <= math.sqrt(2 * k) + s + 1e-12 for e, k, s in zip(ex, kl, slack)]))
                row["kl_scaled"] = row["mean_kl"] * cell.n / (cell.d0 * math.log(2 * cell.d * math.e / cell.d0))
            if good and "x0_harder" in good[0]:
                row["x0_harder_fraction"] = _mean_se([r["x0_harder"] for r in good])[0]
                row["mean_excess_orth"] = _mean_se([r["excess_orth"] for r in good])[0]
            if good and "test_error" in good[0]:
                row["mean_test_error"], row["se_test_error"] = _mean_se([r["test_error"] for r in good])
                row["null_error"] = _mean_se([r["null_error"] for r in good])[0]
            rows.append(row)
    fits = _rate_fits(cfg, rows)
    return ExperimentReport(cfg.scenario, cfg.to_dict(), rows, fits, _summary(cfg, rows, fits))


def _curve_key(row) -> tuple:
    return (row["estimator"], row["d"], row["d0"], row["h"], row["alpha"])


def _rate_fits(cfg, rows) -> list:
    if cfg.scenario == "csv_benchmark":
        return []
    curves: dict = {}
    for r in rows:
        curves.setdefault(_curve_key(r), []).append(r)
    out = []
    for key, rs in curves.items():
        rs = sorted(rs, key=lambda r: r["n"])
        rf = fit_rate([r["n"] for r in rs], [r["mean_excess"] for r in rs])
        est, d, d0, h, a = key
        out.append({"estimator": est, "d": d, "d0": d0, "h": h, "alpha": a, "slope": rf.slope_loglog,
                    "stderr": rf.stderr, "r_squared": rf.r_squared, "points": rf.points})
    return out


def _summary(cfg, rows, fits) -> dict:
    s = {}
    scored = [r for r in rows if isinstance(r["bartlett_ok"], bool)]
    if scored:
        s["bartlett_cell_fraction"] = float(np.mean([r["bartlett_ok"] for r in scored]))
        s["bartlett_rep_fraction"] = float(np.mean([r["bartlett_rep_fraction"] for r in scored]))
    s["flagged_cells"] = int(sum(bool(r["flagged"]) for r in rows))
    s["below_floor"] = any(r["below_floor"] for r in rows)
    if cfg.scenario in ("rate_margin", "random_design_rate"):
        trans = {}
        by = {}
        for f in fits:
            by.setdefault((f["estimator"], f["d"], f["d0"]), []).append(f)
        for (est, d, d0), fs in sorted(by.items()):
            var = "h" if cfg.scenario == "rate_margin" else "alpha"
            fs = sorted(fs, key=lambda f: f[var])
            hit = [f[var] for f in fs if math.isfinite(f["slope"]) and f["slope"] <= TRANSITION_SLOPE]
            trans[f"{est}/d={d}/d0={d0}"] = hit[0] if hit else None
        s["transition_" + ("h" if cfg.scenario == "rate_margin" else "alpha")] = trans
    if cfg.scenario == "rate_slope":
        dev = {}
        curves: dict = {}
        for r in rows:
            curves.setdefault(_curve_key(r), []).append(r["kl_scaled"])
        for (est, d, d0, h, a), v in sorted(curves.items()):
            v = np.asarray(v, dtype=float)
            ok = v.size and np.all(np.isfinite(v)) and v.mean() > 0
            dev[f"{est}/d={d}/d0={d0}"] = float(np.max(np.abs(v / v.mean() - 1.0))) if ok else None
        s["kl_scaled_max_rel_dev"] = dev
    if cfg.scenario == "lower_bound_X0":
        env = {}
        curves: dict = {}
        for r in rows:
            curves.setdefault(_curve_key(r), []).append(r)
        for (est, d, d0, h, a), rs in sorted(curves.items()):
            rs = sorted(rs, key=lambda r: r["n"])
            rate = [math.sqrt(d0 * math.log(d * math.e / d0) / r["n"]) for r in rs]
            const = rs[0]["mean_excess"] / rate[0] if rate[0] > 0 else math.nan
            ok = [r["mean_excess"] + 3 * (r["se_excess"] if math.isfinite(r["se_excess"]) else 0.0)
                  >= ENVELOPE_SAFETY * const * q for r, q in zip(rs, rate)]
            env[f"{est}/d={d}/d0={d0}/h={h}"] = {"fit_const": const, "above_envelope": bool(all(ok))}
        s["envelope"] = env
        xs = [r["x0_harder_fraction"] for r in rows if r["estimator"] != "oracle" and math.isfinite(r["x0_harder_fraction"])]
        s["x0_harder_fraction"] = float(np.mean(xs)) if xs else None
    return s


# ---------------------------------------------------------------- entry points

def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    cells, records, metas = collect_replicates(cfg, workers)
    return aggregate(cfg, cells, records, metas)


def _require(cfg, allowed):
    if cfg.scenario not in allowed:
        raise ConfigError(f"scenario {cfg.scenario!r} not handled here (expected one of {allowed})")


def run_rate_study(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    _require(cfg, ("rate_fixed", "rate_slope"))
    return run_experiment(cfg, workers)


def run_margin_study(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    _require(cfg, ("rate_margin", "random_design_rate"))
    return run_experiment(cfg, workers)


def run_lower_bound_study(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    _require(cfg, ("lower_bound_X0",))
    return run_experiment(cfg, workers)
