"""Experiment configuration: a flat TOML file whose keys are the fields below."""

from __future__ import annotations

import dataclasses
import os
import sys
from dataclasses import dataclass

from ..errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SEED_ENV = "SPARSELOGIT_SEED"
SCENARIOS = ("rate_fixed", "rate_margin", "rate_slope", "lower_bound_X0", "random_design_rate", "csv_benchmark")
ESTIMATORS = ("exhaustive", "forward", "slope", "lasso", "oracle")
TUNINGS = ("theory_constants", "cv5")


@dataclass(frozen=True)
class ExperimentConfig:
    """One study.  The grid is the Cartesian product of the ``*_grid`` lists.

    Constants left as ``None`` fall back to the theoretical defaults
    (``default_c(delta)`` for the complexity penalty, the Slope floor for
    ``slope_a``).  ``signal`` sets the size of the true linear predictor; see
    the harness for its meaning in each scenario.
    """

    scenario: str
    n_grid: tuple = (100, 200, 400, 800)
    d_grid: tuple = (8,)
    d0_grid: tuple = (2,)
    h_grid: tuple = (0.0,)
    alpha_grid: tuple = (0.0,)
    estimators: tuple = ("exhaustive",)
    replicates: int = 200
    seed: int = 0
    tuning: str = "theory_constants"
    penalty_c: float | None = None
    delta: float = 0.05
    max_size: int | None = None
    slope_a: float | None = None
    c0: float = 3.0
    lasso_lambda: float | None = None
    design: str = "gaussian_rescaled"
    signal: float = 1.0
    mc_n: int = 20_000
    kappa_budget: int = 2000
    features_csv: str | None = None
    response_csv: str | None = None
    test_fraction: float = 0.2
    normalize: bool = True
    cv_grid: tuple = ()

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        for name in ("n_grid", "d_grid", "d0_grid", "h_grid", "alpha_grid", "estimators", "cv_grid"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.scenario != "csv_benchmark":
            for name in ("n_grid", "d_grid", "d0_grid", "h_grid", "alpha_grid"):
                if not getattr(self, name):
                    raise ConfigError(f"{name} must be nonempty")
        if not self.estimators or any(e not in ESTIMATORS for e in self.estimators):
            raise ConfigError(f"estimators must be a nonempty subset of {ESTIMATORS}")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.tuning not in TUNINGS:
            raise ConfigError(f"tuning must be one of {TUNINGS}")
        if any(h < 0 or h >= 0.5 for h in self.h_grid):
            raise ConfigError("h values must lie in [0, 1/2)")
        if any(a < 0 for a in self.alpha_grid):
            raise ConfigError("alpha values must be nonnegative")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if self.tuning == "cv5" and not self.cv_grid:
            raise ConfigError("tuning = 'cv5' needs a nonempty cv_grid")
        if self.scenario == "csv_benchmark" and not (self.features_csv and self.response_csv):
            raise ConfigError("csv_benchmark needs features_csv and response_csv")

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def config_from_dict(data: dict) -> ExperimentConfig:
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
    if "scenario" not in data:
        raise ConfigError("configuration must set 'scenario'")
    try:
        return ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    base = os.path.dirname(os.path.abspath(path))
    for key in ("features_csv", "response_csv"):
        if isinstance(data.get(key), str) and not os.path.isabs(data[key]):
            data[key] = os.path.join(base, data[key])
    return config_from_dict(data)


def resolve_seed(cfg: ExperimentConfig, cli_seed: int | None = None) -> ExperimentConfig:
    """Seed precedence: command line, then the environment variable, then the file."""
    if cli_seed is not None:
        return cfg.replace(seed=int(cli_seed))
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return cfg.replace(seed=int(env))
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from exc
    return cfg
