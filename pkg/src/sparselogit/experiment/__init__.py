"""Monte Carlo studies, cross-validation and dataset I/O."""

from .config import SEED_ENV, ExperimentConfig, config_from_dict, load_config, resolve_seed
from .data import load_csv_dataset, load_features_csv, load_response_csv
from .harness import (Cell, CvResult, ExperimentReport, RateFit, Tuning, cross_validate, fit_estimator, fit_rate,
                      grid_cells, run_experiment, run_lower_bound_study, run_margin_study, run_rate_study)
from .report import emit_report, report_payload

__all__ = [
    "SEED_ENV", "ExperimentConfig", "config_from_dict", "load_config", "resolve_seed", "load_csv_dataset",
    "load_features_csv", "load_response_csv", "Cell", "CvResult", "ExperimentReport", "RateFit", "Tuning",
    "cross_validate", "fit_estimator", "fit_rate", "grid_cells", "run_experiment", "run_lower_bound_study",
    "run_margin_study", "run_rate_study", "emit_report", "report_payload",
]
