"""Sparse logistic regression classifiers.

Complexity-penalized restricted MLE (exhaustive or forward search), the
logistic Slope estimator, worst-case design constructions, plug-in
misclassification risks and a seeded Monte Carlo harness.
"""

from ._accel import backend
from .errors import (ConfigError, ContractViolation, CsvFormatError, DegenerateModelError, EnumerationGuardError,
                     InfiniteDivergence, NonConvergenceError)
from .model_core import (LOGISTIC, CoefVector, DesignMatrix, FitResult, GlmFamily, bernoulli_hellinger_sq, glm_kl,
                         inv_logit, kl_divergence, linear_predictor, log_likelihood, prob_vector)
from .mle_irls import IrlsConfig, IrlsDiagnostics, criterion_value, fit_restricted_mle, is_separated
from .model_selection import ComplexityPenalty, SelectionResult, default_c, penalty_value, select_exhaustive, select_forward
from .slope_solver import (BelowFloorWarning, LambdaSchedule, SolverConfig, build_schedule, fit_lasso, fit_slope,
                           prox_sorted_l1, sorted_l1_norm)
from .design_lab import (KappaEstimate, RandomDesignSpec, WorstCaseDesign, WreParams, build_shatter_matrix_W,
                         build_worst_case_X0, estimate_kappa_wre, sample_margin_response, sample_random_design,
                         unit_normalize_columns, verify_shattering)
from .risk_eval import (LinearClassifier, RiskReport, bartlett_bound_check, bayes_risk_fixed, classify,
                        excess_risk_fixed, excess_risk_random_mc, vc_bounds)

__version__ = "0.1.0"
