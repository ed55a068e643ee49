"""The numba kernels and their plain-numpy fallbacks must agree.

The backend is fixed at import time, so each one runs in a fresh interpreter.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

SCRIPT = r"""
import json, warnings
import numpy as np
warnings.simplefilter("ignore")
from sparselogit import backend
from sparselogit import kernels
from sparselogit.model_core import LOGISTIC, GlmFamily
from sparselogit.mle_irls import fit_restricted_mle
from sparselogit.model_selection import ComplexityPenalty, select_exhaustive
from sparselogit.slope_solver import build_schedule, fit_slope, prox_sorted_l1
from sparselogit.design_lab import build_shatter_matrix_W, count_labelings

rng = np.random.default_rng(0)
X = rng.standard_normal((150, 6)) / np.sqrt(6)
y = (rng.random(150) < 1 / (1 + np.exp(-3 * X[:, 0]))).astype(float)
Z = X / np.linalg.norm(X, axis=0)
t = np.linspace(-40, 40, 81)
out = {
    "backend": backend(),
    "softplus": kernels.softplus(t).tolist(),
    "nll": float(kernels.neg_loglik(X @ np.ones(6), y, 0)),
    "mle": fit_restricted_mle(LOGISTIC, X, y).beta.tolist(),
    "gauss": fit_restricted_mle(GlmFamily.gaussian(), X, X @ np.arange(6.0)).beta.tolist(),
    "select": list(select_exhaustive(LOGISTIC, X, y, ComplexityPenalty.fixed(1.0, X), 6).model),
    "prox": prox_sorted_l1(rng.normal(0, 2, 50), np.sort(rng.random(50))[::-1]).tolist(),
    "slope": fit_slope(LOGISTIC, Z, y, build_schedule("slope_logistic", 6, 0.3)).beta.tolist(),
    "slope_obj": fit_slope(LOGISTIC, Z, y, build_schedule("slope_logistic", 6, 0.3)).objective,
    "labelings": count_labelings(build_shatter_matrix_W(2, 8), 2),
}
print(json.dumps(out))
"""


def run(disable: bool) -> dict:
    env = dict(os.environ, SPARSELOGIT_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


@pytest.fixture(scope="module")
def results():
    return run(False), run(True)


def test_backends_selected(results):
    fast, slow = results
    assert fast["backend"] == "numba"
    assert slow["backend"] == "numpy"


@pytest.mark.parametrize("key,tol", [("softplus", 1e-15), ("nll", 1e-12), ("mle", 1e-10), ("gauss", 1e-10),
                                     ("prox", 1e-12), ("slope_obj", 1e-9),
                                     ("slope", 1e-5)])
def test_numeric_agreement(results, key, tol):
    # Slope stops on a relative objective change, so its coefficients agree only to about sqrt(obj_tol)
    fast, slow = results
    np.testing.assert_allclose(fast[key], slow[key], rtol=tol, atol=tol)


def test_discrete_agreement(results):
    fast, slow = results
    assert fast["select"] == slow["select"]
    assert fast["labelings"] == slow["labelings"] == 64
