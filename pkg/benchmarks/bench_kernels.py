"""Time the hot kernels under both backends (numba and plain numpy).

Each backend runs in its own interpreter because the choice is fixed at
import time by SPARSELOGIT_DISABLE_NUMBA.  Numba compilation is excluded by
a warm-up call.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, time, sys
import numpy as np
from sparselogit import backend
from sparselogit.model_core import LOGISTIC
from sparselogit.mle_irls import fit_restricted_mle
from sparselogit.model_selection import ComplexityPenalty, select_exhaustive
from sparselogit.slope_solver import build_schedule, fit_slope, prox_sorted_l1
from sparselogit.design_lab import build_shatter_matrix_W, count_labelings
import warnings
warnings.simplefilter("ignore")

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
X = rng.standard_normal((400, 8)) / np.sqrt(8)
y = (rng.random(400) < 1 / (1 + np.exp(-X[:, 0] * 3))).astype(float)
Z = X / np.linalg.norm(X, axis=0)
yp = rng.standard_normal(200)
lam = np.sort(rng.random(200))[::-1]
pen = ComplexityPenalty.fixed(1.0, X)
sched = build_schedule("slope_logistic", 8, 0.3)
W = build_shatter_matrix_W(2, 16)

cases = {
    "prox_sorted_l1 d=200 x100": lambda: [prox_sorted_l1(yp, lam) for _ in range(100)][-1],
    "irls n=400 |M|=8": lambda: fit_restricted_mle(LOGISTIC, X, y).beta,
    "exhaustive n=400 d=8": lambda: select_exhaustive(LOGISTIC, X, y, pen, 8).beta,
    "slope_apg n=400 d=8": lambda: fit_slope(LOGISTIC, Z, y, sched).beta,
    "labelings W(2,16)": lambda: np.array([count_labelings(W, 2)], dtype=float),
}
out = {"backend": backend(), "times": {}, "values": {}}
for name, fn in cases.items():
    v = fn()
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    out["times"][name] = sorted(ts)[len(ts) // 2]
    out["values"][name] = np.asarray(v, dtype=float).tolist()
print(json.dumps(out))
"""


def run_backend(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env["SPARSELOGIT_DISABLE_NUMBA"] = "1" if disable else "0"
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    fast = run_backend(False, args.repeat)
    slow = run_backend(True, args.repeat)
    print(f"{'kernel':32s} {fast['backend']:>12s} {slow['backend']:>12s} {'speedup':>8s}  max|diff|")
    for name in fast["times"]:
        a, b = fast["times"][name], slow["times"][name]
        va, vb = fast["values"][name], slow["values"][name]
        diff = max(abs(x - z) for x, z in zip(va, vb)) if va else 0.0
        print(f"{name:32s} {a * 1e3:10.3f}ms {b * 1e3:10.3f}ms {b / a:8.1f}x  {diff:.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
