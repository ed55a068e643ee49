"""Independent reference computations shared by the unit and acceptance tests.

None of these call into the package's solvers.
"""

import math
from itertools import combinations, permutations

import numpy as np
from scipy.optimize import linprog, minimize


def expit(t):
    return 0.5 * (1.0 + np.tanh(0.5 * t))


def grid_oracle(X, y, half_width=6.0, coarse=121, refine=6):
    """Maximise the logistic log-likelihood over a box by a coarse grid plus local refinements."""
    k = X.shape[1]

    def ll(B):  # B: (m, k)
        T = B @ X.T
        return np.sum(y * T - np.logaddexp(0.0, T), axis=1)

    axes = [np.linspace(-half_width, half_width, coarse)] * k
    B = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, k)
    vals = ll(B)
    best = B[np.argmax(vals)]
    step = 2 * half_width / (coarse - 1)
    for _ in range(refine):
        axes = [np.linspace(b - step, b + step, 41) for b in best]
        B = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, k)
        vals = ll(B)
        best = B[np.argmax(vals)]
        step /= 10
    return best, float(vals.max())


def separated_lp(X, y):
    """True when some nonzero direction weakly separates the labels (bounded LP with a positive margin sum)."""
    s = 2 * y - 1
    A = -(s[:, None] * X)
    n, d = X.shape
    # maximise sum of margins subject to margins >= 0 and |b|_inf <= 1
    res = linprog(np.sum(A, axis=0), A_ub=A, b_ub=np.zeros(n), bounds=[(-1, 1)] * d, method="highs")
    return res.status == 0 and -res.fun > 1e-9


def nll_bfgs(X, y, M):
    """Restricted logistic negative log-likelihood minimum by BFGS."""
    if not M:
        return X.shape[0] * math.log(2)
    XM = X[:, list(M)]

    def f(b):
        t = XM @ b
        return np.sum(np.logaddexp(0.0, t) - y * t)

    def g(b):
        return XM.T @ (expit(XM @ b) - y)

    res = minimize(f, np.zeros(len(M)), jac=g, method="BFGS", options={"gtol": 1e-10, "maxiter": 10_000})
    return float(res.fun)


def enumeration_oracle(X, y, c):
    """Best (criterion, size, support) over all subsets with the two-clause fixed-design penalty."""
    d = X.shape[1]
    r = np.linalg.matrix_rank(X)
    best = None
    for k in range(0, d + 1):
        pen = 0.0 if k == 0 else (c * r if k == r else c * k * math.log(d * math.e / k))
        for M in combinations(range(d), k):
            key = (nll_bfgs(X, y, M) + pen, k, M)
            if best is None or key < best:
                best = key
    return best


def sorted_l1(b, lam):
    return float(np.sum(lam * np.sort(np.abs(b))[::-1]))


def prox_objective(b, y, lam, t):
    return 0.5 * float(np.sum((b - y) ** 2)) + t * sorted_l1(b, lam)


def prox_qp_oracle(y, lam, t):
    """Solve the sorted-L1 prox as a QP.

    With nonincreasing weights the sorted norm is the maximum over permutations
    of sum_j lam_j u_{sigma(j)}, u = |b|, so an epigraph variable s bounded
    below by every permutation gives an exact smooth reformulation.
    Variables are (b, u, s).
    """
    d = y.shape[0]
    perms = np.array(list(permutations(range(d))))
    P = np.zeros((len(perms), d))
    for i, p in enumerate(perms):
        P[i, p] = lam
    cons = [
        {"type": "ineq", "fun": lambda z: z[d:2 * d] - z[:d], "jac": lambda z: np.hstack([-np.eye(d), np.eye(d), np.zeros((d, 1))])},
        {"type": "ineq", "fun": lambda z: z[d:2 * d] + z[:d], "jac": lambda z: np.hstack([np.eye(d), np.eye(d), np.zeros((d, 1))])},
        {"type": "ineq", "fun": lambda z: z[2 * d] - P @ z[d:2 * d],
         "jac": lambda z: np.hstack([np.zeros((len(P), d)), -P, np.ones((len(P), 1))])},
    ]

    def f(z):
        return 0.5 * np.sum((z[:d] - y) ** 2) + t * z[2 * d]

    def g(z):
        return np.concatenate([z[:d] - y, np.zeros(d), [t]])

    z0 = np.concatenate([y, np.abs(y), [sorted_l1(y, lam)]])
    res = minimize(f, z0, jac=g, constraints=cons, method="SLSQP", options={"ftol": 1e-15, "maxiter": 1000})
    b = res.x[:d]
    return b, prox_objective(b, y, lam, t)
