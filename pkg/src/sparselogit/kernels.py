"""Hot numeric kernels.

Every function here is plain numpy + loops so that the same source runs
either compiled by numba or interpreted, depending on
``SPARSELOGIT_DISABLE_NUMBA`` (see :mod:`sparselogit._accel`).  Inputs must be
C-contiguous float64 arrays; the public wrappers in the other modules take
care of that.

Family codes: ``0`` = logistic (b(t) = log(1 + e^t)), ``1`` = gaussian
(b(t) = t^2 / 2).
"""

from __future__ import annotations

import numpy as np

from ._accel import jit

LOGISTIC = 0
GAUSSIAN = 1

# IRLS exit codes
IRLS_CONVERGED = 0
IRLS_MAX_ITER = 1
IRLS_DIVERGING = 2
IRLS_STALLED = 3
IRLS_BOUNDARY = 4


@jit
def softplus(t):
    # max(t, 0) + log(1 + e^{-|t|}) never overflows
    return np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))


@jit
def expit(t):
    out = np.empty_like(t)
    for i in range(t.shape[0]):
        v = t[i]
        if v >= 0.0:
            out[i] = 1.0 / (1.0 + np.exp(-v))
        else:
            e = np.exp(v)
            out[i] = e / (1.0 + e)
    return out


@jit
def cumulant(theta, family):
    if family == LOGISTIC:
        return softplus(theta)
    return 0.5 * theta * theta


@jit
def mean_fn(theta, family):
    if family == LOGISTIC:
        return expit(theta)
    return theta.copy()


@jit
def variance_fn(theta, family):
    if family == LOGISTIC:
        mu = expit(theta)
        return mu * (1.0 - mu)
    return np.ones_like(theta)


@jit
def neg_loglik(theta, y, family):
    """sum_i b(theta_i) - y_i theta_i (scale a not applied)."""
    return np.sum(cumulant(theta, family) - y * theta)


@jit
def loglik_gain(theta, dtheta, y, mu, family):
    """loglik(theta + dtheta) - loglik(theta), accurate relative to |dtheta|.

    Differencing two loglik totals loses everything below eps |loglik|; the
    termwise form keeps Newton steps near the optimum comparable.
    """
    total = 0.0
    for i in range(theta.shape[0]):
        t = dtheta[i]
        if family == LOGISTIC:
            # b(th + t) - b(th) = log1p(p (e^t - 1)), or the mirrored form for t > 0
            if t <= 0.0:
                db = np.log1p(mu[i] * np.expm1(t))
            else:
                db = t + np.log1p((1.0 - mu[i]) * np.expm1(-t))
        else:
            db = theta[i] * t + 0.5 * t * t
        total += y[i] * t - db
    return total


@jit
def irls_newton(X, y, family, max_iter, grad_tol, halving_max, box_c0, sep_norm):
    """Damped Newton (IRLS) ascent on the log-likelihood over the columns of X.

    ``box_c0 <= 0`` disables the |theta_i| <= box_c0 constraint.  A step is
    accepted once its (accurately computed) gain is nonnegative.  Returns
    ``(beta, theta, iterations, grad_inf_norm, status, boundary_hit, trace)``
    where ``trace[k]`` is the log-likelihood after ``k`` accepted steps.
    """
    n, k = X.shape
    beta = np.zeros(k)
    theta = np.zeros(n)
    trace = np.full(max_iter + 1, np.nan)
    ll = -neg_loglik(theta, y, family)
    trace[0] = ll
    status = IRLS_MAX_ITER
    boundary = False
    it = 0
    while it < max_iter:
        mu = mean_fn(theta, family)
        w = variance_fn(theta, family)
        grad = X.T @ (y - mu)
        if np.max(np.abs(grad)) <= grad_tol:
            status = IRLS_CONVERGED
            break
        H = (X * w.reshape((n, 1))).T @ X
        delta = np.linalg.solve(H, grad)
        xd = X @ delta
        step = 1.0
        if box_c0 > 0.0:
            tmax = np.inf
            for i in range(n):
                if xd[i] > 0.0:
                    lim = (box_c0 - theta[i]) / xd[i]
                elif xd[i] < 0.0:
                    lim = (-box_c0 - theta[i]) / xd[i]
                else:
                    continue
                if lim < tmax:
                    tmax = lim
            if tmax < 1.0:
                step = max(tmax, 0.0)
                boundary = True
        accepted = False
        gain = 0.0
        for _ in range(halving_max + 1):
            gain = loglik_gain(theta, step * xd, y, mu, family)
            if gain >= 0.0:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            status = IRLS_STALLED
            break
        beta = beta + step * delta
        theta = theta + step * xd
        ll = ll + gain
        it += 1
        trace[it] = ll
        bnorm = np.sqrt(np.sum(beta * beta))
        if boundary and step * np.sqrt(np.sum(delta * delta)) <= 1e-12 * (1.0 + bnorm):
            status = IRLS_BOUNDARY
            break
        if bnorm > sep_norm:
            status = IRLS_DIVERGING
            break
    grad = X.T @ (y - mean_fn(theta, family))
    gmax = np.max(np.abs(grad)) if k > 0 else 0.0
    if status == IRLS_MAX_ITER and gmax <= grad_tol:
        status = IRLS_CONVERGED
    return beta, theta, it, gmax, status, boundary, trace[: it + 1]


@jit
def prox_sorted_l1(y, lam):
    """argmin_b 0.5 ||b - y||^2 + sum_j lam_j |b|_(j) for nonincreasing lam >= 0.

    Sort |y| descending, subtract lam, then pool adjacent violators of the
    nonincreasing constraint (stack-based), clip at zero, undo the sort and
    restore signs.
    """
    d = y.shape[0]
    sign = np.sign(y)
    a = np.abs(y)
    order = np.argsort(-a, kind="mergesort")
    start = np.empty(d, np.int64)
    end = np.empty(d, np.int64)
    total = np.empty(d)
    level = np.empty(d)
    top = 0
    for i in range(d):
        start[top] = i
        end[top] = i
        total[top] = a[order[i]] - lam[i]
        level[top] = total[top]
        while top > 0 and level[top - 1] <= level[top]:
            top -= 1
            end[top] = i
            total[top] += total[top + 1]
            level[top] = total[top] / (i - start[top] + 1)
        top += 1
    out = np.empty(d)
    for b in range(top):
        v = level[b]
        if v < 0.0:
            v = 0.0
        for i in range(start[b], end[b] + 1):
            out[order[i]] = v
    return out * sign


@jit
def sorted_l1_norm(beta, lam):
    a = np.sort(np.abs(beta))[::-1]
    return np.sum(lam * a)


@jit
def slope_apg(X, y, lam, family, L0, max_iter, obj_tol, patience, backtracking, restart, beta0):
    """Monotone accelerated proximal gradient for  f(beta) + sum_j lam_j |beta|_(j).

    f is the negative log-likelihood of ``family``.  A candidate that raises
    the objective is rejected (the iterate stays put) and, with ``restart``,
    the momentum is reset.  Stops after ``patience`` consecutive accepted
    steps with relative objective change below ``obj_tol``; a rejected plain
    step from the current iterate also counts towards ``patience``.

    Returns ``(beta, iterations, converged, final_L, objective_trace)``.
    """
    x = beta0.copy()
    Fx = neg_loglik(X @ x, y, family) + sorted_l1_norm(x, lam)
    z = x.copy()
    t = 1.0
    L = L0
    trace = np.empty(max_iter + 1)
    trace[0] = Fx
    small = 0
    converged = False
    at_x = True
    it = 0
    while it < max_iter:
        theta_z = X @ z
        fz = neg_loglik(theta_z, y, family)
        gz = X.T @ (mean_fn(theta_z, family) - y)
        while True:
            cand = prox_sorted_l1(z - gz / L, lam / L)
            diff = cand - z
            fc = neg_loglik(X @ cand, y, family)
            if not backtracking:
                break
            if fc <= fz + np.dot(gz, diff) + 0.5 * L * np.dot(diff, diff) + 1e-12 * max(1.0, abs(fz)):
                break
            L *= 2.0
        Fc = fc + sorted_l1_norm(cand, lam)
        it += 1
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        if Fc <= Fx:
            rel = (Fx - Fc) / max(1.0, abs(Fc))
            z = cand + ((t - 1.0) / t_new) * (cand - x)
            x = cand
            Fx = Fc
            t = t_new
            at_x = False
            if rel < obj_tol:
                small += 1
            else:
                small = 0
        elif at_x:
            # a plain prox-gradient step from x cannot ascend beyond rounding:
            # x is stationary to working precision
            small += 1
        elif restart:
            z = x.copy()
            t = 1.0
            at_x = True
        else:
            z = x + (t / t_new) * (cand - x)
            t = t_new
        trace[it] = Fx
        if small >= patience:
            converged = True
            break
    return x, it, converged, L, trace[: it + 1]


@jit
def sparse_sign_labelings(W, d0):
    """Labelings of the rows of W realised by vectors with one +-1 entry per block.

    Columns are split into ``d0`` consecutive blocks of equal width.  Returns a
    boolean table ``seen`` of length ``2**rows``; bit ``r`` of an index is the
    label I{(W beta)_r >= 0} of row ``r``.
    """
    rows, d = W.shape
    m = d // d0
    radix = 2 * m
    total = 1
    for _ in range(d0):
        total *= radix
    seen = np.zeros(1 << rows, dtype=np.bool_)
    digits = np.zeros(d0, np.int64)
    for _ in range(total):
        theta = np.zeros(rows)
        for g in range(d0):
            dg = digits[g]
            col = g * m + dg // 2
            sgn = 1.0 if dg % 2 == 0 else -1.0
            for r in range(rows):
                theta[r] += sgn * W[r, col]
        mask = 0
        for r in range(rows):
            if theta[r] >= 0.0:
                mask |= 1 << r
        seen[mask] = True
        g = 0
        while g < d0:
            digits[g] += 1
            if digits[g] < radix:
                break
            digits[g] = 0
            g += 1
    return seen
