"""Independent reference computations used by the tests.

Nothing here calls into the package's envelope or allocation code; each
routine solves the same problem by a different route (dense grids, generic
hull construction, conjugate duality or plain bisection).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize_scalar

LN2 = math.log(2.0)


def bisect(f, lo, hi, rtol=1e-13, max_iter=2000):
    """Root of an increasing function by plain bisection."""
    flo = f(lo)
    assert flo < 0 < f(hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * abs(hi):
            break
    return 0.5 * (lo + hi)


def lower_hull(points):
    """Andrew's monotone chain, lower half; collinear middle points dropped."""
    pts = sorted(set(points))
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def exp_cost(mu, w, h, x):
    # tiny time shares push the rate off the float range; inf is the right cost there
    with np.errstate(over="ignore"):
        return mu / h * np.expm1(LN2 * np.asarray(x, dtype=float) / w)


def grid_envelope(params, r_max, n=200001):
    """Convex envelope of ``min_k f_k`` from the lower hull of a dense grid.

    ``params`` is a list of ``(mu, w, h)``. Returns a callable.
    """
    x = np.linspace(0.0, r_max, n)
    y = np.min([exp_cost(mu, w, h, x) for mu, w, h in params], axis=0)
    hull = lower_hull(list(zip(x.tolist(), y.tolist())))
    hx = np.array([p[0] for p in hull])
    hy = np.array([p[1] for p in hull])
    return lambda r: float(np.interp(r, hx, hy))


def conjugate_envelope(params, R):
    """Envelope value ``sup_s (s R - max_k f_k^*(s))`` by 1-D maximization."""

    def conj(s):
        best = 0.0
        for mu, w, h in params:
            x = w * math.log2(s * w * h / (LN2 * mu))
            if x > 0:
                best = max(best, s * x - float(exp_cost(mu, w, h, x)))
        return best

    res = minimize_scalar(
        lambda y: -(math.exp(y) * R - conj(math.exp(y))),
        bounds=(-40.0, 80.0),
        method="bounded",
        options={"xatol": 1e-13, "maxiter": 2000},
    )
    return -res.fun


def upsilon(modes, h, r):
    """Piecewise-linear AMC power with ``inf`` above the top mode."""
    rho = np.concatenate(([0.0], [m[0] for m in modes]))
    p = np.concatenate(([0.0], [m[1] for m in modes]))
    r = np.asarray(r, dtype=float)
    out = np.interp(r, rho, p) / h
    return np.where(r > rho[-1] * (1 + 1e-12), np.inf, out)


def brute_reward_state(cost_fns, w, R, n=401):
    """Minimum of ``sum_k tau_k c_k(r_k)`` with ``sum_k w_k tau_k r_k = R`` for two users.

    ``tau`` runs over ``n`` points of [0, 1], ``w_1 tau r_1`` over ``n``
    points of [0, R] and user 2 carries the remainder in the rest of the
    block, so single-user allocations sit exactly on the grid.
    """
    best = math.inf
    for tau in np.linspace(0.0, 1.0, n):
        share = np.linspace(0.0, R, n)  # reward carried by user 1
        if tau == 0.0:
            share = np.array([0.0])
        c1 = np.zeros_like(share) if tau == 0.0 else tau * cost_fns[0](share / (w[0] * tau))
        rest = R - share
        if tau == 1.0:
            c2 = np.where(rest <= 1e-15 * max(R, 1.0), 0.0, np.inf)
        else:
            c2 = (1.0 - tau) * cost_fns[1](rest / (w[1] * (1.0 - tau)))
        total = c1 + c2
        best = min(best, float(np.min(total)))
    return best


def brute_lagrangian_state(cost_fns, lam, r_max, n=401, zoom=3):
    """Minimum of ``sum_k tau_k (c_k(r_k) - lam_k r_k)`` over ``tau`` and rates.

    Rate grids of ``n`` points are refined ``zoom`` times around the best
    point. Returns ``(value, user)`` with ``user=None`` for an idle block.
    """
    best_val, best_user = 0.0, None
    for k, (fn, lk) in enumerate(zip(cost_fns, lam)):
        lo, hi = 0.0, r_max[k]
        val = math.inf
        for _ in range(zoom + 1):
            r = np.linspace(lo, hi, n)
            v = fn(r) - lk * r
            i = int(np.argmin(v))
            val = min(val, float(v[i]))
            step = (hi - lo) / (n - 1)
            lo, hi = max(r[i] - 2 * step, 0.0), min(r[i] + 2 * step, r_max[k])
        # tau in [0, 1] enters linearly, so the grid optimum sits at an end
        for tau in np.linspace(0.0, 1.0, n)[[0, -1]]:
            if tau * val < best_val - 1e-15 * abs(best_val):
                best_val, best_user = tau * val, k
    return best_val, best_user
