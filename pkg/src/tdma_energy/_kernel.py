"""Vectorized per-state user/mode selection over a whole sample.

Given per-user marginal rewards ``levels[k]`` (``lam * w_k`` for the
weighted-sum problem, ``lam_k`` for individual rates), every user offers
candidate operating points ``(rate, cost)`` and the block goes to the
candidate minimizing ``cost - level * rate``. For two capacity-achieving
users this comparison is the sign test on the tangent equation; in general
it is the conjugate of the per-state envelope, so the chosen point is the
envelope point whose slope matches the water level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .costreward import LN2, TIE_RTOL, UserProfile


@dataclass
class Candidates:
    value: np.ndarray  # (N, P) cost - level * rate, +inf for unusable
    cost: np.ndarray  # (N, P) weighted power cost mu * power
    rate: np.ndarray  # (N, P)
    owner: np.ndarray  # (P,) user index
    mode: np.ndarray  # (P,) mode index, 1-based; 0 for continuous users


def _as_levels(levels, k: int) -> np.ndarray:
    lv = np.asarray(levels, dtype=float)
    if lv.ndim == 0:
        lv = np.full(k, float(lv))
    return lv


def candidates(profiles: Sequence[UserProfile], gains: np.ndarray, levels) -> Candidates:
    gains = np.asarray(gains, dtype=float)
    n, k_users = gains.shape
    lv = _as_levels(levels, k_users)
    values, costs, rates, owners, modes = [], [], [], [], []
    for k, prof in enumerate(profiles):
        h = gains[:, k]
        mu = prof.mu
        if prof.is_amc:
            for l, (rho, p) in enumerate(zip(prof.codebook.rho, prof.codebook.p), start=1):
                cost = mu * p / h
                values.append(cost - lv[k] * rho)
                costs.append(cost)
                rates.append(np.full(n, rho))
                owners.append(k)
                modes.append(l)
        else:
            if mu <= 0.0:
                raise ValueError("capacity-achieving users need mu > 0 (see regularize_costs)")
            if lv[k] <= 0.0:
                r = np.zeros(n)
            else:
                r = np.maximum(np.log2(lv[k] * h / (LN2 * mu)), 0.0)
            cost = mu / h * np.expm1(LN2 * r)
            val = cost - lv[k] * r
            val = np.where(r > 0.0, val, np.inf)
            values.append(val)
            costs.append(cost)
            rates.append(r)
            owners.append(k)
            modes.append(0)
    return Candidates(
        value=np.column_stack(values),
        cost=np.column_stack(costs),
        rate=np.column_stack(rates),
        owner=np.asarray(owners, dtype=int),
        mode=np.asarray(modes, dtype=int),
    )


@dataclass
class Selection:
    tau: np.ndarray  # (N, K)
    rate: np.ndarray  # (N, K)
    tie_rows: np.ndarray  # indices of states that hit a tie


def select(
    profiles: Sequence[UserProfile],
    gains: np.ndarray,
    levels,
    *,
    rule: str,
    high_share: float = 0.5,
    user_shares: Sequence[float] | None = None,
    mode_share: float = 0.5,
    reward_weights: Sequence[float] | None = None,
    tie_rtol: float = TIE_RTOL,
) -> Selection:
    """Pick the operating point of every state.

    ``rule="wsum"`` resolves a tie by time sharing the lowest- and
    highest-reward tied points, giving ``high_share`` of the block to the
    higher one. ``rule="indiv"`` splits the block among tied users in
    proportion to ``user_shares`` (equal by default) and shares a user's two
    tied adjacent modes with ``mode_share`` on the higher mode.
    """
    gains = np.asarray(gains, dtype=float)
    n, k_users = gains.shape
    cand = candidates(profiles, gains, levels)
    lv = _as_levels(levels, k_users)
    val = cand.value
    # the idle point has value 0; any usable candidate must beat it
    best = np.argmin(val, axis=1)
    rows = np.arange(n)
    vbest = val[rows, best]
    active = vbest < 0.0

    tau = np.zeros((n, k_users))
    rate = np.zeros((n, k_users))
    a_rows = rows[active]
    a_cols = best[active]
    owners = cand.owner[a_cols]
    tau[a_rows, owners] = 1.0
    rate[a_rows, owners] = cand.rate[a_rows, a_cols]

    # tie detection: a second candidate (or the idle point) within tolerance
    scale = np.abs(cand.cost[rows, best]) + np.abs(lv[cand.owner[best]] * cand.rate[rows, best])
    scale = np.where(np.isfinite(scale), scale, 0.0)
    tol = tie_rtol * scale
    vmin = np.minimum(vbest, 0.0)
    near = val <= (vmin + tol)[:, None]
    n_near = near.sum(axis=1) + (np.abs(vmin) <= tol)
    tie_rows = rows[n_near > 1]

    for i in tie_rows:
        tied = np.flatnonzero(near[i])
        idle_tied = abs(vmin[i]) <= tol[i]
        tau[i] = 0.0
        rate[i] = 0.0
        if rule == "wsum":
            _resolve_wsum(i, tied, idle_tied, cand, tau, rate, high_share, reward_weights)
        elif rule == "indiv":
            _resolve_indiv(i, tied, idle_tied, cand, tau, rate, user_shares, mode_share)
        else:
            raise ValueError(f"unknown tie rule {rule!r}")
    return Selection(tau=tau, rate=rate, tie_rows=tie_rows)


def _resolve_wsum(i, tied, idle_tied, cand, tau, rate, high_share, reward_weights) -> None:
    w = np.asarray(reward_weights, dtype=float)
    pts = [(w[cand.owner[j]] * cand.rate[i, j], int(cand.owner[j]), float(cand.rate[i, j])) for j in tied]
    if idle_tied:
        pts.append((0.0, -1, 0.0))
    pts.sort()
    lo, hi = pts[0], pts[-1]
    if lo[1] == hi[1]:
        # same user on adjacent modes: interpolate inside one time fraction
        tau[i, hi[1]] = 1.0
        rate[i, hi[1]] = high_share * hi[2] + (1.0 - high_share) * lo[2]
        return
    tau[i, hi[1]] = high_share
    rate[i, hi[1]] = hi[2]
    if lo[1] >= 0:
        tau[i, lo[1]] = 1.0 - high_share
        rate[i, lo[1]] = lo[2]


def _resolve_indiv(i, tied, idle_tied, cand, tau, rate, user_shares, mode_share) -> None:
    by_user: dict[int, list[float]] = {}
    for j in tied:
        by_user.setdefault(int(cand.owner[j]), []).append(float(cand.rate[i, j]))
    users = sorted(by_user)
    if user_shares is None:
        weights = np.ones(len(users))
    else:
        weights = np.array([user_shares[u] for u in users], dtype=float)
    weights = weights / weights.sum()
    for u, frac in zip(users, weights):
        rs = sorted(by_user[u])
        if idle_tied and len(rs) == 1:
            rs = [0.0] + rs
        hi_r, lo_r = rs[-1], rs[0]
        if len(rs) == 1:
            tau[i, u] = frac
            rate[i, u] = hi_r
        elif lo_r == 0.0:
            tau[i, u] = frac * mode_share
            rate[i, u] = hi_r
        else:
            tau[i, u] = frac
            rate[i, u] = mode_share * hi_r + (1.0 - mode_share) * lo_r


def block_power(profiles: Sequence[UserProfile], gains: np.ndarray, tau: np.ndarray, rate: np.ndarray) -> np.ndarray:
    """Per-block transmit power ``tau_k * p_k`` of every user, shape (N, K)."""
    gains = np.asarray(gains, dtype=float)
    out = np.zeros_like(tau)
    for k, prof in enumerate(profiles):
        h = gains[:, k]
        if prof.is_amc:
            tab = prof.codebook
            r = rate[:, k]
            if np.any(r > tab.max_rate * (1.0 + 1e-12)):
                raise ValueError(f"user {k} rate exceeds its top AMC mode")
            p = np.interp(r, np.concatenate(([0.0], tab.rho)), np.concatenate(([0.0], tab.p)))
            out[:, k] = tau[:, k] * p / h
        else:
            out[:, k] = tau[:, k] * np.expm1(LN2 * rate[:, k]) / h
    return out


def mean(x: np.ndarray, axis=0):
    """Sample mean with numpy's pairwise summation."""
    x = np.ascontiguousarray(x)
    return np.sum(x, axis=axis) / x.shape[axis]


def safe_log2(x: float) -> float:
    return math.log2(x) if x > 0 else -math.inf
