"""Minimum weighted power under a weighted sum average-rate constraint.

Per state the block goes to the point of the cost envelope whose slope
matches the water level ``lam``; ``lam`` itself is found by bisection so that
the sample-average weighted rate hits the target. Idle time is explicit:
the time fractions of an allocation may sum to less than one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import _kernel
from .channel import FadingState, SampleSet
from .costreward import (
    LN2,
    TIE_RTOL,
    ContinuousEnvelope,
    PiecewiseEnvelope,
    UserProfile,
    amc_upsilon,
    build_envelope,
    codebook_kind,
)

log = logging.getLogger(__name__)

__all__ = [
    "SolverError",
    "InfeasibleError",
    "ConvergenceError",
    "Allocation",
    "WsumSolution",
    "allocate_state",
    "allocate_sample",
    "state_power",
    "solve",
    "kkt_violations",
    "max_weighted_rate",
]


class SolverError(RuntimeError):
    pass


class InfeasibleError(SolverError):
    """The rate target cannot be met by any policy."""


class ConvergenceError(SolverError):
    """The iteration budget ran out before the tolerance was met."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class Allocation:
    """Time fraction ``tau[k]`` and rate ``rate[k]`` of every user in one block."""

    tau: tuple[float, ...]
    rate: tuple[float, ...]

    def __post_init__(self) -> None:
        tau = tuple(float(t) for t in self.tau)
        rate = tuple(float(r) for r in self.rate)
        if len(tau) != len(rate):
            raise ValueError("tau and rate must have the same length")
        if any(t < 0.0 or t > 1.0 + 1e-12 for t in tau) or sum(tau) > 1.0 + 1e-12:
            raise ValueError(f"invalid time fractions {tau}")
        if any(r < 0.0 for r in rate):
            raise ValueError("rates must be non-negative")
        rate = tuple(0.0 if t == 0.0 else r for t, r in zip(tau, rate))
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "rate", rate)

    @classmethod
    def idle(cls, num_users: int) -> "Allocation":
        return cls((0.0,) * num_users, (0.0,) * num_users)

    @property
    def num_users(self) -> int:
        return len(self.tau)

    @property
    def active_users(self) -> list[int]:
        return [k for k, t in enumerate(self.tau) if t > 0.0]

    def weighted_rate(self, w: Sequence[float]) -> float:
        return math.fsum(wk * t * r for wk, t, r in zip(w, self.tau, self.rate))


@dataclass(frozen=True)
class WsumSolution:
    lambda_star: float
    tau0: float
    avg_rate: float
    avg_power: tuple[float, ...]
    objective: float
    user_rates: tuple[float, ...]
    iterations: int
    samples: int
    seed: int | None = None
    ties: int = 0
    target_rate: float = math.nan

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_star")
        d["avg_power"] = list(self.avg_power)
        d["user_rates"] = list(self.user_rates)
        return d


# --------------------------------------------------------------------------
# one state


def _tie_high_share(kind: str, tau0: float) -> float:
    # capacity-achieving ties give tau0 to the lower-reward user,
    # AMC corner ties give tau0 to the higher corner
    return tau0 if kind in ("amc", "piecewise_linear") else 1.0 - tau0


def allocate_state(
    profiles: Sequence[UserProfile], state: FadingState, lam: float, tau0: float = 0.5
) -> Allocation:
    """Optimal allocation of one block at water level ``lam``."""
    if lam < 0.0:
        raise ValueError("water level must be non-negative")
    if not 0.0 <= tau0 <= 1.0:
        raise ValueError("tau0 must lie in [0, 1]")
    k_users = len(profiles)
    if lam == 0.0:
        return Allocation.idle(k_users)
    env = build_envelope(profiles, state)
    wp = env.rate_at_level(lam)
    tau = [0.0] * k_users
    rate = [0.0] * k_users
    if wp.regime == "below":
        return Allocation.idle(k_users)
    if wp.regime == "interior":
        u = wp.high.user
        tau[u] = 1.0
        rate[u] = wp.high.reward / profiles[u].w
        return Allocation(tuple(tau), tuple(rate))
    share = _tie_high_share(env.kind, tau0)
    hi, lo = wp.high, wp.low
    if lo.user == hi.user:
        tau[hi.user] = 1.0
        rate[hi.user] = (share * hi.reward + (1.0 - share) * lo.reward) / profiles[hi.user].w
        return Allocation(tuple(tau), tuple(rate))
    tau[hi.user] = share
    rate[hi.user] = hi.reward / profiles[hi.user].w
    if lo.user is not None:
        tau[lo.user] = 1.0 - share
        rate[lo.user] = lo.reward / profiles[lo.user].w
    return Allocation(tuple(tau), tuple(rate))


def state_power(profiles: Sequence[UserProfile], state: FadingState, alloc: Allocation) -> tuple[float, ...]:
    """Per-block transmit power ``tau_k * p_k`` of every user."""
    out = []
    for prof, h, t, r in zip(profiles, state.gains, alloc.tau, alloc.rate):
        if t == 0.0:
            out.append(0.0)
        elif prof.is_amc:
            p = amc_upsilon(prof.codebook, h, r)
            if math.isinf(p):
                raise ValueError("allocated rate exceeds the top AMC mode")
            out.append(t * p)
        else:
            out.append(t * math.expm1(LN2 * r) / h)
    return tuple(out)


# --------------------------------------------------------------------------
# whole sample


def allocate_sample(
    profiles: Sequence[UserProfile], sample: SampleSet | np.ndarray, lam: float, tau0: float = 0.5
) -> _kernel.Selection:
    """Vectorized :func:`allocate_state` over every state of a sample."""
    gains = sample.gains if isinstance(sample, SampleSet) else np.asarray(sample, dtype=float)
    kind = codebook_kind(profiles)
    w = np.array([p.w for p in profiles])
    return _kernel.select(
        profiles,
        gains,
        lam * w,
        rule="wsum",
        high_share=_tie_high_share(kind, tau0),
        reward_weights=w,
    )


def max_weighted_rate(profiles: Sequence[UserProfile]) -> float:
    """Largest weighted rate any block can carry (``inf`` for capacity-achieving codes)."""
    if codebook_kind(profiles) != "amc":
        return math.inf
    return max(p.w * p.codebook.max_rate for p in profiles)


def _summaries(profiles, gains, sel):
    w = np.array([p.w for p in profiles])
    mu = np.array([p.mu for p in profiles])
    user_rates = _kernel.mean(sel.tau * sel.rate)
    powers = _kernel.mean(_kernel.block_power(profiles, gains, sel.tau, sel.rate))
    return float(np.dot(w, user_rates)), user_rates, powers, float(np.dot(mu, powers))


def solve(
    profiles: Sequence[UserProfile],
    sample: SampleSet,
    target_rate: float,
    tau0: float = 0.5,
    tol: float = 1e-4,
    max_iter: int = 200,
) -> WsumSolution:
    """Find the water level meeting the average weighted-rate target.

    Parameters
    ----------
    profiles : sequence of UserProfile
        One profile per user, all with the same codebook kind.
    sample : SampleSet
        Fading states; the same sample is used for every level evaluated.
    target_rate : float
        Required average weighted rate, bits/s/Hz.
    tau0 : float
        Time share used in tie states (re-solved when ties carry the target).
    tol : float
        Relative tolerance on the achieved average rate.
    max_iter : int
        Bisection budget.

    Returns
    -------
    WsumSolution
    """
    if not target_rate > 0.0:
        raise ValueError("target rate must be positive")
    kind = codebook_kind(profiles)
    if len(profiles) != sample.num_users:
        raise ValueError("sample and profiles disagree on the number of users")
    if kind == "infinite" and any(p.mu <= 0.0 for p in profiles):
        raise ValueError("zero cost weights need regularize_costs() first")
    cap = max_weighted_rate(profiles)
    if target_rate > cap:
        raise InfeasibleError(f"target {target_rate} exceeds the top-mode weighted rate {cap}")
    gains = sample.gains
    w = np.array([p.w for p in profiles])
    iterations = 0

    def rate_at(lam: float, t0: float = tau0) -> float:
        nonlocal iterations
        iterations += 1
        sel = allocate_sample(profiles, gains, lam, t0)
        return float(np.dot(w, _kernel.mean(sel.tau * sel.rate)))

    # bracket search scaled by the cost weights so that scaling mu scales lam
    scale = LN2 * max(p.mu for p in profiles) or 1.0
    hi = scale
    r_hi = rate_at(hi)
    doublings = 0
    while r_hi < target_rate:
        if doublings >= 60:
            raise InfeasibleError(
                f"average rate {r_hi:.6g} < target {target_rate} at lambda = {hi:.6g}"
            )
        hi *= 2.0
        r_hi = rate_at(hi)
        doublings += 1
    lo = hi / 2.0
    r_lo = rate_at(lo)
    halvings = 0
    while r_lo >= target_rate and halvings < 1100:
        hi, r_hi = lo, r_lo
        lo /= 2.0
        r_lo = rate_at(lo) if lo > 0.0 else 0.0
        halvings += 1

    lam_star, t0 = None, tau0
    if abs(r_hi - target_rate) <= tol * target_rate:
        lam_star = hi
    for _ in range(max_iter):
        if lam_star is not None:
            break
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi or hi / lo - 1.0 < 1e-13:
            lam_star, t0 = _resolve_jump(profiles, gains, hi, target_rate, tol, kind, tau0, rate_at)
            break
        r_mid = rate_at(mid)
        if abs(r_mid - target_rate) <= tol * target_rate:
            lam_star = mid
        elif r_mid < target_rate:
            lo = mid
        else:
            hi = mid
    if lam_star is None:
        raise ConvergenceError(
            "water-level bisection did not converge",
            {"lambda_lo": lo, "lambda_hi": hi, "target": target_rate, "iterations": iterations},
        )

    sel = allocate_sample(profiles, gains, lam_star, t0)
    avg_rate, user_rates, powers, objective = _summaries(profiles, gains, sel)
    if abs(avg_rate - target_rate) > tol * target_rate:
        raise ConvergenceError(
            f"achieved rate {avg_rate:.9g} misses target {target_rate:.9g}",
            {"lambda": lam_star, "tau0": t0, "iterations": iterations},
        )
    return WsumSolution(
        lambda_star=lam_star,
        tau0=t0,
        avg_rate=avg_rate,
        avg_power=tuple(float(x) for x in powers),
        objective=objective,
        user_rates=tuple(float(x) for x in user_rates),
        iterations=iterations,
        samples=sample.count,
        seed=sample.seed,
        ties=int(len(sel.tie_rows)),
        target_rate=float(target_rate),
    )


def _resolve_jump(profiles, gains, lam, target, tol, kind, tau0, rate_at):
    """Target sits inside a jump of the rate curve: tie states carry it via ``tau0``."""
    r0 = rate_at(lam, 0.0)
    r1 = rate_at(lam, 1.0)
    if abs(r1 - r0) <= 1e-15 * max(abs(r0), 1.0):
        if abs(r0 - target) <= tol * target:
            return lam, tau0
        raise ConvergenceError(
            "rate jumps across the target without tie states to share",
            {"lambda": lam, "rate_tau0_0": r0, "rate_tau0_1": r1, "target": target},
        )
    t0 = (target - r0) / (r1 - r0)
    t0 = min(max(t0, 0.0), 1.0)
    log.debug("target carried by tie states: lambda=%g tau0=%g", lam, t0)
    return lam, t0


def kkt_violations(
    profiles: Sequence[UserProfile],
    gains: np.ndarray,
    lam: float,
    tau: np.ndarray,
    rate: np.ndarray,
    rtol: float = 1e-9,
) -> list[int]:
    """States whose allocation breaks the envelope slope condition at ``lam``.

    Capacity-achieving codes need ``J'(R*) == lam`` wherever ``R* > 0``;
    AMC needs the chosen corner ``m`` to satisfy ``s_m <= lam < s_{m+1}``.
    Every state rebuilds its own envelope.
    """
    bad = []
    w = np.array([p.w for p in profiles])
    for i in range(gains.shape[0]):
        active = np.flatnonzero(tau[i] > 0.0)
        reward = float(np.dot(w, tau[i] * rate[i]))
        if reward <= 0.0:
            continue
        env = build_envelope(profiles, FadingState(tuple(gains[i])))
        if isinstance(env, ContinuousEnvelope):
            if len(active) == 1:
                u = int(active[0])
                r_star = w[u] * rate[i, u]
                piece, m = env.locate(r_star)
                ok = piece == "curve" and env.users[m] == u
                ok = ok and abs(env.slope_at(r_star) - lam) <= rtol * lam
            else:
                ok = any(abs(s - lam) <= max(rtol, TIE_RTOL) * lam for s in env.slopes[:-1])
        else:
            ok = _amc_corner_ok(env, profiles, active, tau[i], rate[i], lam, rtol)
        if not ok:
            bad.append(i)
    return bad


def _amc_corner_ok(env: PiecewiseEnvelope, profiles, active, tau_i, rate_i, lam, rtol) -> bool:
    if len(active) == 1 and tau_i[active[0]] == 1.0:
        u = int(active[0])
        r_star = profiles[u].w * rate_i[u]
        for m, (R, (owner, _)) in enumerate(zip(env.R, env.owners)):
            if abs(R - r_star) <= 1e-12 * R and owner == u:
                s_next = env.slopes[m + 1] if m + 1 < env.num_corners else math.inf
                return env.slopes[m] <= lam * (1.0 + rtol) and lam < s_next
        # a rate between two corners of the same user is a corner tie
        return any(abs(s - lam) <= TIE_RTOL * lam for s in env.slopes)
    return any(abs(s - lam) <= TIE_RTOL * lam for s in env.slopes)
