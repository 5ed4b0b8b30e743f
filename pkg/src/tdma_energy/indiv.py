"""Minimum weighted power under individual average-rate constraints.

Every user ``k`` carries its own water level ``lam[k]``. In each block the
user with the smallest channel-quality indicator ``phi_k`` transmits alone at
its own water-filling rate (or its best AMC mode); when every indicator is
zero the block stays idle. The level vector is found by sweeping one
component at a time, each update solving the user's own rate equation with
the other levels held fixed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import _kernel
from .channel import ChannelModel, FadingState, RayleighPower, SampleSet
from .costreward import LN2, TIE_RTOL, UserProfile, codebook_kind
from .wsum import Allocation, ConvergenceError, InfeasibleError

log = logging.getLogger(__name__)

__all__ = [
    "LagrangeVector",
    "IndivSolution",
    "quality_indicator",
    "greedy_allocate_state",
    "allocate_sample",
    "average_rates",
    "update_lambda_component",
    "single_user_levels",
    "solve",
    "corollary_quadrature",
]


@dataclass(frozen=True)
class LagrangeVector:
    """Positive per-user water levels."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("need at least one level")
        for v in vals:
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"water levels must be positive and finite, got {v!r}")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> float:
        return self.values[k]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class IndivSolution:
    lambda_star: LagrangeVector
    avg_rate: tuple[float, ...]
    avg_power: tuple[float, ...]
    objective: float
    iterations: int
    converged: bool
    targets: tuple[float, ...] = ()
    samples: int = 0
    seed: int | None = None
    order: str = "gauss-seidel"
    trace: tuple[dict, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = list(self.lambda_star.values)
        del d["lambda_star"]
        d["avg_rate"] = list(self.avg_rate)
        d["avg_power"] = list(self.avg_power)
        d["targets"] = list(self.targets)
        d["trace"] = [dict(t) for t in self.trace]
        return d


# --------------------------------------------------------------------------
# one state


def quality_indicator(profile: UserProfile, mu: float, h: float, lambda_k: float) -> tuple[float, float]:
    """Rate minimizing ``mu * power - lambda_k * rate`` and the minimum itself.

    Returns
    -------
    (r_min, phi) : tuple of float
        ``phi <= 0``; ``phi == 0`` exactly when ``r_min == 0``.
    """
    if not h > 0.0:
        raise ValueError("channel gain must be positive")
    if not lambda_k > 0.0:
        raise ValueError("water level must be positive")
    if profile.is_amc:
        tab = profile.codebook
        best = 0
        for l, g in enumerate(tab.gamma, start=1):
            if mu * g / h <= lambda_k:
                best = l
        if best == 0:
            return 0.0, 0.0
        rho, p = tab.rho[best - 1], tab.p[best - 1]
        return rho, min(mu * p / h - lambda_k * rho, 0.0)
    if mu <= 0.0:
        raise ValueError("capacity-achieving users need mu > 0")
    r = math.log2(lambda_k * h / (LN2 * mu))
    if r <= 0.0:
        return 0.0, 0.0
    return r, min(mu / h * math.expm1(LN2 * r) - lambda_k * r, 0.0)


def greedy_allocate_state(
    profiles: Sequence[UserProfile],
    state: FadingState,
    lam: LagrangeVector | Sequence[float],
    tie_shares: Sequence[float] | None = None,
    mode_share: float = 0.5,
    tie_rtol: float = TIE_RTOL,
) -> Allocation:
    """Give the block to the user with the smallest quality indicator.

    Ties among users split the block by ``tie_shares`` (equal by default);
    a user tied between two adjacent AMC modes (or a mode and silence)
    spends ``mode_share`` of its time on the higher one.
    """
    lam = lam if isinstance(lam, LagrangeVector) else LagrangeVector(tuple(lam))
    k_users = len(profiles)
    if len(lam) != k_users or state.num_users != k_users:
        raise ValueError("profiles, state and levels disagree on the number of users")
    options: list[tuple[float, int, float]] = []  # (value, user, rate)
    for k, prof in enumerate(profiles):
        h = state[k]
        if prof.is_amc:
            for rho, p in zip(prof.codebook.rho, prof.codebook.p):
                options.append((prof.mu * p / h - lam[k] * rho, k, rho))
        else:
            r, phi = quality_indicator(prof, prof.mu, h, lam[k])
            if r > 0.0:
                options.append((phi, k, r))
    tau = [0.0] * k_users
    rate = [0.0] * k_users
    if not options:
        return Allocation(tuple(tau), tuple(rate))
    v_best, k_best, r_best = min(options)
    vmin = min(v_best, 0.0)
    # same tolerance rule as the vectorized selection
    tol = tie_rtol * (abs(v_best + lam[k_best] * r_best) + abs(lam[k_best] * r_best))
    tied = [(k, r) for v, k, r in options if v <= vmin + tol]
    idle_tied = abs(vmin) <= tol
    if len(tied) + idle_tied <= 1:
        if v_best < 0.0:
            tau[k_best], rate[k_best] = 1.0, r_best
        return Allocation(tuple(tau), tuple(rate))
    by_user: dict[int, list[float]] = {}
    for k, r in tied:
        by_user.setdefault(k, []).append(r)
    users = sorted(by_user)
    weights = np.ones(len(users)) if tie_shares is None else np.array([tie_shares[u] for u in users], dtype=float)
    weights = weights / weights.sum()
    for u, frac in zip(users, weights):
        rs = sorted(by_user[u])
        if idle_tied and len(rs) == 1:
            rs = [0.0] + rs
        if len(rs) == 1:
            tau[u], rate[u] = frac, rs[0]
        elif rs[0] == 0.0:
            tau[u], rate[u] = frac * mode_share, rs[-1]
        else:
            tau[u], rate[u] = frac, mode_share * rs[-1] + (1.0 - mode_share) * rs[0]
    return Allocation(tuple(tau), tuple(rate))


# --------------------------------------------------------------------------
# whole sample


def _gains(sample) -> np.ndarray:
    return sample.gains if isinstance(sample, SampleSet) else np.asarray(sample, dtype=float)


def allocate_sample(
    profiles: Sequence[UserProfile],
    sample,
    lam,
    tie_shares: Sequence[float] | None = None,
    mode_share: float = 0.5,
) -> _kernel.Selection:
    """Vectorized :func:`greedy_allocate_state` over a sample."""
    levels = np.asarray(lam.values if isinstance(lam, LagrangeVector) else lam, dtype=float)
    return _kernel.select(
        profiles, _gains(sample), levels, rule="indiv", user_shares=tie_shares, mode_share=mode_share
    )


def average_rates(profiles, sample, lam, **kw) -> np.ndarray:
    sel = allocate_sample(profiles, sample, lam, **kw)
    return _kernel.mean(sel.tau * sel.rate)


class _UserRate:
    """``lam_k -> E[tau_k r_k]`` with the competitors' levels frozen."""

    def __init__(self, profiles, gains, lam, k, tie_shares=None, mode_share=0.5):
        self.profiles, self.gains, self.k = profiles, gains, k
        self.lam = np.array(lam, dtype=float)
        self.tie_shares, self.mode_share = tie_shares, mode_share
        others = [i for i in range(len(profiles)) if i != k]
        if others:
            cand = _kernel.candidates(
                [profiles[i] for i in others], gains[:, others], self.lam[others]
            )
            self.rival = np.minimum(cand.value.min(axis=1), 0.0)
        else:
            self.rival = np.zeros(gains.shape[0])
        prof = profiles[k]
        if not prof.is_amc:
            if prof.mu <= 0.0:
                raise ValueError("capacity-achieving users need mu > 0 (see regularize_costs)")
            # log of the gain over the activation threshold, minus log lam_k
            self.log_ratio = np.log(gains[:, k] / (LN2 * prof.mu))
        self.evals = 0

    def _select_rows(self, rows: np.ndarray, lam_k: float) -> float:
        lam = self.lam.copy()
        lam[self.k] = lam_k
        sub = _kernel.select(
            self.profiles, self.gains[rows], lam, rule="indiv",
            user_shares=self.tie_shares, mode_share=self.mode_share,
        )
        return float(np.sum(sub.tau[:, self.k] * sub.rate[:, self.k]))

    def _continuous(self, lam_k: float) -> float:
        # phi = (lam/ln2)(1 - 1/u - ln u) with u = lam h / (ln2 mu) > 1
        ln_u = self.log_ratio + math.log(lam_k)
        on = ln_u > 0.0
        ln_u = np.where(on, ln_u, 0.0)
        v = (lam_k / LN2) * (-np.expm1(-ln_u) - ln_u)
        lam_r = lam_k * ln_u / LN2
        tol = TIE_RTOL * (np.abs(v + lam_r) + lam_r)
        win = on & (v < self.rival - tol)
        total = float(np.sum(ln_u[win])) / LN2
        close = np.flatnonzero(on & (np.abs(v - self.rival) <= tol))
        if close.size:
            total += self._select_rows(close, lam_k)
        return total / self.gains.shape[0]

    def __call__(self, lam_k: float) -> float:
        self.evals += 1
        k = self.k
        if not self.profiles[k].is_amc:
            return self._continuous(lam_k)
        cand = _kernel.candidates([self.profiles[k]], self.gains[:, [k]], [lam_k])
        best = np.argmin(cand.value, axis=1)
        rows = np.arange(self.gains.shape[0])
        v = cand.value[rows, best]
        r = cand.rate[rows, best]
        scale = np.abs(cand.cost[rows, best]) + np.abs(lam_k * r)
        scale = np.where(np.isfinite(scale), scale, 0.0)
        tol = TIE_RTOL * scale
        win = v < self.rival - tol
        total = float(np.sum(np.where(win, r, 0.0)))
        # near-ties (and adjacent-mode ties) go through the full selection rule
        close = np.flatnonzero(np.abs(v - self.rival) <= tol)
        if close.size:
            total += self._select_rows(close, lam_k)
        # the winner may sit on a tie between two of its own modes
        mode_tie = np.flatnonzero(win & (_second_gap(cand.value) <= tol))
        if mode_tie.size:
            total += self._select_rows(mode_tie, lam_k) - float(np.sum(r[mode_tie]))
        return total / self.gains.shape[0]


def _second_gap(values: np.ndarray) -> np.ndarray:
    if values.shape[1] < 2:
        return np.full(values.shape[0], np.inf)
    part = np.partition(values, 1, axis=1)
    return part[:, 1] - part[:, 0]


def _root_from_above(
    fn: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    xtol: float,
    max_iter: int = 400,
    f_lo: float | None = None,
    f_hi: float | None = None,
) -> tuple[float, float]:
    """Smallest level (to ``xtol`` relative) whose non-decreasing ``fn`` reaches ``target``.

    ``fn(lo) < target <= fn(hi)`` on entry. Iterates an Illinois false
    position in log-level space, guarded by bisection, and always returns
    the upper end of the final bracket together with its value.
    """
    f_lo = (fn(lo) if f_lo is None else f_lo) - target
    f_hi = (fn(hi) if f_hi is None else f_hi) - target
    w_lo, w_hi = f_lo, f_hi  # interpolation weights, damped on repeated sides
    a, b = math.log(lo), math.log(hi)
    side = 0
    for _ in range(max_iter):
        if b - a <= xtol or f_hi <= 1e-13 * target:
            break
        width = b - a
        if w_hi > w_lo and math.isfinite(w_hi - w_lo):
            c = b - w_hi * width / (w_hi - w_lo)
        else:
            c = a + 0.5 * width
        # keep the step inside the bracket and away from its ends
        c = min(max(c, a + 0.01 * width), b - 0.01 * width)
        f_c = fn(math.exp(c)) - target
        if f_c >= 0.0:
            b, f_hi, w_hi = c, f_c, f_c
            if side == 1:
                w_lo *= 0.5
            side = 1
        else:
            a, f_lo, w_lo = c, f_c, f_c
            if side == -1:
                w_hi *= 0.5
            side = -1
    return math.exp(b), f_hi + target


def update_lambda_component(
    k: int,
    profiles: Sequence[UserProfile],
    sample,
    lam: LagrangeVector | Sequence[float],
    target: float,
    tol: float = 1e-10,
    tie_shares: Sequence[float] | None = None,
    mode_share: float = 0.5,
) -> float:
    """Level of user ``k`` meeting its rate target with the other levels fixed.

    Returns the smallest level (to relative tolerance ``tol``) at which the
    average rate of user ``k`` reaches ``target``.

    Raises
    ------
    InfeasibleError
        If no level within a factor of about ``2**200`` above the current one
        reaches the target.
    """
    if not target > 0.0:
        raise ValueError("target rate must be positive")
    levels = np.asarray(lam.values if isinstance(lam, LagrangeVector) else lam, dtype=float)
    gains = _gains(sample)
    fn = _UserRate(profiles, gains, levels, k, tie_shares, mode_share)
    # grow the bracket geometrically: factors 2, 4, 16, 256, 2**16, then 2**20 steps
    lo = hi = float(levels[k])
    f_lo = f_hi = fn(hi)
    factor = 2.0
    if f_hi >= target:
        for _ in range(80):
            hi, f_hi = lo, f_lo
            lo = hi / factor
            f_lo = fn(lo)
            if f_lo < target:
                break
            factor = min(factor * factor, 2.0 ** 20)
        else:
            return hi
    else:
        for _ in range(16):
            lo, f_lo = hi, f_hi
            hi = lo * factor
            f_hi = fn(hi)
            if f_hi >= target:
                break
            factor = min(factor * factor, 2.0 ** 20)
        else:
            raise InfeasibleError(f"user {k} cannot reach rate {target} against its competitors")
    lam_k, _ = _root_from_above(fn, target, lo, hi, xtol=tol, f_lo=f_lo, f_hi=f_hi)
    return lam_k


def single_user_levels(profiles, sample, targets, tol: float = 1e-10) -> np.ndarray:
    """Levels each user would need if it had the channel to itself."""
    gains = _gains(sample)
    out = []
    for k, (prof, t) in enumerate(zip(profiles, targets)):
        start = LN2 * max(prof.mu, 1e-300)
        out.append(update_lambda_component(0, [prof], gains[:, [k]], [start], t, tol=tol))
    return np.array(out)


def _feasibility(profiles, targets) -> None:
    if codebook_kind(profiles) != "amc":
        return
    load = sum(t / p.codebook.max_rate for p, t in zip(profiles, targets))
    if load > 1.0:
        raise InfeasibleError(f"targets need {load:.4g} > 1 of the air time even at top modes")


def _start_above(profiles, gains, targets, max_steps: int = 4000) -> np.ndarray:
    """Levels whose rates meet every target, built by doubling the deficient ones."""
    lam = np.full(len(profiles), LN2 * max(p.mu for p in profiles))
    for _ in range(max_steps):
        rates = average_rates(profiles, gains, lam)
        short = rates < targets
        if not short.any():
            return lam
        lam[short] *= 2.0
    raise InfeasibleError("could not find levels meeting every target")


def solve(
    profiles: Sequence[UserProfile],
    sample: SampleSet,
    targets: Sequence[float],
    tol: float = 1e-5,
    max_outer: int = 100,
    order: str = "gauss-seidel",
    init: str | Sequence[float] = "above",
    inner_tol: float = 1e-10,
    tie_shares: Sequence[float] | None = None,
    mode_share: float = 0.5,
    raise_on_failure: bool = False,
) -> IndivSolution:
    """Sweep the per-user levels until every average rate meets its target.

    Parameters
    ----------
    profiles : sequence of UserProfile
    sample : SampleSet
        Fixed fading states shared by every evaluation.
    targets : sequence of float
        Per-user average rates, bits/s/Hz.
    tol : float
        Relative rate tolerance for convergence. Each user is additionally
        allowed the rate carried by a single sampled state, the resolution
        limit of a finite sample.
    max_outer : int
        Maximum number of sweeps.
    order : {"gauss-seidel", "jacobi"}
        Gauss-Seidel updates see the newest levels of earlier users;
        Jacobi updates all users against the previous sweep.
    init : {"above", "below"} or sequence of float
        ``"above"`` starts from levels meeting every target (the sweeps then
        decrease monotonically); ``"below"`` starts from the single-user
        levels, which undershoot because competition removes service.
    raise_on_failure : bool
        Raise :class:`ConvergenceError` instead of returning a solution with
        ``converged=False``.

    Returns
    -------
    IndivSolution
    """
    targets = np.asarray(targets, dtype=float)
    k_users = len(profiles)
    if targets.shape != (k_users,) or np.any(targets <= 0.0):
        raise ValueError("need one positive target per user")
    if sample.num_users != k_users:
        raise ValueError("sample and profiles disagree on the number of users")
    if order not in ("gauss-seidel", "jacobi"):
        raise ValueError(f"unknown sweep order {order!r}")
    _feasibility(profiles, targets)
    gains = sample.gains

    if isinstance(init, str):
        if init == "above":
            lam = _start_above(profiles, gains, targets)
        elif init == "below":
            lam = single_user_levels(profiles, gains, targets, tol=inner_tol)
        else:
            raise ValueError(f"unknown initialization {init!r}")
    else:
        lam = np.asarray(init, dtype=float).copy()
        LagrangeVector(tuple(lam))

    def update(k, levels):
        return update_lambda_component(
            k, profiles, gains, levels, targets[k], tol=inner_tol,
            tie_shares=tie_shares, mode_share=mode_share,
        )

    def residual(levels):
        """Largest rate error in units of its allowance.

        On a finite sample every user's average rate moves in steps as single
        states change hands, so the allowance is ``tol * target`` plus the
        largest rate one state contributes at the current levels.
        """
        sel = allocate_sample(profiles, gains, levels, tie_shares=tie_shares, mode_share=mode_share)
        served = sel.tau * sel.rate
        rates = _kernel.mean(served)
        step = served.max(axis=0) / gains.shape[0]
        err = float(np.max(np.abs(rates - targets) / targets))
        return err, bool(np.all(np.abs(rates - targets) <= tol * targets + step))

    trace = []
    err, converged = residual(lam)
    trace.append({"sweep": 0, "lambda": lam.tolist(), "max_rel_error": err})
    sweeps = 0
    while not converged and sweeps < max_outer:
        sweeps += 1
        if order == "jacobi":
            lam = np.array([update(k, lam) for k in range(k_users)])
        else:
            for k in range(k_users):
                lam[k] = update(k, lam)
        err, converged = residual(lam)
        trace.append({"sweep": sweeps, "lambda": lam.tolist(), "max_rel_error": err})
    if not converged:
        log.warning("level sweeps stopped after %d sweeps, max rate error %.3g", sweeps, err)
        if raise_on_failure:
            raise ConvergenceError("level sweeps did not converge", {"sweeps": sweeps, "max_rel_error": err})

    sel = allocate_sample(profiles, gains, lam, tie_shares=tie_shares, mode_share=mode_share)
    powers = _kernel.mean(_kernel.block_power(profiles, gains, sel.tau, sel.rate))
    mu = np.array([p.mu for p in profiles])
    return IndivSolution(
        lambda_star=LagrangeVector(tuple(lam)),
        avg_rate=tuple(float(x) for x in _kernel.mean(sel.tau * sel.rate)),
        avg_power=tuple(float(x) for x in powers),
        objective=float(np.dot(mu, powers)),
        iterations=sweeps,
        converged=converged,
        targets=tuple(float(t) for t in targets),
        samples=sample.count,
        seed=sample.seed,
        order=order,
        trace=tuple(trace),
    )


# --------------------------------------------------------------------------
# quadrature for independent Rayleigh fading


class _Indicator:
    """Quality indicator of one user as a function of its own gain."""

    def __init__(self, profile: UserProfile, lam_k: float):
        self.profile, self.lam, self.mu = profile, float(lam_k), profile.mu
        if profile.is_amc:
            tab = profile.codebook
            self.rho = np.array(tab.rho)
            self.p = np.array(tab.p)
            # mode l is used on [mu gamma_l / lam, mu gamma_{l+1} / lam)
            self.edges = [self.mu * g / self.lam for g in tab.gamma] + [math.inf]
            self.threshold = self.edges[0]
        else:
            self.threshold = LN2 * self.mu / self.lam

    def mode(self, z: float) -> int:
        """Index into the mode table in use at gain ``z`` (-1 when silent)."""
        l = -1
        for i, e in enumerate(self.edges[:-1]):
            if z >= e:
                l = i
        return l

    def rate(self, z: float) -> float:
        if z <= self.threshold:
            return 0.0
        if self.profile.is_amc:
            return float(self.rho[self.mode(z)])
        return math.log2(z / self.threshold)

    def power(self, z: float) -> float:
        if z <= self.threshold:
            return 0.0
        if self.profile.is_amc:
            return float(self.p[self.mode(z)]) / z
        return self.lam / (LN2 * self.mu) - 1.0 / z

    def phi(self, z: float) -> float:
        if z <= self.threshold:
            return 0.0
        if self.profile.is_amc:
            l = self.mode(z)
            return min(self.mu * self.p[l] / z - self.lam * self.rho[l], 0.0)
        u = z / self.threshold
        return self.lam / LN2 * (1.0 - 1.0 / u - math.log(u))

    def inverse(self, v: float) -> float:
        """Gain at which the indicator equals ``v < 0``; ``inf`` if never reached."""
        if v >= 0.0:
            return self.threshold
        if self.profile.is_amc:
            for l in range(len(self.rho)):
                den = v + self.lam * self.rho[l]
                if den <= 0.0:
                    continue
                s = self.mu * self.p[l] / den
                if self.edges[l] <= s < self.edges[l + 1]:
                    return s
            # v lies below the indicator's floor
            return math.inf
        # 1/u + ln u = q has a single root with ln u in (0, q]
        q = 1.0 - v * LN2 / self.lam
        y = brentq(lambda t: math.exp(-t) + t - q, 0.0, q, xtol=1e-15, rtol=1e-15)
        return self.threshold * math.exp(y)


def corollary_quadrature(
    profiles: Sequence[UserProfile],
    model: ChannelModel,
    lam: LagrangeVector | Sequence[float],
    rtol: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """Average rates and powers of the greedy policy by numerical integration.

    For independent Rayleigh fading, user ``k`` transmits at gain ``z`` with
    probability ``prod_{i != k} F_i(s_ik(z))``, where ``s_ik(z)`` is the gain
    at which user ``i`` would match user ``k``'s indicator. Integrals run over
    ``[threshold_k, z_max]`` with an exponential tail mass below ``1e-12``.

    Returns
    -------
    (rates, powers) : pair of ndarray
    """
    levels = lam.values if isinstance(lam, LagrangeVector) else tuple(float(x) for x in lam)
    if len(levels) != len(profiles) or model.num_users != len(profiles):
        raise ValueError("profiles, model and levels disagree on the number of users")
    for d in model.users:
        if not isinstance(d, RayleighPower):
            raise ValueError("quadrature needs independent Rayleigh fading for every user")
    ind = [_Indicator(p, l) for p, l in zip(profiles, levels)]
    rates, powers = [], []
    for k, (dist, me) in enumerate(zip(model.users, ind)):
        m = dist.mean_gain
        z_max = m * (12.0 * math.log(10.0) + 2.0)

        def win_prob(z: float) -> float:
            v = me.phi(z)
            prob = 1.0
            for i, other in enumerate(ind):
                if i == k:
                    continue
                s = other.inverse(v)
                prob *= 1.0 if math.isinf(s) else float(model.users[i].cdf(s))
            return prob

        def density(z: float) -> float:
            return math.exp(-z / m) / m

        lo = me.threshold
        if lo >= z_max:
            rates.append(0.0)
            powers.append(0.0)
            continue
        breaks = [e for e in getattr(me, "edges", [])[1:-1] if lo < e < z_max]
        r_int = quad(lambda z: me.rate(z) * win_prob(z) * density(z), lo, z_max,
                     points=breaks or None, epsrel=rtol, epsabs=0.0, limit=400)[0]
        p_int = quad(lambda z: me.power(z) * win_prob(z) * density(z), lo, z_max,
                     points=breaks or None, epsrel=rtol, epsabs=0.0, limit=400)[0]
        rates.append(r_int)
        powers.append(p_int)
    return np.array(rates), np.array(powers)
