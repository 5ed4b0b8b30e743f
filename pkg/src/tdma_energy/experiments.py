"""Power-region tracing, baseline policies and power-savings studies.

The lower boundary of a power region is traced by sweeping the cost
direction ``mu = (t, 1 - t)`` and solving the matching optimization for
every ``t``. Two equal-time baselines serve as references:

* policy A gives every user ``1/K`` of each block and water-fills it over
  fading states on its own;
* policy B gives every user ``1/K`` of each block at a constant power.

With AMC codebooks a constant power cannot track discrete modes, so policy B
fixes a power budget ``p_k`` and sends the highest mode with ``p_l / h <= p_k``
(staying silent otherwise); ``p_k`` is spent in every block where the user
transmits.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from . import indiv, wsum
from .channel import SampleSet
from .costreward import UserProfile
from .wsum import Allocation, InfeasibleError

__all__ = [
    "PolicyId",
    "WeightedSum",
    "Individual",
    "RegionPoint",
    "SavingsRow",
    "direction_grid",
    "solve_optimal",
    "trace_region",
    "baseline_targets",
    "policy_a",
    "policy_b",
    "power_savings",
    "allocate_freq_selective",
    "quantize_time",
    "region_is_convex",
    "region_containment_gap",
    "region_asymmetry",
    "write_region_csv",
    "write_savings_csv",
]


class PolicyId(enum.Enum):
    OPTIMAL = "optimal"
    POLICY_A = "policy_a"
    POLICY_B = "policy_b"


@dataclass(frozen=True)
class WeightedSum:
    """Average of ``sum_k w_k r_k`` must reach ``rate``."""

    rate: float
    w: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not self.rate > 0.0:
            raise ValueError("rate target must be positive")
        if self.w is not None:
            w = tuple(float(x) for x in self.w)
            if any(x <= 0.0 for x in w):
                raise ValueError("rate weights must be positive")
            object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class Individual:
    """Average rate of user ``k`` must reach ``rates[k]``."""

    rates: tuple[float, ...]

    def __post_init__(self) -> None:
        rates = tuple(float(x) for x in self.rates)
        if not rates or any(r <= 0.0 for r in rates):
            raise ValueError("rate targets must be positive")
        object.__setattr__(self, "rates", rates)


Constraint = Union[WeightedSum, Individual]


@dataclass(frozen=True)
class RegionPoint:
    mu: tuple[float, ...]
    pbar: tuple[float, ...]
    achieved_rates: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(p < 0.0 for p in self.pbar):
            raise ValueError("average powers must be non-negative")

    @property
    def objective(self) -> float:
        return math.fsum(m * p for m, p in zip(self.mu, self.pbar))


@dataclass(frozen=True)
class SavingsRow:
    ratio: float
    mu: tuple[float, ...]
    optimal: float
    policy_a: float
    policy_b: float

    @property
    def db_vs_a(self) -> float:
        return 10.0 * math.log10(self.policy_a / self.optimal)

    @property
    def db_vs_b(self) -> float:
        return 10.0 * math.log10(self.policy_b / self.optimal)


# --------------------------------------------------------------------------
# optimal solves and region tracing


def _with_weights(profiles, mu=None, w=None) -> list[UserProfile]:
    out = []
    for k, p in enumerate(profiles):
        changes = {}
        if mu is not None:
            changes["mu"] = float(mu[k])
        if w is not None:
            changes["w"] = float(w[k])
        out.append(replace(p, **changes))
    return out


def solve_optimal(profiles, sample: SampleSet, constraint: Constraint, **solver_kw):
    """Dispatch to the weighted-sum or individual-rate solver.

    Returns
    -------
    (pbar, achieved_rates, solution)
    """
    if isinstance(constraint, WeightedSum):
        profs = _with_weights(profiles, w=constraint.w) if constraint.w is not None else list(profiles)
        sol = wsum.solve(profs, sample, constraint.rate, **solver_kw)
        return np.array(sol.avg_power), np.array(sol.user_rates), sol
    if isinstance(constraint, Individual):
        if len(constraint.rates) != len(profiles):
            raise ValueError("need one rate target per user")
        sol = indiv.solve(profiles, sample, constraint.rates, raise_on_failure=True, **solver_kw)
        return np.array(sol.avg_power), np.array(sol.avg_rate), sol
    raise TypeError(f"unknown constraint {constraint!r}")


def direction_grid(directions: int, eps: float = 1e-3) -> np.ndarray:
    """Cosine-spaced ``t`` values in ``[eps, 1 - eps]``, symmetric about 1/2."""
    if directions < 2:
        raise ValueError("need at least two directions")
    j = np.arange(directions)
    t = 0.5 * (1.0 - np.cos(np.pi * j / (directions - 1)))
    return eps + (1.0 - 2.0 * eps) * t


def trace_region(
    profiles: Sequence[UserProfile],
    sample: SampleSet,
    constraint: Constraint,
    directions: int = 33,
    eps: float = 1e-3,
    **solver_kw,
) -> list[RegionPoint]:
    """Lower boundary of the two-user power region, sorted by ``pbar[0]``."""
    if len(profiles) != 2:
        raise ValueError("region tracing sweeps two-user cost directions")
    points = []
    for t in direction_grid(directions, eps):
        mu = (float(t), float(1.0 - t))
        pbar, rates, _ = solve_optimal(_with_weights(profiles, mu=mu), sample, constraint, **solver_kw)
        points.append(RegionPoint(mu, tuple(float(x) for x in pbar), tuple(float(x) for x in rates)))
    points.sort(key=lambda p: (p.pbar[0], p.mu[0]))
    return points


# --------------------------------------------------------------------------
# baselines


def baseline_targets(profiles: Sequence[UserProfile], constraint: Constraint) -> np.ndarray:
    """Per-user rate targets of the equal-time baselines.

    A weighted-sum target ``R`` is split evenly: user ``k`` must carry
    ``R / (K w_k)``.
    """
    k_users = len(profiles)
    if isinstance(constraint, Individual):
        return np.array(constraint.rates, dtype=float)
    w = constraint.w if constraint.w is not None else tuple(p.w for p in profiles)
    return np.array([constraint.rate / (k_users * wk) for wk in w])


def _increasing_root(fn, target: float, x0: float = 1.0) -> float:
    """Root of ``fn(x) = target`` for non-decreasing ``fn`` on ``x > 0``."""
    lo = hi = x0
    for _ in range(2000):
        if fn(hi) >= target:
            break
        lo, hi = hi, hi * 2.0
    else:
        raise InfeasibleError(f"target {target} unreachable")
    for _ in range(2000):
        if fn(lo) < target:
            break
        hi, lo = lo, lo / 2.0
    else:
        return lo
    y = brentq(lambda y: fn(math.exp(y)) - target, math.log(lo), math.log(hi), xtol=1e-13, rtol=1e-13)
    return math.exp(y)


def _check_baseline_feasible(profiles, targets) -> None:
    k_users = len(profiles)
    for k, (p, t) in enumerate(zip(profiles, targets)):
        if p.is_amc and k_users * t >= p.codebook.max_rate:
            raise InfeasibleError(
                f"user {k} needs rate {k_users * t:.4g} in its 1/{k_users} share, above its top mode"
            )


def policy_a(profiles: Sequence[UserProfile], sample: SampleSet, targets: Sequence[float]) -> np.ndarray:
    """Average powers when each user water-fills alone in a fixed ``1/K`` time share."""
    k_users = len(profiles)
    targets = np.asarray(targets, dtype=float)
    _check_baseline_feasible(profiles, targets)
    out = []
    for k, prof in enumerate(profiles):
        alone = [replace(prof, mu=1.0, w=1.0)]
        col = SampleSet(sample.gains[:, [k]], seed=sample.seed)
        sol = indiv.solve(alone, col, [k_users * targets[k]], raise_on_failure=True)
        out.append(sol.avg_power[0] / k_users)
    return np.array(out)


def policy_b(profiles: Sequence[UserProfile], sample: SampleSet, targets: Sequence[float]) -> np.ndarray:
    """Average powers when each user sends at a constant power in a fixed ``1/K`` time share."""
    k_users = len(profiles)
    targets = np.asarray(targets, dtype=float)
    _check_baseline_feasible(profiles, targets)
    out = []
    for k, prof in enumerate(profiles):
        h = sample.gains[:, k]
        need = k_users * targets[k]
        if prof.is_amc:
            rho = np.array(prof.codebook.rho)
            p_modes = np.array(prof.codebook.p)

            def mode_rates(budget):
                # index of the highest affordable mode, -1 when none is
                idx = np.searchsorted(p_modes, budget * h, side="right") - 1
                return np.where(idx >= 0, rho[np.maximum(idx, 0)], 0.0), idx >= 0

            budget = _increasing_root(lambda b: float(np.mean(mode_rates(b)[0])), need, x0=p_modes[0])
            on = mode_rates(budget)[1]
            out.append(budget * float(np.mean(on)) / k_users)
        else:
            budget = _increasing_root(lambda p: float(np.mean(np.log2(1.0 + p * h))), need)
            out.append(budget / k_users)
    return np.array(out)


def power_savings(
    profiles: Sequence[UserProfile],
    sample: SampleSet,
    constraint: Constraint,
    cost_ratio_grid: Iterable[float] = tuple(np.logspace(-2, 2, 9)),
    **solver_kw,
) -> list[SavingsRow]:
    """Weighted-power savings of the optimal policy over policies A and B.

    For a ratio ``q = mu_1 / mu_2`` the cost direction is
    ``(q / (1 + q), 1 / (1 + q))``; savings are ``10 log10`` of the baseline
    objective over the optimal objective at that direction.
    """
    if len(profiles) != 2:
        raise ValueError("cost-ratio sweeps need two users")
    targets = baseline_targets(profiles, constraint)
    base_profiles = profiles
    if isinstance(constraint, WeightedSum) and constraint.w is not None:
        base_profiles = _with_weights(profiles, w=constraint.w)
    pa = policy_a(base_profiles, sample, targets)
    pb = policy_b(base_profiles, sample, targets)
    rows = []
    for q in cost_ratio_grid:
        q = float(q)
        if not q > 0.0:
            raise ValueError("cost ratios must be positive")
        mu = np.array([q / (1.0 + q), 1.0 / (1.0 + q)])
        _, _, sol = solve_optimal(_with_weights(profiles, mu=mu), sample, constraint, **solver_kw)
        rows.append(
            SavingsRow(q, tuple(mu.tolist()), sol.objective, float(mu @ pa), float(mu @ pb))
        )
    return rows


# --------------------------------------------------------------------------
# frequency-selective channels and slotted time


def allocate_freq_selective(
    profiles: Sequence[UserProfile], spectra, constraint: Constraint, **solver_kw
):
    """Solve over ``(state, bin)`` pairs of per-bin gains shaped ``(N, bins, K)``.

    Every pair is treated as its own fading realization: with uniform bins
    the average over states and frequency is the plain mean over pairs, so
    the flat-fading solvers apply unchanged.
    """
    spectra = np.asarray(spectra, dtype=float)
    if spectra.ndim != 3:
        raise ValueError("spectra must be shaped (states, bins, users)")
    n, bins, k_users = spectra.shape
    if k_users != len(profiles):
        raise ValueError("spectra and profiles disagree on the number of users")
    flat = SampleSet(spectra.reshape(n * bins, k_users))
    return solve_optimal(profiles, flat, constraint, **solver_kw)[2]


def quantize_time(alloc: Allocation, slots: int) -> Allocation:
    """Round time fractions to multiples of ``1/slots`` by largest remainder.

    The number of slots handed out is ``round(sum(tau) * slots)``, so the
    quantized fractions never sum above one. Users keep their rates; a user
    rounded down to zero slots is dropped.
    """
    if isinstance(slots, bool) or int(slots) != slots or slots < 1:
        raise ValueError("slots must be a positive integer")
    slots = int(slots)
    tau = np.array(alloc.tau)
    total = min(int(round(tau.sum() * slots)), slots)
    exact = tau * slots
    base = np.floor(exact + 1e-12).astype(int)
    left = total - int(base.sum())
    if left > 0:
        order = sorted(range(len(tau)), key=lambda k: (-(exact[k] - base[k]), k))
        for k in order[:left]:
            base[k] += 1
    elif left < 0:
        order = sorted(range(len(tau)), key=lambda k: (exact[k] - base[k], k))
        for k in order:
            if left == 0:
                break
            if base[k] > 0:
                base[k] -= 1
                left += 1
    new_tau = tuple(b / slots for b in base)
    return Allocation(new_tau, tuple(r if b > 0 else 0.0 for r, b in zip(alloc.rate, base)))


# --------------------------------------------------------------------------
# region checks and output


def region_is_convex(points: Sequence[RegionPoint], slack: float = 1e-6) -> bool:
    """Whether the boundary ``pbar[1]`` versus ``pbar[0]`` turns left at every triple."""
    pts = sorted((p.pbar for p in points), key=lambda q: q[0])
    scale = max(max(abs(c) for c in q) for q in pts) or 1.0
    for a, b, c in zip(pts, pts[1:], pts[2:]):
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cross < -slack * scale * scale:
            return False
    return True


def region_containment_gap(lower: Sequence[RegionPoint], inner: Sequence[RegionPoint]) -> float:
    """Smallest relative margin of ``inner`` points above ``lower``'s support lines.

    For every direction ``mu`` of ``lower`` the support value is
    ``mu . pbar(mu)``; every point of ``inner`` should reach it. Returns
    ``min (mu . q - support) / support`` over all pairs, which is
    non-negative when ``inner`` lies inside the region bounded by ``lower``.
    """
    gap = math.inf
    for lp in lower:
        mu = np.array(lp.mu)
        support = float(mu @ np.array(lp.pbar))
        for q in inner:
            gap = min(gap, (float(mu @ np.array(q.pbar)) - support) / support)
    return gap


def region_asymmetry(points: Sequence[RegionPoint], mu_atol: float = 1e-9) -> float:
    """Largest ``|p(mu) - swap(p(swap(mu)))| / |p(mu)|`` over matched direction pairs."""
    worst = 0.0
    matched = 0
    for p in points:
        for q in points:
            if abs(p.mu[0] - q.mu[1]) <= mu_atol and abs(p.mu[1] - q.mu[0]) <= mu_atol:
                a = np.array(p.pbar)
                b = np.array(q.pbar)[::-1]
                worst = max(worst, float(np.linalg.norm(a - b) / np.linalg.norm(a)))
                matched += 1
    if matched == 0:
        raise ValueError("no direction pairs related by a swap")
    return worst


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def write_region_csv(path, points: Sequence[RegionPoint]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        k = len(points[0].pbar) if points else 2
        writer.writerow(
            [f"mu{i + 1}" for i in range(k)] + [f"p{i + 1}" for i in range(k)] + [f"r{i + 1}" for i in range(k)]
        )
        for p in points:
            writer.writerow([_fmt(x) for x in (*p.mu, *p.pbar, *p.achieved_rates)])


def write_savings_csv(path, rows: Sequence[SavingsRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ratio", "dB_vs_A", "dB_vs_B", "optimal", "policy_a", "policy_b"])
        for r in rows:
            writer.writerow([_fmt(x) for x in (r.ratio, r.db_vs_a, r.db_vs_b, r.optimal, r.policy_a, r.policy_b)])
