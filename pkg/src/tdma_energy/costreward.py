"""Per-state power-cost vs rate-reward curves and their convex envelopes.

For one fading state each user ``k`` turns a rate-reward ``x = w_k r_k``
into a weighted power cost ``f_k(x)``. The cheapest way to deliver a total
reward ``R`` in that block (with time sharing) is the convex envelope ``J``
of ``min_k f_k``. Two codebook models are supported:

* capacity-achieving codebooks, ``f_k(x) = (mu_k / h_k) (2**(x / w_k) - 1)``;
  the envelope alternates between curve pieces and common tangents;
* finite AMC mode tables, where every ``f_k`` is piecewise linear and the
  envelope is the lower convex hull of the mode points.

Rates are in bits per channel use, so every logarithm of a rate is base 2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .channel import FadingState

log = logging.getLogger(__name__)

LN2 = math.log(2.0)
INF = math.inf
TIE_RTOL = 1e-12
_LOG_MAX = math.log(np.finfo(float).max)
ZERO_COST_EPS = 1e-9

__all__ = [
    "Infinite",
    "AmcTable",
    "UserProfile",
    "BracketError",
    "exp_cr",
    "exp_cr_derivative",
    "exp_cr_derivative_inverse",
    "amc_upsilon",
    "tangent_gap",
    "tangent_slope",
    "OperatingPoint",
    "WaterfillPoint",
    "ContinuousEnvelope",
    "PiecewiseEnvelope",
    "Envelope",
    "build_envelope",
    "build_envelope_continuous",
    "build_envelope_amc",
    "envelope_eval",
    "envelope_rate_at_level",
    "regularize_costs",
]


class BracketError(RuntimeError):
    """A monotone root could not be bracketed."""


@dataclass(frozen=True)
class Infinite:
    """Capacity-achieving codebook: any rate at power ``2**r - 1`` per unit gain."""

    kind = "infinite"

    def to_dict(self) -> dict:
        return {"kind": "infinite"}


@dataclass(frozen=True)
class AmcTable:
    """Finite set of AMC modes ``(rho_l, p_l)``; mode 0 is the implicit ``(0, 0)``.

    ``rho`` is the rate in bits/s/Hz and ``p`` the minimum received SNR that
    meets the error target. Rates and powers must increase strictly and so
    must the incremental slopes ``gamma_l``, otherwise the interpolated
    power-rate curve would not be convex.
    """

    rho: tuple[float, ...]
    p: tuple[float, ...]
    kind = "amc"

    def __post_init__(self) -> None:
        rho = tuple(float(r) for r in self.rho)
        p = tuple(float(x) for x in self.p)
        if len(rho) != len(p):
            raise ValueError("rho and p must have the same length")
        if not rho:
            raise ValueError("an AMC table needs at least one mode")
        prev_r, prev_p, prev_g = 0.0, 0.0, -INF
        for r, q in zip(rho, p):
            if not (math.isfinite(r) and math.isfinite(q)):
                raise ValueError("mode rates and powers must be finite")
            if r <= prev_r or q <= prev_p:
                raise ValueError("mode rates and powers must be strictly increasing and positive")
            g = (q - prev_p) / (r - prev_r)
            if g <= prev_g:
                raise ValueError("incremental power per bit must be strictly increasing (convexity)")
            prev_r, prev_p, prev_g = r, q, g
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_modes(cls, modes: Sequence[tuple[float, float]]) -> "AmcTable":
        return cls(tuple(m[0] for m in modes), tuple(m[1] for m in modes))

    @property
    def num_modes(self) -> int:
        return len(self.rho)

    @property
    def max_rate(self) -> float:
        return self.rho[-1]

    @property
    def gamma(self) -> tuple[float, ...]:
        rho = (0.0,) + self.rho
        p = (0.0,) + self.p
        return tuple((p[l] - p[l - 1]) / (rho[l] - rho[l - 1]) for l in range(1, len(rho)))

    def modes(self) -> list[tuple[float, float]]:
        return list(zip(self.rho, self.p))

    def to_dict(self) -> dict:
        return {"kind": "amc", "modes": [{"rho": r, "p": q} for r, q in zip(self.rho, self.p)]}


Codebook = Union[Infinite, AmcTable]


@dataclass(frozen=True)
class UserProfile:
    """Rate-reward weight ``w``, power-cost weight ``mu`` and codebook of one user."""

    w: float = 1.0
    mu: float = 1.0
    codebook: Codebook = field(default_factory=Infinite)

    def __post_init__(self) -> None:
        if not (self.w > 0.0 and math.isfinite(self.w)):
            raise ValueError(f"w must be positive, got {self.w!r}")
        if not (self.mu >= 0.0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be non-negative, got {self.mu!r}")
        if not isinstance(self.codebook, (Infinite, AmcTable)):
            raise TypeError(f"unsupported codebook {self.codebook!r}")

    @property
    def is_amc(self) -> bool:
        return isinstance(self.codebook, AmcTable)


def regularize_costs(profiles: Sequence[UserProfile], eps: float = ZERO_COST_EPS) -> list[UserProfile]:
    """Replace zero cost weights by ``eps`` so extreme points are approached, not hit."""
    return [replace(p, mu=eps) if p.mu == 0.0 else p for p in profiles]


def codebook_kind(profiles: Sequence[UserProfile]) -> str:
    kinds = {p.codebook.kind for p in profiles}
    if len(kinds) != 1:
        raise ValueError("all users must share the same codebook kind")
    return kinds.pop()


# --------------------------------------------------------------------------
# single-user curves


def exp_cr(mu: float, w: float, h: float, x):
    """Power cost ``(mu/h)(2**(x/w) - 1)`` of rate-reward ``x``."""
    return mu / h * np.expm1(LN2 * np.asarray(x, dtype=float) / w)


def exp_cr_derivative(mu: float, w: float, h: float, x):
    """First derivative of :func:`exp_cr` with respect to ``x``."""
    return LN2 * mu / (w * h) * np.exp2(np.asarray(x, dtype=float) / w)


def exp_cr_derivative_inverse(mu: float, w: float, h: float, slope):
    """Rate-reward at which :func:`exp_cr` has the given slope (may be negative)."""
    return w * np.log2(np.asarray(slope, dtype=float) * w * h / (LN2 * mu))


def amc_upsilon(table: AmcTable, h: float, r: float) -> float:
    """Transmit power needed for rate ``r`` by time sharing adjacent modes.

    Returns ``inf`` above the top mode rate.
    """
    if r < 0.0:
        raise ValueError("rate must be non-negative")
    if r > table.max_rate * (1.0 + 1e-12):
        return INF
    rho = np.concatenate(([0.0], table.rho))
    p = np.concatenate(([0.0], table.p))
    return float(np.interp(min(r, table.max_rate), rho, p)) / h


# --------------------------------------------------------------------------
# two-user common tangent


def _curve_params(profile: UserProfile, h: float) -> tuple[float, float, float]:
    """(w, c, a) with ``f(x) = c (2**(x/w) - 1)`` and ``f'(0) = 1 / a``."""
    w, mu = profile.w, profile.mu
    return w, mu / h, w * h / (LN2 * mu)


def tangent_gap(x, profiles: tuple[UserProfile, UserProfile], gains: tuple[float, float]):
    """Function whose positive root is the slope of the common tangent.

    ``g(x) = x (w2 log2(x a2) - w1 log2(x a1) - (w2 - w1)/ln 2) + c2 - c1``.
    """
    w1, c1, a1 = _curve_params(profiles[0], gains[0])
    w2, c2, a2 = _curve_params(profiles[1], gains[1])
    x = np.asarray(x, dtype=float)
    return x * (w2 * np.log2(x * a2) - w1 * np.log2(x * a1) - (w2 - w1) / LN2) + c2 - c1


def tangent_slope(
    profiles: tuple[UserProfile, UserProfile], gains: tuple[float, float]
) -> tuple[float, float, float]:
    """Slope and touching points of the common tangent of two cost curves.

    Parameters
    ----------
    profiles : pair of UserProfile
        Ordered so that ``w1 < w2`` and ``mu1/(w1 h1) < mu2/(w2 h2)``.
    gains : pair of float
        Channel gains of the two users.

    Returns
    -------
    (s0, R_a, R_b) : tuple of float
        Common slope, touching reward on the first curve and on the second.

    Raises
    ------
    BracketError
        If no sign change is found (parameters outside the crossing regime
        or floating-point overflow).
    """
    w1, c1, a1 = _curve_params(profiles[0], gains[0])
    w2, c2, a2 = _curve_params(profiles[1], gains[1])
    if not (w1 < w2) or not (1.0 / a1 < 1.0 / a2):
        raise BracketError("tangent requires w1 < w2 and mu1/(w1 h1) < mu2/(w2 h2)")
    dw = w2 - w1
    la1, la2 = math.log(a1), math.log(a2)
    # minimum of g sits at xi; the root lies above it
    y_xi = (w1 * la1 - w2 * la2) / dw
    dc = c2 - c1

    def gap_over_x(y: float) -> float:
        return (dw * y + w2 * la2 - w1 * la1 - dw) / LN2 + dc * math.exp(-y)

    lo = y_xi + math.log1p(1e-12)
    try:
        f_lo = gap_over_x(lo)
    except OverflowError as exc:
        raise BracketError("overflow evaluating the tangent equation") from exc
    if not f_lo < 0.0:
        raise BracketError(f"no sign change above xi (g(xi) = {f_lo!r})")
    step = 64.0 * LN2
    hi = lo + step
    for _ in range(64):
        try:
            f_hi = gap_over_x(hi)
        except OverflowError:
            f_hi = INF
        if f_hi > 0.0:
            break
        lo, hi = hi, hi + step
        step *= 2.0
    else:
        raise BracketError("could not bracket the tangent slope")
    y0 = brentq(gap_over_x, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    if y0 >= _LOG_MAX:
        # nearly equal weights push the tangent past any representable slope
        raise BracketError(f"tangent slope exp({y0:.6g}) overflows")
    s0 = math.exp(y0)
    r_a = w1 * (y0 + la1) / LN2
    r_b = w2 * (y0 + la2) / LN2
    if not (0.0 < r_a < r_b):
        raise BracketError(f"tangent touching points out of order: {r_a!r}, {r_b!r}")
    return s0, r_a, r_b


# --------------------------------------------------------------------------
# envelopes


@dataclass(frozen=True)
class OperatingPoint:
    """One end of a per-state allocation: ``user`` (``None`` = idle) at reward ``reward``."""

    user: int | None
    reward: float
    mode: int | None = None


@dataclass(frozen=True)
class WaterfillPoint:
    """Where a water level meets an envelope.

    ``regime`` is ``"below"`` (everybody defers), ``"interior"`` (a single
    operating point in ``high``) or ``"tie"`` (the level equals an envelope
    slope and the block may be time shared between ``low`` and ``high``).
    """

    regime: str
    high: OperatingPoint | None = None
    low: OperatingPoint | None = None
    segment: int | None = None


@dataclass(frozen=True)
class ContinuousEnvelope:
    """Envelope of capacity-achieving cost curves.

    ``users[m]`` owns the curve piece ``[rb[m-1], ra[m]]``; between
    ``ra[m]`` and ``rb[m]`` the envelope follows the common tangent of
    slope ``slopes[m]``. The last slope is ``inf``.
    """

    users: tuple[int, ...]
    slopes: tuple[float, ...]
    ra: tuple[float, ...]
    rb: tuple[float, ...]
    w: tuple[float, ...]
    c: tuple[float, ...]
    kind = "continuous"

    @property
    def num_active(self) -> int:
        return len(self.users)

    def _piece_value(self, m: int, x: float) -> float:
        return self.c[m] * math.expm1(LN2 * x / self.w[m])

    def _piece_slope(self, m: int, x: float) -> float:
        return self.c[m] * LN2 / self.w[m] * 2.0 ** (x / self.w[m])

    def locate(self, R: float) -> tuple[str, int]:
        """Piece containing ``R``: ``("curve", m)`` or ``("tangent", m)``."""
        for m in range(self.num_active - 1):
            if R <= self.ra[m]:
                return "curve", m
            if R < self.rb[m]:
                return "tangent", m
        return "curve", self.num_active - 1

    def eval(self, R: float) -> float:
        if R <= 0.0:
            return 0.0
        kind, m = self.locate(R)
        if kind == "curve":
            return self._piece_value(m, R)
        return self._piece_value(m, self.ra[m]) + self.slopes[m] * (R - self.ra[m])

    def slope_at(self, R: float) -> float:
        kind, m = self.locate(max(R, 0.0))
        if kind == "curve":
            return self._piece_slope(m, max(R, 0.0))
        return self.slopes[m]

    def rate_at_level(self, lam: float, tie_rtol: float = TIE_RTOL) -> WaterfillPoint:
        if lam < 0.0:
            raise ValueError("water level must be non-negative")
        for m in range(self.num_active):
            s = self.slopes[m]
            if m < self.num_active - 1 and abs(lam - s) <= tie_rtol * s:
                return WaterfillPoint(
                    "tie",
                    high=OperatingPoint(self.users[m + 1], self.rb[m]),
                    low=OperatingPoint(self.users[m], self.ra[m]),
                    segment=m,
                )
            if lam < s:
                if lam <= 0.0:
                    return WaterfillPoint("below")
                reward = self.w[m] * math.log2(lam * self.w[m] / (LN2 * self.c[m]))
                if reward <= 0.0:
                    return WaterfillPoint("below")
                return WaterfillPoint("interior", high=OperatingPoint(self.users[m], reward), segment=m)
        raise AssertionError("last envelope slope must be infinite")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "active_users": list(self.users),
            "slopes": [_json_float(s) for s in self.slopes],
            "breakpoints": [{"R_a": a, "R_b": b} for a, b in zip(self.ra, self.rb)],
        }


@dataclass(frozen=True)
class PiecewiseEnvelope:
    """Lower convex hull through the AMC mode points, anchored at the origin.

    ``R[m]``, ``C[m]`` are the corners, ``owners[m] = (user, mode)`` labels
    them (modes count from 1) and ``slopes[m]`` is the slope of the segment
    that ends at corner ``m``.
    """

    R: tuple[float, ...]
    C: tuple[float, ...]
    owners: tuple[tuple[int, int], ...]
    slopes: tuple[float, ...]
    kind = "piecewise_linear"

    @property
    def num_corners(self) -> int:
        return len(self.R)

    def eval(self, R: float) -> float:
        if R <= 0.0:
            return 0.0
        if R > self.R[-1] * (1.0 + 1e-12):
            return INF
        prev_r, prev_c = 0.0, 0.0
        for m in range(self.num_corners):
            if R <= self.R[m]:
                return prev_c + self.slopes[m] * (R - prev_r)
            prev_r, prev_c = self.R[m], self.C[m]
        return self.C[-1]

    def slope_at(self, R: float) -> float:
        """Right derivative at ``R`` (``inf`` at and beyond the last corner)."""
        for m in range(self.num_corners):
            if R < self.R[m]:
                return self.slopes[m]
        return INF

    def rate_at_level(self, lam: float, tie_rtol: float = TIE_RTOL) -> WaterfillPoint:
        if lam < 0.0:
            raise ValueError("water level must be non-negative")
        best = -1
        for m, s in enumerate(self.slopes):
            if abs(lam - s) <= tie_rtol * s:
                low = OperatingPoint(None, 0.0) if m == 0 else self._point(m - 1)
                return WaterfillPoint("tie", high=self._point(m), low=low, segment=m)
            if s < lam:
                best = m
        if best < 0:
            return WaterfillPoint("below")
        return WaterfillPoint("interior", high=self._point(best), segment=best)

    def _point(self, m: int) -> OperatingPoint:
        user, mode = self.owners[m]
        return OperatingPoint(user, self.R[m], mode)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "corners": [
                {"R": r, "C": c, "user": u, "mode": l, "slope": s}
                for r, c, (u, l), s in zip(self.R, self.C, self.owners, self.slopes)
            ],
        }


Envelope = Union[ContinuousEnvelope, PiecewiseEnvelope]


def _json_float(x: float):
    return x if math.isfinite(x) else "inf"


def _dominance_filter(cands: list[int], w: Sequence[float], ratio: Sequence[float]) -> list[int]:
    """Drop users whose curve lies above another user's everywhere."""
    keep = []
    for k in cands:
        dominated = False
        for i in cands:
            if i == k:
                continue
            if w[k] <= w[i] and ratio[k] >= ratio[i]:
                if w[k] == w[i] and ratio[k] == ratio[i] and k < i:
                    continue
                dominated = True
                break
        if not dominated:
            keep.append(k)
    return sorted(keep, key=lambda k: (w[k], k))


def build_envelope_continuous(profiles: Sequence[UserProfile], state: FadingState) -> ContinuousEnvelope:
    """Convex envelope of the capacity-achieving cost curves at one state.

    Users with ``mu == 0`` are skipped; see :func:`regularize_costs`.
    """
    if not profiles:
        raise ValueError("need at least one user")
    gains = state.gains if isinstance(state, FadingState) else tuple(state)
    if len(gains) != len(profiles):
        raise ValueError("state and profiles disagree on the number of users")
    if any(p.is_amc for p in profiles):
        raise ValueError("continuous envelope needs capacity-achieving codebooks")
    w = [p.w for p in profiles]
    ratio = [p.mu / (p.w * h) if p.mu > 0 else INF for p, h in zip(profiles, gains)]
    cands = [k for k, p in enumerate(profiles) if p.mu > 0.0]
    if not cands:
        raise ValueError("every user has zero cost weight")
    remaining = _dominance_filter(cands, w, ratio)

    users, slopes, ra, rb = [], [], [], []
    while True:
        first = remaining[0]
        users.append(first)
        if len(remaining) < 2:
            slopes.append(INF)
            break
        best = None
        for i in range(1, len(remaining)):
            other = remaining[i]
            try:
                s, a, b = tangent_slope((profiles[first], profiles[other]), (gains[first], gains[other]))
            except BracketError as exc:
                log.warning("users %d and %d share no computable tangent (%s); pair skipped", first, other, exc)
                continue
            if best is None or s < best[0] * (1.0 - TIE_RTOL):
                best = (s, a, b, i)
        if best is None:
            slopes.append(INF)
            break
        s, a, b, i_star = best
        slopes.append(s)
        ra.append(a)
        rb.append(b)
        remaining = remaining[i_star:]

    return ContinuousEnvelope(
        users=tuple(users),
        slopes=tuple(slopes),
        ra=tuple(ra),
        rb=tuple(rb),
        w=tuple(profiles[u].w for u in users),
        c=tuple(profiles[u].mu / gains[u] for u in users),
    )


def build_envelope_amc(profiles: Sequence[UserProfile], state: FadingState) -> PiecewiseEnvelope:
    """Lower convex hull of the AMC mode points ``(w rho, mu p / h)`` at one state.

    Starting from the origin, the next corner is the remaining point reached
    with the smallest slope (the farthest one on ties); points left of the
    new corner are discarded.
    """
    gains = state.gains if isinstance(state, FadingState) else tuple(state)
    if len(gains) != len(profiles):
        raise ValueError("state and profiles disagree on the number of users")
    pts = []
    for k, (prof, h) in enumerate(zip(profiles, gains)):
        if not prof.is_amc:
            raise ValueError("AMC envelope needs AMC codebooks for every user")
        for l, (r, p) in enumerate(zip(prof.codebook.rho, prof.codebook.p), start=1):
            pts.append((prof.w * r, prof.mu * p / h, k, l))
    if not pts:
        raise ValueError("all mode tables are empty")

    R, C, owners, slopes = [], [], [], []
    x0, y0 = 0.0, 0.0
    while pts:
        best = None
        for x, y, k, l in pts:
            s = (y - y0) / (x - x0)
            if best is None or s < best[0] * (1.0 - TIE_RTOL) - 1e-300:
                best = (s, x, y, k, l)
            elif abs(s - best[0]) <= TIE_RTOL * abs(best[0]) and x > best[1]:
                best = (best[0], x, y, k, l)
        s, x, y, k, l = best
        R.append(x)
        C.append(y)
        owners.append((k, l))
        slopes.append(s)
        x0, y0 = x, y
        pts = [q for q in pts if q[0] > x0]
    return PiecewiseEnvelope(tuple(R), tuple(C), tuple(owners), tuple(slopes))


def build_envelope(profiles: Sequence[UserProfile], state: FadingState) -> Envelope:
    if codebook_kind(profiles) == "amc":
        return build_envelope_amc(profiles, state)
    return build_envelope_continuous(profiles, state)


def envelope_eval(env: Envelope, R: float) -> float:
    """Minimum weighted power cost of delivering reward ``R`` in the block."""
    if R < 0.0:
        raise ValueError("rate-reward must be non-negative")
    return env.eval(R)


def envelope_rate_at_level(env: Envelope, lam: float) -> WaterfillPoint:
    """Classify water level ``lam`` against the envelope slopes."""
    return env.rate_at_level(lam)
