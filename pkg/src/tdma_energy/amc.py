"""AMC mode tables from square M-QAM constellations under a symbol-error target.

The symbol error probability of square M-QAM at SNR ``snr`` is
``1 - (1 - P)**2`` where ``P = 2 (1 - 1/sqrt(M)) Q(sqrt(3 snr / (M - 1)))``
is the error rate of each of the two ``sqrt(M)``-PAM branches. ``Q`` is taken
from ``scipy.special.erfc``, whose relative error is a few ulps over the
range used here, so SEP targets down to ``1e-12`` stay well resolved.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from scipy.special import erfc

from .costreward import AmcTable

__all__ = [
    "QamSpec",
    "q_function",
    "qam_sep",
    "min_snr_for_sep",
    "build_mode_table",
    "table_to_json",
    "table_from_json",
]


def _check_square(m: int) -> int:
    if isinstance(m, bool) or int(m) != m:
        raise ValueError(f"constellation size must be an integer, got {m!r}")
    m = int(m)
    root = math.isqrt(m) if m > 0 else 0
    if m < 4 or root * root != m:
        raise ValueError(f"constellation size must be a perfect square >= 4, got {m}")
    return m


@dataclass(frozen=True)
class QamSpec:
    """Constellation sizes, SEP target and the noise power used for unit conversion."""

    sizes: tuple[int, ...] = (4, 16, 64)
    sep_target: float = 1e-3
    noise_floor: float = 1.0

    def __post_init__(self) -> None:
        sizes = tuple(_check_square(m) for m in self.sizes)
        if not sizes:
            raise ValueError("need at least one constellation")
        if len(set(sizes)) != len(sizes):
            raise ValueError("constellation sizes must be distinct")
        if not 0.0 < self.sep_target < 1.0:
            raise ValueError("sep_target must lie in (0, 1)")
        if not self.noise_floor > 0.0:
            raise ValueError("noise_floor must be positive")
        object.__setattr__(self, "sizes", tuple(sorted(sizes)))


def q_function(x: float) -> float:
    """Gaussian tail probability ``P(N(0,1) > x)``."""
    return 0.5 * float(erfc(x / math.sqrt(2.0)))


def qam_sep(M: int, snr: float) -> float:
    """Symbol error probability of square ``M``-QAM at received SNR ``snr``."""
    M = _check_square(M)
    if snr < 0.0:
        raise ValueError("snr must be non-negative")
    p = 2.0 * (1.0 - 1.0 / math.sqrt(M)) * q_function(math.sqrt(3.0 * snr / (M - 1)))
    # 1 - (1 - p)**2 without cancellation
    return p * (2.0 - p)


def min_snr_for_sep(M: int, sep: float, rtol: float = 1e-14) -> float:
    """Smallest SNR whose symbol error probability does not exceed ``sep``.

    Bisection in log-SNR; ``qam_sep`` is strictly decreasing in ``snr``.
    """
    M = _check_square(M)
    ceiling = qam_sep(M, 0.0)
    if not 0.0 < sep < ceiling:
        raise ValueError(f"sep must lie in (0, {ceiling}) for M={M}, got {sep!r}")
    lo, hi = 1e-12, 1.0
    while qam_sep(M, hi) > sep:
        lo, hi = hi, hi * 2.0
        if hi > 1e300:
            raise ValueError("sep target too small to reach")
    while qam_sep(M, lo) <= sep:
        lo /= 2.0
    while hi / lo - 1.0 > rtol:
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        if qam_sep(M, mid) > sep:
            lo = mid
        else:
            hi = mid
    return hi


def build_mode_table(spec: QamSpec) -> AmcTable:
    """Mode table ``(log2 M, min SNR)`` for every constellation in ``spec``.

    Raises
    ------
    ValueError
        If the resulting power-rate curve is not convex.
    """
    rho = tuple(math.log2(m) for m in spec.sizes)
    p = tuple(min_snr_for_sep(m, spec.sep_target) for m in spec.sizes)
    try:
        return AmcTable(rho, p)
    except ValueError as exc:
        raise ValueError(f"QAM table for {spec.sizes} at SEP {spec.sep_target} is not convex: {exc}") from exc


def table_to_json(table: AmcTable) -> str:
    return json.dumps([{"rho": r, "p": p} for r, p in table.modes()], indent=2)


def table_from_json(text: str | Sequence[dict]) -> AmcTable:
    """Parse ``[{"rho": ..., "p": ...}, ...]`` (a JSON string or the decoded list)."""
    rows = json.loads(text) if isinstance(text, str) else text
    try:
        return AmcTable.from_modes([(float(row["rho"]), float(row["p"])) for row in rows])
    except (KeyError, TypeError) as exc:
        raise ValueError("mode tables are lists of {'rho': ..., 'p': ...} objects") from exc
