"""Block-fading channel models, seeded sampling and empirical expectations.

All gains are channel *power* gains normalized by the noise power, so a
state ``h`` turns a transmit power ``p`` into the received SNR ``p * h``.

Random numbers come from numpy's ``PCG64`` bit generator. A sample drawn
with integer ``seed`` uses ``numpy.random.SeedSequence(seed).spawn(K)`` and
user ``k`` draws every one of its gains from child stream ``k``; the streams
never interleave, so adding a user does not perturb the draws of the others.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence, Union

import numpy as np

__all__ = [
    "RNG_NAME",
    "FadingState",
    "RayleighPower",
    "Discrete",
    "Constant",
    "ChannelModel",
    "SampleSet",
    "sample_states",
    "expect",
    "rayleigh_cdf",
]

RNG_NAME = "numpy.PCG64/SeedSequence.spawn-per-user/v1"


@dataclass(frozen=True)
class FadingState:
    """Channel power gains of all users for one block."""

    gains: tuple[float, ...]

    def __post_init__(self) -> None:
        gains = tuple(float(g) for g in self.gains)
        if not gains:
            raise ValueError("a fading state needs at least one user")
        for g in gains:
            if not (g > 0.0 and math.isfinite(g)):
                raise ValueError(f"channel gains must be positive and finite, got {g!r}")
        object.__setattr__(self, "gains", gains)

    @property
    def num_users(self) -> int:
        return len(self.gains)

    def __getitem__(self, k: int) -> float:
        return self.gains[k]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.gains, dtype=float)


@dataclass(frozen=True)
class RayleighPower:
    """Rayleigh amplitude fading: the power gain is exponential with ``mean_gain``."""

    mean_gain: float

    def __post_init__(self) -> None:
        if not (self.mean_gain > 0.0 and math.isfinite(self.mean_gain)):
            raise ValueError(f"mean_gain must be positive and finite, got {self.mean_gain!r}")

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.exponential(self.mean_gain, size=count)

    def cdf(self, z):
        return rayleigh_cdf(self.mean_gain, z)

    @property
    def mean(self) -> float:
        return self.mean_gain


@dataclass(frozen=True)
class Discrete:
    """Finite gain distribution given as ``(gain, probability)`` atoms."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(g), float(p)) for g, p in self.points)
        if not pts:
            raise ValueError("a discrete distribution needs at least one atom")
        for g, p in pts:
            if not (g > 0.0 and math.isfinite(g)):
                raise ValueError(f"discrete gains must be positive and finite, got {g!r}")
            if p < 0.0:
                raise ValueError(f"probabilities must be non-negative, got {p!r}")
        total = math.fsum(p for _, p in pts)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1 (got {total!r})")
        object.__setattr__(self, "points", pts)

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        gains = np.array([g for g, _ in self.points])
        probs = np.array([p for _, p in self.points])
        if len(gains) == 1:
            return np.full(count, gains[0])
        return rng.choice(gains, size=count, p=probs / probs.sum())

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        for g, p in self.points:
            out = out + p * (z >= g)
        return np.clip(out, 0.0, 1.0)

    @property
    def mean(self) -> float:
        return math.fsum(g * p for g, p in self.points)


@dataclass(frozen=True)
class Constant:
    """Degenerate distribution: the gain never changes."""

    gain: float

    def __post_init__(self) -> None:
        if not (self.gain > 0.0 and math.isfinite(self.gain)):
            raise ValueError(f"gain must be positive and finite, got {self.gain!r}")

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return np.full(count, float(self.gain))

    def cdf(self, z):
        return (np.asarray(z, dtype=float) >= self.gain).astype(float)

    @property
    def mean(self) -> float:
        return float(self.gain)


Distribution = Union[RayleighPower, Discrete, Constant]


@dataclass(frozen=True)
class ChannelModel:
    """Independent per-user gain distributions."""

    users: tuple[Distribution, ...]

    def __post_init__(self) -> None:
        users = tuple(self.users)
        if not users:
            raise ValueError("channel model needs at least one user")
        for d in users:
            if not isinstance(d, (RayleighPower, Discrete, Constant)):
                raise TypeError(f"unsupported distribution {d!r}")
        object.__setattr__(self, "users", users)

    @property
    def num_users(self) -> int:
        return len(self.users)

    @classmethod
    def rayleigh(cls, mean_gains: Sequence[float]) -> "ChannelModel":
        return cls(tuple(RayleighPower(float(m)) for m in mean_gains))

    @classmethod
    def constant(cls, gains: Sequence[float]) -> "ChannelModel":
        return cls(tuple(Constant(float(g)) for g in gains))


@dataclass(frozen=True)
class SampleSet:
    """Immutable set of i.i.d. fading states stored as an ``(count, K)`` array."""

    gains: np.ndarray
    seed: int | None = None
    model: ChannelModel | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        g = np.array(self.gains, dtype=float, copy=True)
        if g.ndim == 1:
            g = g[:, None]
        if g.ndim != 2 or g.shape[0] == 0 or g.shape[1] == 0:
            raise ValueError("sample gains must be a non-empty (count, K) array")
        if not np.all(np.isfinite(g)) or np.any(g <= 0.0):
            raise ValueError("sample gains must be positive and finite")
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)

    @property
    def count(self) -> int:
        return self.gains.shape[0]

    @property
    def num_users(self) -> int:
        return self.gains.shape[1]

    def __len__(self) -> int:
        return self.count

    def __iter__(self) -> Iterator[FadingState]:
        for row in self.gains:
            yield FadingState(tuple(row))

    @property
    def states(self) -> list[FadingState]:
        return list(self)

    def state(self, i: int) -> FadingState:
        return FadingState(tuple(self.gains[i]))

    @classmethod
    def from_states(cls, states: Sequence[FadingState]) -> "SampleSet":
        return cls(np.array([s.gains for s in states], dtype=float))

    def to_csv(self, path) -> None:
        """Dump one row per state with columns ``h1..hK``."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"h{k + 1}" for k in range(self.num_users)])
            for row in self.gains:
                writer.writerow([format(x, ".17g") for x in row])


def sample_states(model: ChannelModel, count: int, seed: int) -> SampleSet:
    """Draw ``count`` i.i.d. fading states from ``model``.

    Parameters
    ----------
    model : ChannelModel
        Per-user gain distributions (independent across users).
    count : int
        Number of blocks, at least 1.
    seed : int
        Root seed; identical ``(model, count, seed)`` give bit-identical samples.

    Returns
    -------
    SampleSet
    """
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")
    count = int(count)
    children = np.random.SeedSequence(int(seed)).spawn(model.num_users)
    cols = []
    for dist, child in zip(model.users, children):
        rng = np.random.Generator(np.random.PCG64(child))
        cols.append(dist.draw(rng, count))
    gains = np.column_stack(cols)
    # exponential draws can underflow to exactly 0 with vanishing probability
    gains = np.maximum(gains, np.finfo(float).tiny)
    return SampleSet(gains, seed=int(seed), model=model)


def expect(sample: SampleSet, f: Callable[[FadingState], float]) -> float:
    """Empirical mean of ``f`` over the states of ``sample``."""
    if sample is None or sample.count == 0:
        raise ValueError("cannot take an expectation over an empty sample")
    values = np.fromiter((f(s) for s in sample), dtype=float, count=sample.count)
    # numpy sums contiguous float arrays pairwise, which fixes the reduction order
    return float(np.sum(values) / sample.count)


def rayleigh_cdf(mean_gain: float, z):
    """CDF of an exponential power gain with mean ``mean_gain``."""
    if not (mean_gain > 0.0):
        raise ValueError(f"mean_gain must be positive, got {mean_gain!r}")
    z_arr = np.asarray(z, dtype=float)
    out = np.where(z_arr <= 0.0, 0.0, -np.expm1(-np.maximum(z_arr, 0.0) / mean_gain))
    out = np.clip(out, 0.0, 1.0)
    if out.ndim == 0:
        return float(out)
    return out
