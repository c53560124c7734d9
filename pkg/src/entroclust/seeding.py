"""Seed selection for entropic clustering: random, ++ and ++norm."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .event_log import VariantLog
from .relevance import pairwise_costs, self_er

STRATEGIES = ("random", "plusplus", "plusplus_norm")


@dataclass(frozen=True)
class SeedSet:
    seed_indices: tuple
    strategy: str

    def __post_init__(self):
        if len(set(self.seed_indices)) != len(self.seed_indices):
            raise ValueError(f"seed indices must be distinct: {self.seed_indices}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown seeding strategy {self.strategy!r}")

    def __len__(self) -> int:
        return len(self.seed_indices)


def _check_k(log: VariantLog, k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > len(log):
        raise ValueError(f"k={k} exceeds the number of variants ({len(log)})")


def init_random(log: VariantLog, k: int, rng: np.random.Generator) -> SeedSet:
    _check_k(log, k)
    picks = rng.choice(len(log), size=k, replace=False)
    return SeedSet(tuple(int(i) for i in picks), "random")


def normalized_contribution(raw: float, self_cost: float) -> float:
    """Deflate a pairwise cost component by the trace's own self-ER.

    Loop-free traces have zero self-ER and are left as they are.
    """
    return raw / self_cost if self_cost > 0.0 else raw


def seed_distance(log: VariantLog, v: int, s: int, normalize: bool = False, self_costs=None) -> float:
    """Pairwise ER distance between variants ``v`` and ``s``.

    With ``normalize`` each trace's component is divided by its own self-ER
    before averaging.
    """
    cv, cs = pairwise_costs(log[v].trace, log[s].trace)
    if normalize:
        if self_costs is None:
            sv, ss = self_er(log[v].trace), self_er(log[s].trace)
        else:
            sv, ss = self_costs[v], self_costs[s]
        cv = normalized_contribution(cv, sv)
        cs = normalized_contribution(cs, ss)
    return (cv + cs) / 2


def init_plusplus(
    log: VariantLog,
    k: int,
    rng: np.random.Generator,
    normalize: bool = False,
    n_jobs: int = 1,
) -> SeedSet:
    """k-means++-style seeding with pairwise ER as the distance.

    The first seed is uniform; each next seed is drawn among the remaining
    variants with probability proportional to the squared distance to the
    closest seed so far.  If every distance is zero the draw is uniform.
    """
    _check_k(log, k)
    K = len(log)
    self_costs = [self_er(v.trace) for v in log.variants] if normalize else None
    seeds = [int(rng.integers(K))]
    nearest = np.full(K, np.inf)

    pool = ThreadPoolExecutor(n_jobs) if n_jobs > 1 else None
    try:
        while len(seeds) < k:
            newest = seeds[-1]
            rest = [v for v in range(K) if v not in seeds]

            def dist(v, s=newest):
                return seed_distance(log, v, s, normalize, self_costs)

            values = list(pool.map(dist, rest)) if pool else [dist(v) for v in rest]
            for v, d in zip(rest, values):
                if d < nearest[v]:
                    nearest[v] = d
            weights = nearest[rest] ** 2
            total = weights.sum()
            if total > 0:
                pick = rng.choice(len(rest), p=weights / total)
            else:
                pick = rng.integers(len(rest))
            seeds.append(rest[int(pick)])
    finally:
        if pool:
            pool.shutdown()
    return SeedSet(tuple(seeds), "plusplus_norm" if normalize else "plusplus")


def select_seeds(log: VariantLog, k: int, strategy: str, rng: np.random.Generator, n_jobs: int = 1) -> SeedSet:
    if strategy == "random":
        return init_random(log, k, rng)
    if strategy == "plusplus":
        return init_plusplus(log, k, rng, normalize=False, n_jobs=n_jobs)
    if strategy == "plusplus_norm":
        return init_plusplus(log, k, rng, normalize=True, n_jobs=n_jobs)
    raise ValueError(f"unknown seeding strategy {strategy!r}")
