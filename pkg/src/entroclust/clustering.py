"""Entropic Clustering (EC) and its recursive splitting variant.

Variants are visited in decreasing multiplicity and each joins the cluster
whose graph, after hypothetically absorbing it, encodes it most cheaply.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dfg import Dfg
from .event_log import VariantLog
from .relevance import average_er, trace_er
from .seeding import SeedSet, select_seeds


@dataclass
class Cluster:
    member_indices: list
    dfg: Dfg
    case_count: int

    @classmethod
    def from_members(cls, log: VariantLog, members) -> "Cluster":
        members = list(members)
        dfg = Dfg.build((log[i].trace, log[i].multiplicity) for i in members)
        return cls(members, dfg, sum(log[i].multiplicity for i in members))

    def add(self, log: VariantLog, i: int) -> None:
        v = log[i]
        self.member_indices.append(i)
        self.dfg.add_variant(v.trace, v.multiplicity)
        self.case_count += v.multiplicity


@dataclass
class AssignmentStep:
    variant_index: int
    scores: tuple
    chosen: int


@dataclass
class Clustering:
    clusters: list
    method_tag: str = ""
    rng_seed: int | None = None
    steps: list = field(default_factory=list)
    n_evaluations: int = 0

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def assignment(self) -> dict[int, int]:
        return {i: j for j, c in enumerate(self.clusters) for i in c.member_indices}

    def labels(self, n_variants: int) -> list[int]:
        out = [-1] * n_variants
        for i, j in self.assignment.items():
            out[i] = j
        return out

    def validate(self, log: VariantLog) -> None:
        """Check the partition and per-cluster graph invariants."""
        seen = sorted(i for c in self.clusters for i in c.member_indices)
        if seen != list(range(len(log))):
            raise AssertionError("clusters do not partition the variant set")
        for j, c in enumerate(self.clusters):
            if not c.member_indices:
                raise AssertionError(f"cluster {j} is empty")
            ref = Cluster.from_members(log, c.member_indices)
            if ref.dfg != c.dfg or ref.case_count != c.case_count:
                raise AssertionError(f"cluster {j} graph is inconsistent with its members")

    def to_json(self) -> dict:
        return {
            "method": self.method_tag,
            "seed": self.rng_seed,
            "clusters": [
                {"variants": sorted(c.member_indices), "case_count": c.case_count} for c in self.clusters
            ],
        }

    @classmethod
    def from_json(cls, data: dict, log: VariantLog) -> "Clustering":
        clusters = [Cluster.from_members(log, sorted(c["variants"])) for c in data["clusters"]]
        out = cls(clusters, data.get("method", ""), data.get("seed"))
        out.validate(log)
        return out


def from_labels(log: VariantLog, labels, k: int, method_tag: str = "", rng_seed=None) -> Clustering:
    members = [[] for _ in range(k)]
    for i, j in enumerate(labels):
        members[int(j)].append(i)
    return Clustering([Cluster.from_members(log, m) for m in members], method_tag, rng_seed)


def single_cluster(log: VariantLog, method_tag: str = "full-log") -> Clustering:
    return Clustering([Cluster.from_members(log, range(len(log)))], method_tag)


def ec_cluster(
    log: VariantLog,
    k: int,
    seeds: SeedSet,
    n_jobs: int = 1,
    record_steps: bool = False,
) -> Clustering:
    """Greedy entropic assignment starting from the given seeds.

    The score of variant ``v`` for cluster ``j`` is ``v``'s own cost against
    ``G_j`` with ``v`` (at full multiplicity) overlaid.  Ties go to the
    lowest cluster index.
    """
    if len(seeds) != k:
        raise ValueError(f"expected {k} seeds, got {len(seeds)}")
    for s in seeds.seed_indices:
        if not 0 <= s < len(log):
            raise ValueError(f"seed index {s} out of range")

    clusters = [Cluster.from_members(log, [s]) for s in seeds.seed_indices]
    result = Clustering(clusters)
    seed_set = set(seeds.seed_indices)

    pool = ThreadPoolExecutor(n_jobs) if n_jobs > 1 and k > 1 else None
    try:
        # log variants are already in decreasing multiplicity, ties by first appearance
        for i, v in enumerate(log.variants):
            if i in seed_set:
                continue
            overlay = (v.trace, v.multiplicity)

            def score(c: Cluster) -> float:
                return trace_er(v.trace, c.dfg, overlay)

            scores = tuple(pool.map(score, clusters)) if pool else tuple(score(c) for c in clusters)
            result.n_evaluations += len(scores)
            best = min(range(k), key=lambda j: (scores[j], j))
            clusters[best].add(log, i)
            if record_steps:
                result.steps.append(AssignmentStep(i, scores, best))
    finally:
        if pool:
            pool.shutdown()
    return result


def cluster_er(log: VariantLog, cluster: Cluster) -> float:
    """Average ER of a cluster's variants against the cluster's own graph."""
    sub = log.subset(sorted(cluster.member_indices))
    return average_er(sub, cluster.dfg).average_bits


def ec_split(
    log: VariantLog,
    k: int,
    strategy: str,
    rng: np.random.Generator,
    n_jobs: int = 1,
) -> Clustering:
    """Bisect the worst cluster (highest average ER) until there are ``k``.

    A cluster holding a single variant cannot be bisected; the next-worst is
    tried instead.  If nothing can be split the run stops early with a
    warning and fewer than ``k`` clusters.
    """
    if k < 2:
        raise ValueError(f"EC-Split needs k >= 2, got {k}")
    if k > len(log):
        raise ValueError(f"k={k} exceeds the number of variants ({len(log)})")

    def bisect(indices: list[int]) -> tuple[list[Cluster], int]:
        sub = log.subset(indices)
        seeds = select_seeds(sub, 2, strategy, rng, n_jobs=n_jobs)
        part = ec_cluster(sub, 2, seeds, n_jobs=n_jobs)
        halves = [Cluster.from_members(log, sorted(indices[i] for i in c.member_indices)) for c in part.clusters]
        return halves, part.n_evaluations

    clusters, n_eval = bisect(list(range(len(log))))
    while len(clusters) < k:
        ers = [cluster_er(log, c) for c in clusters]
        order = sorted(range(len(clusters)), key=lambda j: (-ers[j], j))
        target = next((j for j in order if len(clusters[j].member_indices) >= 2), None)
        if target is None:
            warnings.warn(f"EC-Split stopped early at {len(clusters)} of {k} clusters: nothing left to split")
            break
        halves, n = bisect(sorted(clusters[target].member_indices))
        n_eval += n
        clusters[target:target + 1] = halves
    return Clustering(clusters, n_evaluations=n_eval)


def random_clustering(log: VariantLog, k: int, rng: np.random.Generator) -> Clustering:
    """Uniform random assignment of variants, repaired so no cluster is empty."""
    K = len(log)
    if not 1 <= k <= K:
        raise ValueError(f"k must be in [1, {K}], got {k}")
    labels = rng.integers(0, k, size=K)
    members = [[i for i in range(K) if labels[i] == j] for j in range(k)]
    for j in range(k):
        if not members[j]:
            donor = max(range(k), key=lambda x: (len(members[x]), -x))
            members[j].append(members[donor].pop())
    return Clustering([Cluster.from_members(log, sorted(m)) for m in members])


METHODS = ("ec", "ec-split", "random", "freq-kmeans")
INITS = {"random": "random", "pp": "plusplus", "ppnorm": "plusplus_norm"}


def method_tag(method: str, init: str | None = None) -> str:
    if method in ("ec", "ec-split"):
        return f"{method}-{init or 'pp'}"
    return method


def parse_method_tag(tag: str) -> tuple[str, str | None]:
    """Inverse of :func:`method_tag`, e.g. ``"ec-split-ppnorm"``."""
    for method in ("ec-split", "ec"):
        prefix = method + "-"
        if tag.startswith(prefix) and tag[len(prefix):] in INITS:
            return method, tag[len(prefix):]
    if tag in ("random", "freq-kmeans"):
        return tag, None
    raise ValueError(f"unknown method tag {tag!r}")


def run_method(
    log: VariantLog,
    method: str,
    k: int,
    rng: np.random.Generator,
    init: str | None = None,
    n_jobs: int = 1,
) -> Clustering:
    """Dispatch one clustering method by name."""
    from .baselines import frequency_kmeanspp

    if init is not None and init not in INITS:
        raise ValueError(f"unknown init {init!r}; expected one of {sorted(INITS)}")
    if method in ("ec", "ec-split"):
        strategy = INITS[init or "pp"]
        if method == "ec":
            seeds = select_seeds(log, k, strategy, rng, n_jobs=n_jobs)
            result = ec_cluster(log, k, seeds, n_jobs=n_jobs)
        elif k == 1:
            result = single_cluster(log)
        else:
            result = ec_split(log, k, strategy, rng, n_jobs=n_jobs)
    elif init is not None:
        raise ValueError(f"--init applies only to ec/ec-split, not {method!r}")
    elif method == "random":
        result = random_clustering(log, k, rng)
    elif method == "freq-kmeans":
        result = frequency_kmeanspp(log, k, rng)
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    result.method_tag = method_tag(method, init)
    return result
