"""Case-weighted cluster metrics, elbow sweeps, and rank statistics.

The ranking follows the usual Friedman / Nemenyi recipe for comparing
several methods over several datasets: rank per dataset (average ranks for
ties), test the mean ranks with Friedman's chi-square, and call two methods
different when their mean ranks differ by more than the critical difference.
"""

from __future__ import annotations

import csv
import io
import math
import zlib
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaincc
from scipy.stats import rankdata

from .clustering import Clustering, cluster_er, run_method
from .dfg import UndefinedMetricError
from .event_log import VariantLog

METRICS = ("er", "graph_density", "graph_entropy")


@dataclass
class MetricRow:
    method_tag: str
    log_name: str
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, x in self.values.items():
            if x is not None and not math.isfinite(x):
                raise ValueError(f"metric {name} is not finite: {x}")

    def to_json(self) -> dict:
        return {"method": self.method_tag, "log": self.log_name, **self.values}


def weighted_metrics(
    clustering: Clustering,
    log: VariantLog,
    include_sentinels: bool = True,
    log_name: str = "",
) -> MetricRow:
    """Per-cluster ER, GD and GE averaged with case-count weights."""
    T = log.total_cases
    sums = dict.fromkeys(METRICS, 0.0)
    for c in clustering.clusters:
        w = c.case_count
        sums["er"] += w * cluster_er(log, c)
        sums["graph_density"] += w * c.dfg.graph_density(include_sentinels)
        sums["graph_entropy"] += w * c.dfg.graph_entropy(include_sentinels)
    return MetricRow(clustering.method_tag, log_name, {m: s / T for m, s in sums.items()})


def derive_rng(seed: int, *keys) -> np.random.Generator:
    """Independent generator for one (seed, key...) cell.

    String keys are folded with CRC32 so the stream does not depend on
    Python's randomized ``hash``.
    """
    words = [int(seed)]
    for key in keys:
        words.append(zlib.crc32(key.encode()) if isinstance(key, str) else int(key))
    return np.random.default_rng(np.random.SeedSequence(words))


@dataclass
class ElbowCell:
    method: str
    k: int
    values: dict | None
    error: str | None = None


def elbow_sweep(
    log: VariantLog,
    k_range: Iterable[int],
    methods: Sequence[str],
    seed: int = 0,
    include_sentinels: bool = True,
    n_jobs: int = 1,
) -> list[ElbowCell]:
    """Cluster with every method at every k and collect weighted metrics.

    ``methods`` are tags such as ``"ec-pp"`` or ``"freq-kmeans"``.  A cell
    whose clustering or metric fails is kept with ``values=None``.
    """
    from .clustering import parse_method_tag

    ks = list(k_range)
    if ks and max(ks) > len(log):
        raise ValueError(f"max k={max(ks)} exceeds the number of variants ({len(log)})")
    cells = []
    for tag in methods:
        method, init = parse_method_tag(tag)
        for k in ks:
            rng = derive_rng(seed, tag, k)
            try:
                clustering = run_method(log, method, k, rng, init=init, n_jobs=n_jobs)
                row = weighted_metrics(clustering, log, include_sentinels)
                cells.append(ElbowCell(tag, k, row.values))
            except (ValueError, UndefinedMetricError) as exc:
                cells.append(ElbowCell(tag, k, None, str(exc)))
    return cells


def elbow_csv(cells: Sequence[ElbowCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "k", "er", "graph_density", "graph_entropy"])
    for c in cells:
        vals = ["" if c.values is None else repr(float(c.values[m])) for m in METRICS]
        w.writerow([c.method, c.k, *vals])
    return buf.getvalue()


# -- ranking -----------------------------------------------------------------


def rank_matrix(matrix, lower_is_better: bool = True) -> np.ndarray:
    """Per-column ranks (rows = methods, columns = logs), ties averaged."""
    X = np.asarray(matrix, dtype=float)
    if X.ndim != 2:
        raise ValueError("matrix must be 2-D (methods x logs)")
    if np.isnan(X).any():
        raise ValueError("matrix has missing cells; drop the incomplete logs (columns) first")
    signed = X if lower_is_better else -X
    return np.column_stack([rankdata(signed[:, j], method="average") for j in range(X.shape[1])]).reshape(X.shape)


def average_ranks(matrix, lower_is_better: bool = True) -> np.ndarray:
    return rank_matrix(matrix, lower_is_better).mean(axis=1)


def chi2_sf(x: float, df: int) -> float:
    """Upper tail of the chi-square distribution."""
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


def friedman_test(matrix, lower_is_better: bool = True) -> tuple[float, float]:
    """Friedman chi-square from rank sums, without tie correction."""
    ranks = rank_matrix(matrix, lower_is_better)
    k, n = ranks.shape
    if k < 2 or n < 2:
        raise ValueError(f"Friedman test needs >= 2 methods and >= 2 logs, got {k}x{n}")
    R = ranks.sum(axis=1)
    chi2 = 12.0 / (n * k * (k + 1)) * float((R ** 2).sum()) - 3.0 * n * (k + 1)
    chi2 = max(chi2, 0.0)
    return chi2, chi2_sf(chi2, k - 1)


def _load_q_table() -> dict[int, float]:
    text = resources.files("entroclust").joinpath("data/nemenyi_q05.csv").read_text(encoding="utf-8")
    rows = csv.DictReader(line for line in text.splitlines() if not line.startswith("#"))
    return {int(r["k"]): float(r["q_alpha_0.05"]) for r in rows}


Q_ALPHA_05 = _load_q_table()


def nemenyi_cd(k_methods: int, n_logs: int, alpha: float = 0.05) -> float:
    if alpha != 0.05:
        raise ValueError("only alpha=0.05 critical values are tabulated")
    if k_methods not in Q_ALPHA_05:
        raise ValueError(f"no critical value for k={k_methods}; table covers {min(Q_ALPHA_05)}..{max(Q_ALPHA_05)}")
    if n_logs < 1:
        raise ValueError("n_logs must be >= 1")
    return Q_ALPHA_05[k_methods] * math.sqrt(k_methods * (k_methods + 1) / (6.0 * n_logs))


@dataclass
class RankTable:
    metric: str
    methods: list
    logs: list
    matrix: np.ndarray
    avg_ranks: dict
    friedman_chi2: float | None
    p_value: float | None
    nemenyi_cd: float | None

    def significant_pairs(self) -> list[list[str]]:
        if self.nemenyi_cd is None:
            return []
        return [
            [a, b]
            for a, b in combinations(self.methods, 2)
            if abs(self.avg_ranks[a] - self.avg_ranks[b]) > self.nemenyi_cd
        ]

    def to_json(self) -> dict:
        return {
            "metric": self.metric,
            "avg_ranks": self.avg_ranks,
            "friedman_chi2": self.friedman_chi2,
            "p_value": self.p_value,
            "cd": self.nemenyi_cd,
            "pairs_significant": self.significant_pairs(),
        }


def rank_table(methods, logs, matrix, metric: str = "", lower_is_better: bool = True) -> RankTable:
    """Average ranks plus Friedman and Nemenyi statistics for one metric.

    With a single log the ranks are still reported but the test statistics
    are left as ``None``.
    """
    X = np.asarray(matrix, dtype=float)
    avg = average_ranks(X, lower_is_better)
    k, n = X.shape
    chi2 = p = cd = None
    if n >= 2 and k >= 2:
        chi2, p = friedman_test(X, lower_is_better)
        cd = nemenyi_cd(k, n) if k in Q_ALPHA_05 else None
    return RankTable(metric, list(methods), list(logs), X,
                     {m: float(r) for m, r in zip(methods, avg)}, chi2, p, cd)


def read_matrix_csv(text: str) -> tuple[list[str], list[str], np.ndarray]:
    """Parse ``method,log1,log2,...`` rows; blank, ``/`` or ``NA`` cells are missing."""
    rows = [r for r in csv.reader(line for line in text.splitlines() if line.strip() and not line.startswith("#"))]
    if not rows:
        raise ValueError("empty matrix CSV")
    logs = [c.strip() for c in rows[0][1:]]
    methods, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(logs) + 1:
            raise ValueError(f"line {lineno}: expected {len(logs) + 1} fields, got {len(row)}")
        methods.append(row[0].strip())
        cells = []
        for cell in row[1:]:
            cell = cell.strip()
            if cell in ("", "/", "NA", "nan"):
                cells.append(math.nan)
            else:
                try:
                    cells.append(float(cell))
                except ValueError:
                    raise ValueError(f"line {lineno}: not a number: {cell!r}") from None
        values.append(cells)
    return methods, logs, np.array(values, dtype=float).reshape(len(methods), len(logs))
