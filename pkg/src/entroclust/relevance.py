"""Simplified entropic relevance of traces against a directly-follows graph.

The cost of a trace is ``-log2 p`` where ``p`` is the product of its
transition probabilities, floored at :data:`EPSILON`.  Only traces that were
used to discover the graph are ever scored, so there is no background model:
an unseen transition is an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dfg import Dfg, trace_counts
from .event_log import VariantLog

EPSILON = 1e-10
LOG2_EPSILON = math.log2(EPSILON)
MAX_COST = -LOG2_EPSILON


class NonFittingTraceError(ValueError):
    def __init__(self, message: str, variant_index: int | None = None):
        self.variant_index = variant_index
        if variant_index is not None:
            message = f"variant {variant_index}: {message}"
        super().__init__(message)


class Overlay:
    """Counts of a hypothetically added variant, layered over a base graph.

    Lookups read ``base + extra`` without touching ``base``, so a shared
    graph can be scored against many candidates concurrently.
    """

    __slots__ = ("base", "nodes", "edges")

    def __init__(self, base: Dfg, trace=None, multiplicity: int = 1):
        self.base = base
        self.nodes: dict = {}
        self.edges: dict = {}
        if trace is not None:
            nodes, edges = trace_counts(trace)
            self.nodes = {a: c * multiplicity for a, c in nodes.items()}
            self.edges = {e: c * multiplicity for e, c in edges.items()}

    def node_count(self, a) -> int:
        return self.base.node_counts.get(a, 0) + self.nodes.get(a, 0)

    def edge_count(self, e) -> int:
        return self.base.edge_counts.get(e, 0) + self.edges.get(e, 0)


def trace_log2_prob(trace, g: Dfg, overlay=None) -> float:
    """Unclamped ``log2`` probability of ``trace``; raises if it does not fit."""
    view = Overlay(g, *overlay) if overlay is not None else None
    total = 0.0
    for e in zip(trace, trace[1:]):
        if view is None:
            ce = g.edge_counts.get(e, 0)
            cn = g.node_counts.get(e[0], 0)
        else:
            ce = view.edge_count(e)
            cn = view.node_count(e[0])
        if ce == 0:
            raise NonFittingTraceError(f"transition {e[0]!r}->{e[1]!r} has zero probability")
        if ce != cn:
            total += math.log2(ce / cn)
    return total


def trace_er(trace, g: Dfg, overlay=None) -> float:
    """Information cost in bits of ``trace`` under ``g``.

    ``overlay`` is an optional ``(trace, multiplicity)`` pair merged into the
    counts for this evaluation only.
    """
    logp = trace_log2_prob(trace, g, overlay)
    if logp < LOG2_EPSILON:
        return MAX_COST
    return -logp if logp < 0.0 else 0.0


@dataclass
class ErReport:
    per_variant: list = field(default_factory=list)  # (variant index, cost bits)
    total_bits: float = 0.0
    average_bits: float = 0.0
    clamped_count: int = 0

    def to_json(self) -> dict:
        return {
            "average_bits": self.average_bits,
            "total_bits": self.total_bits,
            "clamped": self.clamped_count,
            "per_variant": [{"variant": i, "cost_bits": c} for i, c in self.per_variant],
        }


def average_er(log: VariantLog, g: Dfg, overlay=None) -> ErReport:
    """Multiplicity-weighted mean trace cost of ``log`` under ``g``."""
    report = ErReport()
    for i, v in enumerate(log.variants):
        try:
            logp = trace_log2_prob(v.trace, g, overlay)
        except NonFittingTraceError as exc:
            raise NonFittingTraceError(str(exc), variant_index=i) from None
        if logp < LOG2_EPSILON:
            cost = MAX_COST
            report.clamped_count += 1
        else:
            cost = -logp if logp < 0.0 else 0.0
        report.per_variant.append((i, cost))
        report.total_bits += v.multiplicity * cost
    T = log.total_cases
    report.average_bits = report.total_bits / T if T else 0.0
    return report


def pairwise_costs(a, b) -> tuple[float, float]:
    """Costs of ``a`` and ``b`` against the graph built from just the two."""
    g = Dfg.build([(a, 1), (b, 1)])
    return trace_er(a, g), trace_er(b, g)


def pairwise_er(a, b) -> float:
    ca, cb = pairwise_costs(a, b)
    return (ca + cb) / 2


def self_er(trace) -> float:
    return trace_er(trace, Dfg.build([(trace, 1)]))
