"""Directly-follows graphs stored as exact node and edge counts."""

from __future__ import annotations

import json
import math
from collections import Counter
from typing import Iterable

from .event_log import BOS, EOS, SENTINELS


class DfgContractError(ValueError):
    pass


class UndefinedMetricError(ValueError):
    pass


def _check_augmented(trace) -> None:
    if len(trace) < 2 or trace[0] != BOS or trace[-1] != EOS:
        raise DfgContractError(f"trace is not BOS/EOS-augmented: {trace!r}")
    if BOS in trace[1:] or EOS in trace[:-1]:
        raise DfgContractError(f"sentinel inside trace body: {trace!r}")


def trace_counts(trace) -> tuple[Counter, Counter]:
    """Node and edge counts contributed by a single occurrence of ``trace``."""
    nodes = Counter(trace)
    edges = Counter(zip(trace, trace[1:]))
    return nodes, edges


class Dfg:
    """Node counts ``c_N`` and edge counts ``c_E`` over activity labels.

    Counts are integers and zero entries are never stored.  Transition
    probabilities are derived on demand as ``c_E(a, b) / c_N(a)``.
    """

    __slots__ = ("node_counts", "edge_counts")

    def __init__(self, node_counts=None, edge_counts=None):
        self.node_counts: dict[str, int] = dict(node_counts or {})
        self.edge_counts: dict[tuple[str, str], int] = dict(edge_counts or {})

    @classmethod
    def build(cls, variants: Iterable[tuple]) -> "Dfg":
        g = cls()
        for trace, m in variants:
            g.add_variant(trace, m)
        return g

    def copy(self) -> "Dfg":
        return Dfg(self.node_counts, self.edge_counts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dfg):
            return NotImplemented
        return self.node_counts == other.node_counts and self.edge_counts == other.edge_counts

    def __repr__(self) -> str:
        return f"Dfg(nodes={len(self.node_counts)}, edges={len(self.edge_counts)})"

    def __bool__(self) -> bool:
        return bool(self.node_counts)

    def add_variant(self, trace, m: int = 1) -> "Dfg":
        _check_augmented(trace)
        if m < 1:
            raise DfgContractError(f"multiplicity must be >= 1, got {m}")
        nc, ec = self.node_counts, self.edge_counts
        for a in trace:
            nc[a] = nc.get(a, 0) + m
        for e in zip(trace, trace[1:]):
            ec[e] = ec.get(e, 0) + m
        return self

    def remove_variant(self, trace, m: int = 1) -> "Dfg":
        _check_augmented(trace)
        nodes, edges = trace_counts(trace)
        # validate first so a failed removal leaves the graph untouched
        for a, c in nodes.items():
            if self.node_counts.get(a, 0) < c * m:
                raise DfgContractError(f"cannot decrement node {a!r} below zero")
        for e, c in edges.items():
            if self.edge_counts.get(e, 0) < c * m:
                raise DfgContractError(f"cannot decrement edge {e[0]!r}->{e[1]!r} below zero")
        for a, c in nodes.items():
            left = self.node_counts[a] - c * m
            if left:
                self.node_counts[a] = left
            else:
                del self.node_counts[a]
        for e, c in edges.items():
            left = self.edge_counts[e] - c * m
            if left:
                self.edge_counts[e] = left
            else:
                del self.edge_counts[e]
        return self

    def successors(self, a: str) -> dict[str, int]:
        return {b: c for (x, b), c in self.edge_counts.items() if x == a}

    def transition_prob(self, a: str, b: str) -> float:
        n = self.node_counts.get(a, 0)
        if n <= 0:
            raise DfgContractError(f"unknown source node {a!r}")
        return self.edge_counts.get((a, b), 0) / n

    def out_distributions(self) -> dict[str, dict[str, float]]:
        """Outgoing transition probabilities per node with successors."""
        out: dict[str, dict[str, float]] = {}
        for (a, b), c in self.edge_counts.items():
            out.setdefault(a, {})[b] = c / self.node_counts[a]
        return out

    # -- metrics ---------------------------------------------------------

    def _filtered(self, include_sentinels: bool):
        if include_sentinels:
            return set(self.node_counts), dict(self.edge_counts)
        nodes = set(self.node_counts) - SENTINELS
        edges = {e: c for e, c in self.edge_counts.items() if e[0] in nodes and e[1] in nodes}
        return nodes, edges

    def graph_density(self, include_sentinels: bool = True) -> float:
        nodes, edges = self._filtered(include_sentinels)
        n = len(nodes)
        if n < 2:
            raise UndefinedMetricError(f"graph density needs >= 2 nodes, got {n}")
        return len(edges) / (n * (n - 1))

    def graph_entropy(self, include_sentinels: bool = True) -> float:
        """Sum of per-node Shannon entropies (bits) of outgoing transitions.

        Probabilities are always taken from the unfiltered graph; filtering
        only decides which source nodes contribute.
        """
        nodes, _ = self._filtered(include_sentinels)
        total = 0.0
        for a, dist in self.out_distributions().items():
            if a not in nodes:
                continue
            total -= sum(p * math.log2(p) for p in dist.values() if p < 1.0)
        return total

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "nodes": dict(sorted(self.node_counts.items())),
            "edges": [
                {"from": a, "to": b, "count": c} for (a, b), c in sorted(self.edge_counts.items())
            ],
        }

    @classmethod
    def from_json(cls, data) -> "Dfg":
        if not isinstance(data, dict):
            data = json.loads(data)
        edges = {(e["from"], e["to"]): int(e["count"]) for e in data["edges"]}
        g = cls({k: int(v) for k, v in data["nodes"].items()}, edges)
        for (a, b) in edges:
            if a not in g.node_counts or b not in g.node_counts:
                raise DfgContractError(f"edge {a!r}->{b!r} references an unknown node")
        return g

    def to_dot(self, name: str = "dfg", show_counts: bool = True, show_probs: bool = True,
               comment: str | None = None) -> str:
        def q(s: str) -> str:
            return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'

        lines = []
        if comment:
            lines.extend(f"// {line}" for line in comment.splitlines())
        lines.append(f"digraph {q(name)} {{")
        lines.append("  rankdir=LR;")
        lines.append("  node [shape=box];")
        for a in sorted(self.node_counts):
            if a in SENTINELS:
                label = "start" if a == BOS else "end"
                lines.append(f"  {q(a)} [label={q(label)}, shape=circle, style=filled, fillcolor=lightgray];")
            else:
                lines.append(f"  {q(a)} [label={q(f'{a} ({self.node_counts[a]})')}];")
        for (a, b), c in sorted(self.edge_counts.items()):
            parts = []
            if show_counts:
                parts.append(str(c))
            if show_probs:
                p = f"{c / self.node_counts[a]:.3f}"
                parts.append(f"({p})" if show_counts else p)
            attr = f" [label={q(' '.join(parts))}]" if parts else ""
            lines.append(f"  {q(a)} -> {q(b)}{attr};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build(variants: Iterable[tuple]) -> Dfg:
    return Dfg.build(variants)
