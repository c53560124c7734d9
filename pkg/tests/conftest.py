from __future__ import annotations

import contextlib
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from entroclust.event_log import BOS, EOS, Variant, VariantLog, augment_bos_eos

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@contextlib.contextmanager
def criterion(label: str):
    """Record a pass/fail line for the acceptance summary."""
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_RESULTS.append((label, False, f"{type(exc).__name__}: {exc}".splitlines()[0]))
        raise
    ACCEPTANCE_RESULTS.append((label, True, ""))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, why in ACCEPTANCE_RESULTS:
        line = f"{'PASS' if ok else 'FAIL'}  {label}"
        if why:
            line += f"  ({why})"
        terminalreporter.write_line(line)


def make_log(pairs, augment=True) -> VariantLog:
    """Variant log from ``[(activities, multiplicity), ...]`` in the given order."""
    log = VariantLog(tuple(Variant(tuple(t), m, i) for i, (t, m) in enumerate(pairs)))
    return augment_bos_eos(log) if augment else log


def aug(*acts) -> tuple:
    return (BOS, *acts, EOS)


# -- independent oracles -----------------------------------------------------


def naive_counts(pairs):
    """Node/edge counts by explicit enumeration of every position and pair."""
    nodes, edges = Counter(), Counter()
    for trace, m in pairs:
        for i in range(len(trace)):
            nodes[trace[i]] += m
        for i in range(len(trace) - 1):
            edges[(trace[i], trace[i + 1])] += m
    return dict(nodes), dict(edges)


def naive_prob(trace, pairs) -> Fraction:
    """Exact rational probability of ``trace`` under the graph of ``pairs``."""
    nodes, edges = naive_counts(pairs)
    p = Fraction(1)
    for i in range(1, len(trace)):
        p *= Fraction(edges.get((trace[i - 1], trace[i]), 0), nodes[trace[i - 1]])
    return p


def naive_cost(trace, pairs, eps=1e-10) -> float:
    p = naive_prob(trace, pairs)
    if p < Fraction(eps):
        return -math.log2(eps)
    return -math.log2(float(p))


def markov_family_log(rng: np.random.Generator, per_family=20, n_acts=5, forward=0.7, max_len=12, max_mult=20):
    """Two families of distinct traces over disjoint 5-activity alphabets.

    Each trace is a walk from the first to the last activity of its family:
    it steps forward with probability ``forward`` and otherwise jumps to a
    uniformly drawn activity, so families share a clear backbone with loops
    and skips around it.  Returns the augmented log and the family label
    (0/1) per variant index.
    """
    pairs, fam = [], {}
    for f, prefix in enumerate(("a", "b")):
        acts = [f"{prefix}{i}" for i in range(n_acts)]
        seen = set()
        while len(seen) < per_family:
            state, t = 0, [acts[0]]
            while state != n_acts - 1 and len(t) < max_len:
                state = state + 1 if rng.random() < forward else int(rng.integers(0, n_acts))
                t.append(acts[state])
            t = tuple(t)
            if t in seen:
                continue
            seen.add(t)
            pairs.append((t, int(rng.integers(1, max_mult + 1))))
            fam[t] = f
    log = make_log(pairs)
    labels = [fam[v.trace[1:-1]] for v in log.variants]
    return log, labels


def random_log(rng: np.random.Generator, n_acts=8, max_variants=10, max_len=12, max_mult=5):
    acts = [chr(ord("A") + i) for i in range(n_acts)]
    seen, pairs = set(), []
    target = int(rng.integers(1, max_variants + 1))
    tries = 0
    while len(pairs) < target and tries < 1000:
        tries += 1
        n = int(rng.integers(1, max_len + 1))
        t = tuple(acts[int(x)] for x in rng.integers(0, n_acts, size=n))
        if t not in seen:
            seen.add(t)
            pairs.append((t, int(rng.integers(1, max_mult + 1))))
    return make_log(pairs)


@pytest.fixture
def worked_log():
    return make_log([(("A", "B"), 2), (("A", "C"), 1)])
