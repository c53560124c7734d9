"""Activity-frequency k-means++ baseline.

Each variant becomes a vector of relative activity frequencies; k-means runs
on those vectors with the variant multiplicities as point weights.
"""

from __future__ import annotations

import numpy as np

from .clustering import Clustering, from_labels
from .event_log import VariantLog, strip_sentinels

MAX_ITER = 100
TOL = 1e-6


def activity_profile(trace, vocabulary) -> np.ndarray:
    """Relative frequency of each vocabulary label in ``trace`` (sentinels ignored)."""
    body = strip_sentinels(trace)
    index = {a: i for i, a in enumerate(vocabulary)}
    vec = np.zeros(len(index))
    for a in body:
        vec[index[a]] += 1
    if body:
        vec /= len(body)
    return vec


def profile_matrix(log: VariantLog) -> tuple[np.ndarray, list[str]]:
    vocab = sorted(log.vocabulary)
    return np.array([activity_profile(v.trace, vocab) for v in log.variants]).reshape(len(log), len(vocab)), vocab


def kmeanspp_seeds(X: np.ndarray, w: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of ``k`` distinct points chosen by weighted D^2 sampling."""
    n = len(X)
    chosen = [int(rng.choice(n, p=w / w.sum()))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        mask = np.ones(n, dtype=bool)
        mask[chosen] = False
        cand = np.flatnonzero(mask)
        p = w[cand] * d2[cand]
        if p.sum() > 0:
            pick = cand[rng.choice(len(cand), p=p / p.sum())]
        else:
            pick = cand[rng.choice(len(cand), p=w[cand] / w[cand].sum())]
        chosen.append(int(pick))
        d2 = np.minimum(d2, ((X - X[pick]) ** 2).sum(axis=1))
    return np.array(chosen)


def weighted_kmeans(X: np.ndarray, w: np.ndarray, k: int, rng: np.random.Generator,
                    max_iter: int = MAX_ITER, tol: float = TOL):
    """Lloyd's algorithm with k-means++ seeding on weighted points.

    Returns ``(labels, centroids, n_iter)``.  Each point is assigned to its
    nearest centroid (ties to the lowest index); an emptied cluster takes
    over the point farthest from its own centroid among clusters that can
    spare one.
    """
    n = len(X)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    centroids = X[kmeanspp_seeds(X, w, k, rng)].copy()
    labels = np.zeros(n, dtype=int)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        _repair_empty(labels, d2, k)
        new = np.array([np.average(X[labels == j], axis=0, weights=w[labels == j]) for j in range(k)])
        shift = np.sqrt(((new - centroids) ** 2).sum(axis=1)).max()
        centroids = new
        if shift < tol:
            break
    return labels, centroids, n_iter


def _repair_empty(labels: np.ndarray, d2: np.ndarray, k: int) -> None:
    for j in range(k):
        if np.any(labels == j):
            continue
        sizes = np.bincount(labels, minlength=k)
        own = d2[np.arange(len(labels)), labels]
        movable = sizes[labels] > 1
        # farthest from its own centroid; first index among equals
        cand = np.flatnonzero(movable)
        victim = cand[np.argmax(own[cand])]
        labels[victim] = j


def frequency_kmeanspp(log: VariantLog, k: int, rng: np.random.Generator) -> Clustering:
    X, _ = profile_matrix(log)
    w = np.array(log.multiplicities, dtype=float)
    labels, _, _ = weighted_kmeans(X, w, k, rng)
    return from_labels(log, labels, k, "freq-kmeans")
