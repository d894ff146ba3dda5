"""Lloyd's k-means with seeded restarts."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateInput, InvalidParams, KOutOfRange
from .base import ClusterAssignment, as_array, relabel_by_size


def _sq_dists(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _assign(x, centroids):
    # argmin returns the lowest centroid index on ties
    return np.argmin(_sq_dists(x, centroids), axis=1)


def _update(x, labels, centroids):
    out = centroids.copy()
    for c in range(len(centroids)):
        members = x[labels == c]
        if len(members):
            out[c] = members.mean(axis=0)
    return out


def inertia(x: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    diff = x - centroids[labels]
    return float(np.einsum("nd,nd->", diff, diff))


def _init_centroids(x, k, rng):
    chosen = []
    seen = set()
    for idx in rng.permutation(len(x)):
        key = x[idx].tobytes()
        if key in seen:
            continue
        seen.add(key)
        chosen.append(idx)
        if len(chosen) == k:
            break
    return x[np.array(chosen)].copy()


def lloyd(x: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 300):
    """One k-means run from random distinct rows.

    Returns ``(labels, centroids, history)`` where ``history`` holds the
    inertia after every centroid update.
    """
    centroids = _init_centroids(x, k, rng)
    labels = _assign(x, centroids)
    history = []
    for _ in range(max_iter):
        centroids = _update(x, labels, centroids)
        history.append(inertia(x, labels, centroids))
        new = _assign(x, centroids)
        if np.array_equal(new, labels):
            break
        labels = new
    else:
        centroids = _update(x, labels, centroids)
        history.append(inertia(x, labels, centroids))
    return labels, centroids, history


def kmeans(matrix, k: int = 3, seed: int = 0, restarts: int = 32, max_iter: int = 300) -> ClusterAssignment:
    """Best of ``restarts`` Lloyd runs by inertia, ties to the earliest restart.

    Restart seeds are spawned from ``seed``, so the result does not depend on
    the order in which restarts are evaluated.
    """
    x = as_array(matrix)
    n = len(x)
    if not 1 <= k <= n:
        raise KOutOfRange(f"k={k} outside [1, {n}]")
    if restarts < 1 or max_iter < 1:
        raise InvalidParams("restarts and max_iter must be >= 1")
    if len(np.unique(x, axis=0)) < k:
        raise DegenerateInput(f"fewer than {k} distinct rows")

    best = None
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        labels, centroids, history = lloyd(x, k, np.random.default_rng(child), max_iter)
        key = (history[-1], r)
        if best is None or key < best[0]:
            best = (key, labels, centroids, history)
    (final_inertia, best_restart), labels, centroids, history = best

    relabeled = relabel_by_size(labels)
    order = [int(labels[np.flatnonzero(relabeled == c)[0]]) for c in range(k)]
    return ClusterAssignment(
        algorithm="KMeans",
        labels=relabeled,
        k=k,
        metadata={
            "inertia": final_inertia,
            "centroids": centroids[order].tolist(),
            "n_iter": len(history),
            "inertia_history": history,
            "best_restart": best_restart,
            "restarts": restarts,
            "max_iter": max_iter,
        },
        seed=seed,
    )
