"""Density-based clustering with strict neighbourhood and core tests."""

from __future__ import annotations

from collections import deque

import numpy as np

from ..errors import InvalidParams
from .base import NOISE, ClusterAssignment, as_array


def neighbourhoods(x: np.ndarray, eps: float) -> list[np.ndarray]:
    """Indices within distance strictly less than ``eps``, excluding the point itself."""
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.einsum("ijd,ijd->ij", diff, diff))
    np.fill_diagonal(dist, np.inf)
    return [np.flatnonzero(row < eps) for row in dist]


def dbscan(matrix, eps: float = 15.0, min_pts: int = 15) -> ClusterAssignment:
    """A point is core when more than ``min_pts`` others lie within ``eps``.

    Clusters grow breadth-first from unvisited core points taken in row order,
    so labels follow discovery order. Border points join the first cluster
    that reaches them; everything unreached is noise (``-1``).
    """
    if not eps > 0 or min_pts < 1:
        raise InvalidParams(f"need eps > 0 and min_pts >= 1, got eps={eps}, min_pts={min_pts}")
    x = as_array(matrix)
    n = len(x)
    hoods = neighbourhoods(x, eps)
    core = np.array([len(h) > min_pts for h in hoods], dtype=bool)
    labels = np.full(n, NOISE, dtype=int)
    cluster = 0
    for start in range(n):
        if labels[start] != NOISE or not core[start]:
            continue
        labels[start] = cluster
        queue = deque([start])
        while queue:
            p = queue.popleft()
            for q in hoods[p]:
                if labels[q] == NOISE:
                    labels[q] = cluster
                    if core[q]:
                        queue.append(q)
        cluster += 1
    return ClusterAssignment(
        algorithm="DBSCAN",
        labels=labels,
        k=cluster,
        metadata={
            "eps": float(eps),
            "min_pts": int(min_pts),
            "core": core.tolist(),
            "n_core": int(core.sum()),
            "n_noise": int(np.sum(labels == NOISE)),
        },
    )
