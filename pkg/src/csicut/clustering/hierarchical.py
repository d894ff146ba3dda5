"""Agglomerative clustering with the Ward-form Lance-Williams update."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import KOutOfRange, TooFewRows
from .base import ClusterAssignment, as_array, relabel_by_size


@dataclass(frozen=True)
class Dendrogram:
    """Merge history in scipy linkage order.

    Leaves are nodes ``0..n-1``; the cluster formed by merge ``t`` is node
    ``n + t``. Each merge is ``(left, right, distance, size)`` with
    ``left < right``.
    """

    merges: tuple[tuple[int, int, float, int], ...]
    n_leaves: int

    def to_linkage(self) -> np.ndarray:
        return np.array([[l, r, d, s] for l, r, d, s in self.merges], dtype=float).reshape(-1, 4)

    def members(self, k: int) -> list[list[int]]:
        """Leaf sets of the ``k`` subtrees left after undoing the last ``k-1`` merges."""
        n = self.n_leaves
        if not 1 <= k <= n:
            raise KOutOfRange(f"k={k} outside [1, {n}]")
        groups = {i: [i] for i in range(n)}
        for t, (left, right, _, _) in enumerate(self.merges[: n - k]):
            groups[n + t] = groups.pop(left) + groups.pop(right)
        return [sorted(g) for g in groups.values()]

    def cut(self, k: int) -> np.ndarray:
        labels = np.empty(self.n_leaves, dtype=int)
        for c, leaves in enumerate(self.members(k)):
            labels[leaves] = c
        return relabel_by_size(labels)

    def to_dict(self, leaf_names=None) -> dict:
        return {
            "n_leaves": self.n_leaves,
            "leaf_names": list(leaf_names) if leaf_names is not None else None,
            "merges": [
                {"left": l, "right": r, "distance": d, "size": s} for l, r, d, s in self.merges
            ],
        }

    def to_newick(self, leaf_names=None) -> str:
        n = self.n_leaves
        names = [str(i) for i in range(n)] if leaf_names is None else [_newick_name(s) for s in leaf_names]
        if n == 1:
            return f"{names[0]};"
        height = [0.0] * n + [d for _, _, d, _ in self.merges]
        text = list(names) + [None] * len(self.merges)
        for t, (left, right, d, _) in enumerate(self.merges):
            text[n + t] = f"({text[left]}:{d - height[left]!r},{text[right]}:{d - height[right]!r})"
        return text[-1] + ";"


def _newick_name(name) -> str:
    s = str(name)
    if any(ch in s for ch in " ():;,[]'\t\n"):
        return "'" + s.replace("'", "''") + "'"
    return s


def ward_update(d_ik, d_jk, d_ij, n_i, n_j, n_k):
    """Lance-Williams recurrence with Ward coefficients (gamma = 0).

    Exact for squared Euclidean dissimilarities.
    """
    total = n_i + n_j + n_k
    return ((n_i + n_k) * d_ik + (n_j + n_k) * d_jk - n_k * d_ij) / total


def ward_linkage(matrix) -> Dendrogram:
    """Build the full dendrogram bottom-up.

    The proximity matrix holds squared Euclidean distances, updated in place
    with :func:`ward_update`; reported merge distances are their square roots,
    so two points at distance ``d`` merge at height ``d``. Among equal minimal
    entries the pair with the smallest ``(min node id, max node id)`` wins.
    """
    x = as_array(matrix)
    n = len(x)
    if n < 2:
        raise TooFewRows("hierarchical clustering needs at least two rows")
    diff = x[:, None, :] - x[None, :, :]
    prox = np.einsum("ijd,ijd->ij", diff, diff)
    np.fill_diagonal(prox, np.inf)
    node = list(range(n))
    size = np.ones(n, dtype=int)
    merges = []
    for step in range(n - 1):
        best = prox.min()
        rows, cols = np.nonzero(prox == best)
        pairs = [(a, b) for a, b in zip(rows.tolist(), cols.tolist()) if a < b]
        i, j = min(pairs, key=lambda p: (min(node[p[0]], node[p[1]]), max(node[p[0]], node[p[1]])))
        d_ij = prox[i, j]
        others = np.isfinite(prox[i])
        others[j] = False
        updated = ward_update(prox[i, others], prox[j, others], d_ij, size[i], size[j], size[others])
        prox[i, others] = updated
        prox[others, i] = updated
        prox[j, :] = np.inf
        prox[:, j] = np.inf
        left, right = sorted((node[i], node[j]))
        merged = int(size[i] + size[j])
        merges.append((left, right, math.sqrt(max(float(d_ij), 0.0)), merged))
        node[i] = n + step
        size[i] = merged
    return Dendrogram(tuple(merges), n)


def hierarchical(matrix, k: int = 3) -> tuple[ClusterAssignment, Dendrogram]:
    x = as_array(matrix)
    n = len(x)
    if n < 2:
        raise TooFewRows("hierarchical clustering needs at least two rows")
    if not 1 <= k <= n:
        raise KOutOfRange(f"k={k} outside [1, {n}]")
    tree = ward_linkage(x)
    labels = tree.cut(k)
    assignment = ClusterAssignment(
        algorithm="Hierarchical",
        labels=labels,
        k=k,
        metadata={"linkage": "ward (Lance-Williams)", "cut_height": tree.merges[n - k][2] if k > 1 else None},
    )
    return assignment, tree
