"""Shared clustering result type and helpers."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..errors import DataError

ALGORITHMS = ("KMeans", "Hierarchical", "SOM", "DBSCAN")
NOISE = -1


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-row cluster labels from one algorithm run.

    Non-noise labels are contiguous ``0..k-1``; ``-1`` marks DBSCAN noise.
    A DBSCAN run where every row is noise is the only case with ``k == 0``.
    """

    algorithm: str
    labels: np.ndarray
    k: int
    metadata: Mapping[str, Any] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise DataError(f"unknown algorithm {self.algorithm!r}")
        labels = np.asarray(self.labels, dtype=int).copy()
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        present = np.unique(labels[labels != NOISE])
        if not np.array_equal(present, np.arange(self.k)):
            raise DataError(f"labels {present.tolist()} are not contiguous 0..{self.k - 1}")
        if np.any(labels < NOISE):
            raise DataError("labels must be >= -1")
        if self.k < 1 and self.algorithm != "DBSCAN":
            raise DataError("an assignment needs at least one cluster")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def noise_mask(self) -> np.ndarray:
        return self.labels == NOISE

    def sizes(self) -> list[int]:
        return [int(np.sum(self.labels == c)) for c in range(self.k)]

    def write_csv(self, path: str | Path, row_ids) -> Path:
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "label"])
            for rid, lab in zip(row_ids, self.labels):
                w.writerow([rid, int(lab)])
        return path


def relabel_by_size(labels: np.ndarray) -> np.ndarray:
    """Renumber clusters by descending size; ties go to the cluster seen first.

    Noise (-1) is left untouched.
    """
    labels = np.asarray(labels, dtype=int)
    ids = [c for c in np.unique(labels) if c != NOISE]
    first = {c: int(np.flatnonzero(labels == c)[0]) for c in ids}
    order = sorted(ids, key=lambda c: (-int(np.sum(labels == c)), first[c]))
    out = np.full_like(labels, NOISE)
    for new, old in enumerate(order):
        out[labels == old] = new
    return out


def as_array(matrix) -> np.ndarray:
    """Accept a FeatureMatrix or anything array-like."""
    values = getattr(matrix, "values", matrix)
    x = np.asarray(values, dtype=float)
    if x.ndim != 2:
        raise DataError("expected a two-dimensional matrix")
    return x
