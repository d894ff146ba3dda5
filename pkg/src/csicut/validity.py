"""Internal and external cluster validity, and algorithm selection.

Noise rows (label -1) are dropped before any internal index is computed.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from math import comb
from pathlib import Path

import numpy as np

from .clustering.base import ALGORITHMS, NOISE, ClusterAssignment, as_array
from .dataset import Cohort
from .errors import (
    CoincidentCentroids,
    DataError,
    DegenerateDispersion,
    EmptyReportList,
    KOutOfRange,
    SingleCluster,
)


def _evaluated(matrix, assignment: ClusterAssignment):
    x = as_array(matrix)
    if len(x) != assignment.n:
        raise DataError("matrix and assignment differ in row count")
    keep = assignment.labels != NOISE
    x, labels = x[keep], assignment.labels[keep]
    clusters = np.unique(labels)
    if len(clusters) < 2:
        raise SingleCluster(f"{assignment.algorithm}: need at least two clusters, got {len(clusters)}")
    return x, labels, clusters


def _pairwise(x):
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.einsum("ijd,ijd->ij", diff, diff))


def silhouette_samples(matrix, assignment: ClusterAssignment) -> np.ndarray:
    """s(i) for every non-noise row; rows in singleton clusters score 0."""
    x, labels, clusters = _evaluated(matrix, assignment)
    dist = _pairwise(x)
    masks = [labels == c for c in clusters]
    sizes = np.array([m.sum() for m in masks])
    # mean distance from each row to each cluster
    sums = np.stack([dist[:, m].sum(axis=1) for m in masks], axis=1)
    own = np.searchsorted(clusters, labels)
    rows = np.arange(len(x))
    own_size = sizes[own]
    a = np.where(own_size > 1, sums[rows, own] / np.maximum(own_size - 1, 1), 0.0)
    means = sums / sizes
    means[rows, own] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    s[own_size == 1] = 0.0
    return s


def silhouette(matrix, assignment: ClusterAssignment) -> float:
    return float(np.mean(silhouette_samples(matrix, assignment)))


def _centroids(x, labels, clusters):
    return np.array([x[labels == c].mean(axis=0) for c in clusters])


def davies_bouldin(matrix, assignment: ClusterAssignment) -> float:
    x, labels, clusters = _evaluated(matrix, assignment)
    cent = _centroids(x, labels, clusters)
    scatter = np.array(
        [np.linalg.norm(x[labels == c] - cent[i], axis=1).mean() for i, c in enumerate(clusters)]
    )
    sep = _pairwise(cent)
    np.fill_diagonal(sep, np.inf)
    if np.any(sep == 0):
        raise CoincidentCentroids(f"{assignment.algorithm}: two clusters share a centroid")
    ratio = (scatter[:, None] + scatter[None, :]) / sep
    return float(ratio.max(axis=1).mean())


def calinski_harabasz(matrix, assignment: ClusterAssignment) -> float:
    """Between/within dispersion ratio using squared Euclidean distances."""
    x, labels, clusters = _evaluated(matrix, assignment)
    n, k = len(x), len(clusters)
    if k > n - 1:
        raise KOutOfRange(f"Calinski-Harabasz needs k <= N-1, got k={k}, N={n}")
    cent = _centroids(x, labels, clusters)
    overall = x.mean(axis=0)
    sizes = np.array([np.sum(labels == c) for c in clusters])
    between = float(np.sum(sizes * np.sum((cent - overall) ** 2, axis=1))) / (k - 1)
    within = float(sum(np.sum((x[labels == c] - cent[i]) ** 2) for i, c in enumerate(clusters))) / (n - k)
    if within == 0:
        raise DegenerateDispersion(f"{assignment.algorithm}: zero within-cluster dispersion")
    return between / within


def external_validity(assignment: ClusterAssignment, cohort: Cohort) -> tuple[int, int]:
    """``(HC subjects in the HC cluster, size of that cluster)``.

    The HC cluster holds the most healthy controls; ties go to the larger HC
    fraction, then the lower label. Noise rows belong to no cluster.
    """
    if len(cohort) != assignment.n:
        raise DataError("cohort and assignment differ in row count")
    is_hc = np.array([r.cohort == "HC" for r in cohort])
    if assignment.k == 0:
        return 0, 0
    stats = []
    for c in range(assignment.k):
        members = assignment.labels == c
        size = int(members.sum())
        hc = int(np.sum(is_hc & members))
        stats.append((-hc, -hc / size, c, hc, size))
    _, _, _, hc, size = min(stats)
    return hc, size


@dataclass(frozen=True)
class ValidityReport:
    algorithm: str
    silhouette: float | None
    davies_bouldin: float | None
    calinski_harabasz: float | None
    true_hc: int
    hc_cluster_size: int
    n_evaluated: int
    k: int
    note: str | None = None

    @property
    def balance(self) -> int:
        """HC captured minus non-HC subjects in the HC cluster."""
        return self.true_hc - (self.hc_cluster_size - self.true_hc)

    @property
    def scored(self) -> bool:
        return None not in (self.silhouette, self.davies_bouldin, self.calinski_harabasz)

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(matrix, assignment: ClusterAssignment, cohort: Cohort) -> ValidityReport:
    """All four measures for one clustering.

    Internal indices that are undefined (a single cluster, coincident
    centroids, zero dispersion) are reported as ``None`` with the reason in
    ``note``; the external counts are always filled in.
    """
    true_hc, hc_size = external_validity(assignment, cohort)
    n_eval = int(np.sum(assignment.labels != NOISE))
    values = {}
    note = None
    for name, fn in (("silhouette", silhouette), ("davies_bouldin", davies_bouldin),
                     ("calinski_harabasz", calinski_harabasz)):
        try:
            values[name] = fn(matrix, assignment)
        except DataError as exc:
            values[name] = None
            note = note or f"{type(exc).__name__}: {exc}"
    return ValidityReport(assignment.algorithm, values["silhouette"], values["davies_bouldin"],
                          values["calinski_harabasz"], true_hc, hc_size, n_eval, assignment.k, note)


def _rank_key(report: ValidityReport):
    # unscored reports sort after every scored one
    scored = report.scored
    return (
        -report.balance,
        0 if scored else 1,
        -(report.silhouette or 0.0),
        -(report.calinski_harabasz or 0.0),
        report.davies_bouldin or 0.0,
        ALGORITHMS.index(report.algorithm),
    )


def select_best(reports: list[ValidityReport]) -> str:
    """Best external balance, then silhouette, then CH, then lowest DB.

    Remaining ties go to the algorithm listed first in ``ALGORITHMS``.
    """
    if not reports:
        raise EmptyReportList("no validity reports to choose from")
    return min(reports, key=_rank_key).algorithm


def adjusted_rand(labels_a, labels_b) -> float:
    """Adjusted Rand index between two labelings of the same rows."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if len(a) != len(b):
        raise DataError("labelings differ in length")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    pairs = sum(comb(int(v), 2) for v in table.ravel())
    rows = sum(comb(int(v), 2) for v in table.sum(axis=1))
    cols = sum(comb(int(v), 2) for v in table.sum(axis=0))
    total = comb(len(a), 2)
    expected = rows * cols / total if total else 0.0
    maximum = (rows + cols) / 2
    if maximum == expected:
        return 1.0
    return (pairs - expected) / (maximum - expected)


def silhouette_sweep(matrix, cluster_fn, ks) -> dict[int, float | None]:
    """Mean silhouette for each k, with ``cluster_fn(matrix, k)`` producing the assignment."""
    out = {}
    for k in ks:
        try:
            out[int(k)] = silhouette(matrix, cluster_fn(matrix, int(k)))
        except DataError:
            out[int(k)] = None
    return out


TABLE2_FIELDS = ("algorithm", "silhouette", "calinski_harabasz", "davies_bouldin",
                 "true_hc", "hc_cluster_size", "n_evaluated", "k", "note")


def write_table2(reports: list[ValidityReport], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE2_FIELDS)
        for r in reports:
            row = r.to_dict()
            w.writerow(["" if row[f] is None else (round(row[f], 6) if isinstance(row[f], float) else row[f])
                        for f in TABLE2_FIELDS])
    return path
