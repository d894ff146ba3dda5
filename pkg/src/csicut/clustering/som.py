"""Self-organizing map on a square grid, with k-means over the codebook."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInput, KOutOfRange
from .base import ClusterAssignment, as_array, relabel_by_size
from .kmeans import kmeans

ETA_START, ETA_END = 0.5, 0.01
SIGMA_END = 0.5


def grid_side(n: int) -> int:
    """Side length of the square map for ``n`` samples, ``ceil(sqrt(5 sqrt(n)))``."""
    return math.ceil(math.sqrt(5.0 * math.sqrt(n)))


@dataclass(frozen=True)
class SomGrid:
    width: int
    height: int
    codebook: np.ndarray  # (width * height, D), row-major over (i, j)
    eta: tuple[float, float]
    sigma: tuple[float, float]

    @property
    def coords(self) -> np.ndarray:
        return np.array([(i, j) for i in range(self.width) for j in range(self.height)], dtype=float)

    def bmu(self, x: np.ndarray) -> np.ndarray:
        diff = x[:, None, :] - self.codebook[None, :, :]
        return np.argmin(np.einsum("nkd,nkd->nk", diff, diff), axis=1)


def _schedule(start, end, epoch, epochs):
    frac = epoch / (epochs - 1) if epochs > 1 else 0.0
    return start + (end - start) * frac


def train_som(matrix, seed: int = 0, epochs: int = 100, tol: float = 1e-4):
    """Online SOM training.

    Each epoch visits the rows in a fresh random order. Learning rate and
    neighbourhood width fall linearly over the epochs. Training stops early
    once no codebook vector moves more than ``tol`` during an epoch.

    Returns ``(grid, displacements)`` with the per-epoch maximum displacement.
    """
    x = as_array(matrix)
    n, d = x.shape
    if n < 1:
        raise EmptyInput("SOM needs at least one row")
    side = grid_side(n)
    rng = np.random.default_rng(seed)
    lo, hi = x.min(axis=0), x.max(axis=0)
    weights = rng.uniform(lo, hi, size=(side * side, d))
    sigma_start = side / 2.0
    grid = SomGrid(side, side, weights, (ETA_START, ETA_END), (sigma_start, SIGMA_END))
    coords = grid.coords
    grid_sq = np.sum((coords[:, None, :] - coords[None, :, :]) ** 2, axis=2)

    displacements = []
    for epoch in range(epochs):
        eta = _schedule(ETA_START, ETA_END, epoch, epochs)
        sigma = _schedule(sigma_start, SIGMA_END, epoch, epochs)
        start = weights.copy()
        for idx in rng.permutation(n):
            sample = x[idx]
            diff = sample - weights
            winner = int(np.argmin(np.einsum("kd,kd->k", diff, diff)))
            g = np.exp(-grid_sq[winner] / (2.0 * sigma * sigma))
            weights += eta * g[:, None] * diff
        moved = float(np.max(np.linalg.norm(weights - start, axis=1)))
        displacements.append(moved)
        if moved < tol:
            break
    return grid, displacements


def som(matrix, k: int = 3, seed: int = 0, epochs: int = 100, tol: float = 1e-4) -> ClusterAssignment:
    """Train a map, cluster the occupied codebook vectors with k-means, and
    give each row the cluster of its best-matching unit."""
    x = as_array(matrix)
    if len(x) < 1:
        raise EmptyInput("SOM needs at least one row")
    if k < 1:
        raise KOutOfRange(f"k={k} must be >= 1")
    grid, displacements = train_som(x, seed=seed, epochs=epochs, tol=tol)
    bmus = grid.bmu(x)
    occupied = np.unique(bmus)
    vectors = grid.codebook[occupied]
    if len(np.unique(vectors, axis=0)) < k:
        raise KOutOfRange(f"k={k} exceeds the {len(occupied)} occupied map nodes")
    node_clusters = kmeans(vectors, k=k, seed=seed)
    lookup = dict(zip(occupied.tolist(), node_clusters.labels.tolist()))
    labels = relabel_by_size(np.array([lookup[b] for b in bmus.tolist()]))
    q_err = float(np.mean(np.linalg.norm(x - grid.codebook[bmus], axis=1)))
    return ClusterAssignment(
        algorithm="SOM",
        labels=labels,
        k=k,
        metadata={
            "grid": [grid.width, grid.height],
            "codebook": grid.codebook.tolist(),
            "bmu": bmus.tolist(),
            "occupied_nodes": len(occupied),
            "epochs_run": len(displacements),
            "final_displacement": displacements[-1] if displacements else None,
            "eta": list(grid.eta),
            "sigma": list(grid.sigma),
            "quantization_error": q_err,
        },
        seed=seed,
    )
