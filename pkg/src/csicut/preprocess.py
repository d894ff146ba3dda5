"""Feature encoding, z-score standardization and PCA."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import QUESTIONNAIRES, Cohort
from .errors import (
    ConstantColumn,
    DecompositionFailure,
    DimensionMismatch,
    EmptyCohort,
    NonFiniteInput,
    TooFewRows,
)

FEATURE_COLUMNS = ("gender",) + QUESTIONNAIRES

# Slack on the cumulative-variance comparison so that a threshold of exactly
# 1.0 is reachable despite rounding in the eigenvalue sum.
_RETAIN_TOL = 1e-12


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    column_names: tuple[str, ...]
    row_ids: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise DimensionMismatch("feature matrix must be two-dimensional")
        if not np.all(np.isfinite(values)):
            raise NonFiniteInput("feature matrix contains non-finite entries")
        if values.shape != (len(self.row_ids), len(self.column_names)):
            raise DimensionMismatch(
                f"values {values.shape} vs {len(self.row_ids)} ids x {len(self.column_names)} columns"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        object.__setattr__(self, "row_ids", tuple(self.row_ids))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def encode_features(cohort: Cohort) -> FeatureMatrix:
    """Nine clustering features per subject: gender (F=1, M=0) then the eight scores."""
    if len(cohort) == 0:
        raise EmptyCohort("cannot encode an empty cohort")
    rows = [[1.0 if r.gender == "F" else 0.0] + [getattr(r, q) for q in QUESTIONNAIRES] for r in cohort]
    return FeatureMatrix(np.array(rows, dtype=float), FEATURE_COLUMNS, cohort.ids)


@dataclass(frozen=True)
class StandardizationParams:
    column_names: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    ddof: int = 0

    def apply(self, matrix: FeatureMatrix) -> FeatureMatrix:
        if matrix.column_names != self.column_names:
            raise DimensionMismatch("columns differ from the fitted standardization")
        return FeatureMatrix((matrix.values - self.mean) / self.std, matrix.column_names, matrix.row_ids)

    def to_dict(self) -> dict:
        return {
            "columns": list(self.column_names),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "ddof": self.ddof,
        }


def fit_standardize(matrix: FeatureMatrix, ddof: int = 0) -> tuple[StandardizationParams, FeatureMatrix]:
    """Z-score every column.

    The default ``ddof=0`` uses the population standard deviation, so a
    two-point column maps to exactly ``[-1, 1]``.
    """
    x = matrix.values
    if x.shape[0] < 2:
        raise TooFewRows("standardization needs at least two rows")
    mean = x.mean(axis=0)
    std = x.std(axis=0, ddof=ddof)
    for name, s, col in zip(matrix.column_names, std, x.T):
        # relative test: a column of identical floats can still give s ~ 1e-17
        if s <= 1e-12 * max(1.0, float(np.abs(col).max())):
            raise ConstantColumn(name)
    params = StandardizationParams(matrix.column_names, mean, std, ddof)
    return params, params.apply(matrix)


@dataclass(frozen=True)
class PcaModel:
    """Eigendecomposition of the feature covariance matrix.

    ``components[:, j]`` is the j-th principal axis. Eigenvalues are sorted in
    descending order and each axis is signed so its largest-magnitude loading
    is positive.
    """

    column_names: tuple[str, ...]
    eigenvalues: np.ndarray
    components: np.ndarray
    explained_variance_ratio: np.ndarray
    retained: int
    variance_threshold: float

    @property
    def n_features(self) -> int:
        return len(self.column_names)

    @property
    def cumulative_ratio(self) -> np.ndarray:
        return np.cumsum(self.explained_variance_ratio)

    def to_dict(self) -> dict:
        return {
            "columns": list(self.column_names),
            "eigenvalues": self.eigenvalues.tolist(),
            "components": self.components.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
            "retained": self.retained,
            "variance_threshold": self.variance_threshold,
            "retention_rule": "smallest m with cumulative ratio >= threshold",
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PcaModel":
        return cls(
            column_names=tuple(data["columns"]),
            eigenvalues=np.asarray(data["eigenvalues"], dtype=float),
            components=np.asarray(data["components"], dtype=float),
            explained_variance_ratio=np.asarray(data["explained_variance_ratio"], dtype=float),
            retained=int(data["retained"]),
            variance_threshold=float(data["variance_threshold"]),
        )


def n_retained(ratios: np.ndarray, threshold: float) -> int:
    cum = np.cumsum(ratios)
    hits = np.flatnonzero(cum >= threshold - _RETAIN_TOL)
    return int(hits[0]) + 1 if hits.size else len(ratios)


def fit_pca(matrix: FeatureMatrix, variance_threshold: float = 0.80) -> PcaModel:
    if not 0 < variance_threshold <= 1:
        raise ValueError("variance_threshold must lie in (0, 1]")
    x = matrix.values
    n, d = x.shape
    if n <= d:
        warnings.warn(f"PCA on {n} rows and {d} columns; covariance is rank deficient", stacklevel=2)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / n
    try:
        eigvals, eigvecs = np.linalg.eigh(cov)
    except np.linalg.LinAlgError as exc:
        raise DecompositionFailure(str(exc)) from exc
    order = np.argsort(eigvals, kind="stable")[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    lead = np.argmax(np.abs(eigvecs), axis=0)
    signs = np.sign(eigvecs[lead, np.arange(d)])
    signs[signs == 0] = 1.0
    eigvecs = eigvecs * signs
    total = eigvals.sum()
    if not total > 0:
        raise DecompositionFailure("covariance matrix has zero trace")
    ratios = eigvals / total
    return PcaModel(
        column_names=matrix.column_names,
        eigenvalues=eigvals,
        components=eigvecs,
        explained_variance_ratio=ratios,
        retained=n_retained(ratios, variance_threshold),
        variance_threshold=float(variance_threshold),
    )


def transform(model: PcaModel, matrix: FeatureMatrix) -> FeatureMatrix:
    """Project onto the retained principal axes."""
    if matrix.values.shape[1] != model.n_features:
        raise DimensionMismatch(f"expected {model.n_features} columns, got {matrix.values.shape[1]}")
    scores = matrix.values @ model.components[:, : model.retained]
    names = tuple(f"PC{i + 1}" for i in range(model.retained))
    return FeatureMatrix(scores, names, matrix.row_ids)


def feature_importance(model: PcaModel) -> list[tuple[str, float]]:
    """Rank input features by variance-weighted absolute loading over retained axes."""
    m = model.retained
    scores = np.abs(model.components[:, :m]) @ model.explained_variance_ratio[:m]
    # rounded key: duplicated columns differ only by eigensolver noise
    order = sorted(range(model.n_features), key=lambda i: (-round(float(scores[i]), 10), i))
    return [(model.column_names[i], float(scores[i])) for i in order]


def pca_summary(model: PcaModel) -> dict:
    cum = model.cumulative_ratio
    return {
        "retained": model.retained,
        "variance_threshold": model.variance_threshold,
        "explained_variance_ratio": [round(float(v), 12) for v in model.explained_variance_ratio],
        "cumulative_at_retained": float(cum[model.retained - 1]),
        "eigenvalue_sum": float(model.eigenvalues.sum()),
    }
