"""Cohort data model, CSV ingestion and synthetic cohort generation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DataError,
    EmptyCohort,
    InvalidProfile,
    MissingColumn,
    ParseError,
    RangeViolation,
)

QUESTIONNAIRES = ("vas", "pdi", "was", "rand36_pf", "pcs", "ieq", "bsi", "csi")
DEMOGRAPHICS = ("age", "height", "weight", "bmi")
REQUIRED_COLUMNS = ("id", "cohort", "gender") + QUESTIONNAIRES
ALL_COLUMNS = REQUIRED_COLUMNS + DEMOGRAPHICS

COHORTS = ("HC", "CLBP")
GENDERS = ("F", "M")

# Valid score ranges, enforced on ingestion. BSI is a t-score without a fixed scale.
SCORE_RANGES = {
    "vas": (0.0, 10.0),
    "pdi": (0.0, 70.0),
    "was": (0.0, 10.0),
    "rand36_pf": (0.0, 100.0),
    "pcs": (0.0, 52.0),
    "ieq": (0.0, 48.0),
    "csi": (0.0, 100.0),
}

# Clamping bounds for synthetic draws only.
GENERATOR_BOUNDS = {
    **SCORE_RANGES,
    "bsi": (0.0, 100.0),
    "age": (18.0, 100.0),
    "height": (50.0, 250.0),
    "weight": (30.0, 250.0),
    "bmi": (10.0, 80.0),
}

_MISSING = {"", "na", "nan", "null", "none"}


@dataclass(frozen=True)
class SubjectRecord:
    id: str
    cohort: str
    gender: str
    vas: float
    pdi: float
    was: float
    rand36_pf: float
    pcs: float
    ieq: float
    bsi: float
    csi: float
    age: float | None = None
    height: float | None = None
    weight: float | None = None
    bmi: float | None = None

    def __post_init__(self):
        if self.cohort not in COHORTS:
            raise DataError(f"{self.id}: cohort must be one of {COHORTS}, got {self.cohort!r}")
        if self.gender not in GENDERS:
            raise DataError(f"{self.id}: gender must be one of {GENDERS}, got {self.gender!r}")


@dataclass(frozen=True)
class Cohort:
    """Ordered, immutable collection of subjects.

    ``true_labels`` is only set for synthetic cohorts and holds the generating
    cluster name of each record.
    """

    records: tuple[SubjectRecord, ...]
    provenance: str = "ingested"
    excluded: int = 0
    true_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            raise DataError("subject ids must be unique")
        if self.true_labels is not None:
            object.__setattr__(self, "true_labels", tuple(self.true_labels))
            if len(self.true_labels) != len(self.records):
                raise DataError("true_labels must align with records")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[SubjectRecord]:
        return iter(self.records)

    def __getitem__(self, i: int) -> SubjectRecord:
        return self.records[i]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.records)

    def values(self, name: str) -> np.ndarray:
        """Column ``name`` as a float array; missing optional values become NaN."""
        out = [getattr(r, name) for r in self.records]
        return np.array([np.nan if v is None else v for v in out], dtype=float)

    def select(self, indices: Sequence[int]) -> "Cohort":
        idx = sorted(set(int(i) for i in indices))
        labels = None if self.true_labels is None else [self.true_labels[i] for i in idx]
        return replace(self, records=tuple(self.records[i] for i in idx), true_labels=labels)


def _parse_number(raw: str, line: int, column: str) -> float | None:
    text = raw.strip()
    if text.lower() in _MISSING:
        return None
    try:
        value = float(text)
    except ValueError:
        raise ParseError(line, column, raw) from None
    if not math.isfinite(value):
        raise ParseError(line, column, raw)
    return value


def ingest_csv(
    path: str | Path,
    schema: Mapping[str, str] | None = None,
    vas_scale: str = "0-10",
) -> Cohort:
    """Read and validate a cohort CSV.

    ``schema`` maps canonical field names to header names in the file; fields
    not listed are looked up under their canonical name. With
    ``vas_scale="0-100"`` VAS values in millimetres are divided by 10.
    Rows missing any clustering feature (gender or a questionnaire score) are
    dropped and counted in ``Cohort.excluded``.
    """
    if vas_scale not in ("0-10", "0-100"):
        raise DataError(f"vas_scale must be '0-10' or '0-100', got {vas_scale!r}")
    schema = dict(schema or {})
    header_of = {name: schema.get(name, name) for name in ALL_COLUMNS}

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fieldnames = [f.strip() for f in (reader.fieldnames or [])]
        reader.fieldnames = fieldnames
        for name in REQUIRED_COLUMNS:
            if header_of[name] not in fieldnames:
                raise MissingColumn(header_of[name])
        optional = [n for n in DEMOGRAPHICS if header_of[n] in fieldnames]

        records = []
        excluded = 0
        for row in reader:
            line = reader.line_num
            sid = (row[header_of["id"]] or "").strip()
            if not sid:
                raise ParseError(line, header_of["id"], row[header_of["id"]])
            cohort = (row[header_of["cohort"]] or "").strip().upper()
            if cohort not in COHORTS:
                raise ParseError(line, header_of["cohort"], row[header_of["cohort"]])
            gender = (row[header_of["gender"]] or "").strip().upper()
            if gender.lower() in _MISSING:
                excluded += 1
                continue
            if gender not in GENDERS:
                raise ParseError(line, header_of["gender"], row[header_of["gender"]])

            scores = {}
            for name in QUESTIONNAIRES:
                scores[name] = _parse_number(row[header_of[name]] or "", line, header_of[name])
            if any(v is None for v in scores.values()):
                excluded += 1
                continue
            if vas_scale == "0-100":
                scores["vas"] /= 10.0
            for name, bounds in SCORE_RANGES.items():
                if not bounds[0] <= scores[name] <= bounds[1]:
                    raise RangeViolation(line, name, scores[name], bounds)

            demo = {n: _parse_number(row[header_of[n]] or "", line, header_of[n]) for n in optional}
            records.append(SubjectRecord(id=sid, cohort=cohort, gender=gender, **scores, **demo))

    if not records:
        raise EmptyCohort(f"{path}: no valid data rows")
    return Cohort(tuple(records), provenance="ingested", excluded=excluded)


def write_csv(cohort: Cohort, path: str | Path) -> Path:
    """Write ``cohort`` in the canonical CSV layout accepted by :func:`ingest_csv`."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ALL_COLUMNS)
        for r in cohort:
            writer.writerow(["" if getattr(r, c) is None else getattr(r, c) for c in ALL_COLUMNS])
    return path


def subgroup(
    cohort: Cohort,
    predicate: Callable[[SubjectRecord], bool] | None = None,
    *,
    gender: str | None = None,
    cohort_label: str | None = None,
) -> Cohort:
    """Filter a cohort, keeping ids and order."""

    def keep(r: SubjectRecord) -> bool:
        if gender is not None and r.gender != gender:
            return False
        if cohort_label is not None and r.cohort != cohort_label:
            return False
        return predicate is None or bool(predicate(r))

    return cohort.select([i for i, r in enumerate(cohort) if keep(r)])


@dataclass(frozen=True)
class ClusterStatProfile:
    """Per-cluster summary statistics used to drive the synthetic generator.

    ``stats[cluster][variable]`` is ``(mean, sd)``; ``gender[cluster]`` is
    ``(n_female, n_male)``; ``hc[cluster]`` is the number of healthy controls.
    """

    clusters: tuple[str, ...]
    stats: Mapping[str, Mapping[str, tuple[float, float]]]
    gender: Mapping[str, tuple[int, int]]
    sizes: Mapping[str, int]
    hc: Mapping[str, int] = field(default_factory=dict)

    def validate(self) -> None:
        if not self.clusters:
            raise InvalidProfile("profile has no clusters")
        for c in self.clusters:
            if c not in self.stats or c not in self.gender or c not in self.sizes:
                raise InvalidProfile(f"cluster {c!r} is incompletely specified")
            if self.sizes[c] < 1:
                raise InvalidProfile(f"cluster {c!r} is empty")
            missing = [v for v in QUESTIONNAIRES if v not in self.stats[c]]
            if missing:
                raise InvalidProfile(f"cluster {c!r} lacks {missing}")
            for var, (_, sd) in self.stats[c].items():
                if not sd >= 0:
                    raise InvalidProfile(f"cluster {c!r}: negative SD for {var}")
            nf, nm = self.gender[c]
            if nf < 0 or nm < 0 or nf + nm == 0:
                raise InvalidProfile(f"cluster {c!r}: invalid gender counts")
            if not 0 <= self.hc.get(c, 0) <= self.sizes[c]:
                raise InvalidProfile(f"cluster {c!r}: HC count exceeds size")


def _t3(*pairs):
    names = ("age", "height", "weight", "bmi") + QUESTIONNAIRES
    return dict(zip(names, pairs))


# Hierarchical-clustering demography of the reference study (clusters A/B/C).
# HC counts: 62 of the 63 controls fell in cluster A, the remaining one in B.
TABLE3_PROFILE = ClusterStatProfile(
    clusters=("A", "B", "C"),
    stats={
        "A": _t3((41.2, 13.6), (160.7, 55.8), (84.5, 17.9), (26.3, 4.8), (0.5, 0.9), (5.3, 7.2),
                 (8.4, 1.4), (28.7, 2.6), (4.5, 4.8), (3.5, 5.4), (32.4, 5.2), (22.1, 9.5)),
        "B": _t3((39.4, 11.8), (175.5, 8.9), (82.3, 13.1), (26.8, 4.1), (3.3, 1.9), (22.9, 13.2),
                 (6.0, 2.0), (71.1, 14.4), (11.0, 8.1), (11.1, 6.4), (33.9, 9.6), (35.0, 11.5)),
        "C": _t3((43.2, 12.3), (175.4, 11.6), (90.5, 18.6), (29.5, 6.0), (5.4, 2.4), (39.3, 10.1),
                 (3.4, 2.0), (38.4, 13.7), (21.5, 10.6), (18.3, 8.5), (40.5, 8.0), (42.9, 12.2)),
    },
    gender={"A": (25, 40), "B": (24, 24), "C": (25, 13)},
    sizes={"A": 65, "B": 48, "C": 38},
    hc={"A": 62, "B": 1, "C": 0},
)


def _exact_flags(rng, n, fraction):
    flags = np.zeros(n, dtype=bool)
    flags[rng.permutation(n)[: int(round(n * fraction))]] = True
    return flags


def generate_synthetic(
    profile: ClusterStatProfile,
    n_per_cluster: Mapping[str, int] | Sequence[int] | None = None,
    seed: int = 0,
    clamp: bool = True,
) -> Cohort:
    """Draw a cohort with independent Gaussian variables per cluster.

    Each cluster gets ``round(n * fraction)`` females and healthy controls,
    placed at random positions, so the profile's own sizes reproduce its
    counts exactly. Values are clamped to ``GENERATOR_BOUNDS``
    unless ``clamp`` is false. The generating cluster of every subject is kept
    in ``Cohort.true_labels``.
    """
    profile.validate()
    if n_per_cluster is None:
        sizes = dict(profile.sizes)
    elif isinstance(n_per_cluster, Mapping):
        sizes = {c: int(n_per_cluster[c]) for c in profile.clusters}
    else:
        if len(n_per_cluster) != len(profile.clusters):
            raise InvalidProfile("n_per_cluster must give one size per cluster")
        sizes = dict(zip(profile.clusters, (int(n) for n in n_per_cluster)))
    if any(n < 1 for n in sizes.values()):
        raise InvalidProfile("every cluster needs at least one subject")

    rng = np.random.default_rng(seed)
    records = []
    labels = []
    for c in profile.clusters:
        n = sizes[c]
        nf, nm = profile.gender[c]
        female = _exact_flags(rng, n, nf / (nf + nm))
        healthy = _exact_flags(rng, n, profile.hc.get(c, 0) / profile.sizes[c])
        draws = {}
        for var in QUESTIONNAIRES + DEMOGRAPHICS:
            if var not in profile.stats[c]:
                continue
            mean, sd = profile.stats[c][var]
            x = rng.normal(mean, sd, n)
            if clamp:
                x = np.clip(x, *GENERATOR_BOUNDS[var])
            draws[var] = x
        for i in range(n):
            records.append(
                SubjectRecord(
                    id=f"S{len(records) + 1:04d}",
                    cohort="HC" if healthy[i] else "CLBP",
                    gender="F" if female[i] else "M",
                    **{var: float(x[i]) for var, x in draws.items()},
                )
            )
            labels.append(c)
    return Cohort(tuple(records), provenance=f"synthetic(seed={seed})", true_labels=tuple(labels))
