"""End-to-end pipeline: ingest, standardize, PCA, cluster, validate, split, cut-off."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .clustering import ALGORITHMS, ClusterAssignment, Dendrogram, dbscan, hierarchical, kmeans, som
from .dataset import TABLE3_PROFILE, Cohort, SubjectRecord, generate_synthetic, ingest_csv, write_csv
from .diagnostics import (
    MODES,
    SUBGROUPS,
    GroupSplit,
    build_split,
    cluster_views,
    cutoff_analysis,
    demographic_summary,
    split_views,
    write_table5,
)
from .errors import CsiCutError, DataError, EmptyGroup, ReportIOError, StageError
from .preprocess import encode_features, feature_importance, fit_pca, fit_standardize, pca_summary, transform
from .reference import TABLE5_COUNTS
from .validity import ValidityReport, adjusted_rand, evaluate, select_best, silhouette_sweep, write_table2

log = logging.getLogger(__name__)

SYNTHETIC_KINDS = ("table3",)


def derive_seed(master: int, stream: str) -> int:
    """Independent 32-bit seed for a named stage, stable across releases."""
    digest = hashlib.sha256(f"{int(master)}/{stream}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


@dataclass(frozen=True)
class PipelineConfig:
    input: Path | None = None
    synthetic: str | None = None
    seed: int = 0
    k: int = 3
    variance_threshold: float = 0.80
    algorithms: tuple[str, ...] = ALGORITHMS
    eps: float = 15.0
    min_pts: int = 15
    cutoffs: tuple[int, int] = (20, 45)
    mode: str = "AB_vs_C"
    subgroups: tuple[str, ...] = tuple(SUBGROUPS)
    vas_scale: str = "0-10"
    kmeans_restarts: int = 32
    som_epochs: int = 100
    sweep: tuple[int, ...] = ()
    out: Path | None = None

    def validate(self) -> None:
        if (self.input is None) == (self.synthetic is None):
            raise DataError("give exactly one of an input file or a synthetic cohort")
        if self.synthetic is not None and self.synthetic not in SYNTHETIC_KINDS:
            raise DataError(f"unknown synthetic cohort {self.synthetic!r}")
        if not 0 < self.variance_threshold <= 1:
            raise DataError("variance_threshold must lie in (0, 1]")
        if self.k < 2:
            raise DataError("k must be at least 2")
        lo, hi = self.cutoffs
        if hi < lo:
            raise DataError("cut-off range is empty")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown or not self.algorithms:
            raise DataError(f"algorithms must be a non-empty subset of {ALGORITHMS}")
        if self.mode not in MODES:
            raise DataError(f"mode must be one of {MODES}")
        bad = [s for s in self.subgroups if s not in SUBGROUPS]
        if bad:
            raise DataError(f"unknown subgroups {bad}")

    def to_dict(self) -> dict:
        return {
            "input": None if self.input is None else str(self.input),
            "synthetic": self.synthetic,
            "seed": self.seed,
            "k": self.k,
            "variance_threshold": self.variance_threshold,
            "algorithms": list(self.algorithms),
            "eps": self.eps,
            "min_pts": self.min_pts,
            "cutoffs": list(self.cutoffs),
            "mode": self.mode,
            "subgroups": list(self.subgroups),
            "vas_scale": self.vas_scale,
            "kmeans_restarts": self.kmeans_restarts,
            "som_epochs": self.som_epochs,
            "sweep": list(self.sweep),
        }


@dataclass
class PipelineReport:
    """Everything a run produced; ``data`` is the JSON-ready summary."""

    config: PipelineConfig
    data: dict
    cohort: Cohort
    assignments: dict[str, ClusterAssignment] = field(default_factory=dict)
    validity: list[ValidityReport] = field(default_factory=list)
    dendrogram: Dendrogram | None = None
    split: GroupSplit | None = None
    cutoffs: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)

    @property
    def chosen(self) -> str | None:
        return self.data.get("chosen_algorithm")


class _Stage:
    """Context manager that tags errors with the stage they came from."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, (CsiCutError, OSError)) and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


_BULKY = ("codebook", "bmu", "core", "inertia_history", "centroids")


def _load_cohort(config: PipelineConfig) -> Cohort:
    if config.input is not None:
        return ingest_csv(config.input, vas_scale=config.vas_scale)
    return generate_synthetic(TABLE3_PROFILE, seed=derive_seed(config.seed, "synthetic"))


def _cluster(name, x, config):
    if name == "KMeans":
        return kmeans(x, config.k, seed=derive_seed(config.seed, "kmeans"), restarts=config.kmeans_restarts), None
    if name == "Hierarchical":
        return hierarchical(x, config.k)
    if name == "SOM":
        return som(x, config.k, seed=derive_seed(config.seed, "som"), epochs=config.som_epochs), None
    return dbscan(x, config.eps, config.min_pts), None


def run_pipeline(config: PipelineConfig) -> PipelineReport:
    config.validate()
    data: dict[str, Any] = {"toolkit_version": __version__, "config": config.to_dict(), "skipped": {}}

    with _Stage("ingest"):
        cohort = _load_cohort(config)
    data["input"] = {
        "provenance": cohort.provenance,
        "n_subjects": len(cohort),
        "excluded": cohort.excluded,
        "n_hc": sum(r.cohort == "HC" for r in cohort),
        "n_female": sum(r.gender == "F" for r in cohort),
    }
    if config.input is not None:
        data["input"]["sha256"] = hashlib.sha256(Path(config.input).read_bytes()).hexdigest()
    else:
        data["input"]["note"] = "independent Gaussian draws per cluster; no covariance structure"
    report = PipelineReport(config, data, cohort)

    with _Stage("preprocess"):
        raw = encode_features(cohort)
        std_params, standardized = fit_standardize(raw)
        model = fit_pca(standardized, config.variance_threshold)
        features = transform(model, standardized)
    data["standardization"] = std_params.to_dict()
    data["pca"] = {**model.to_dict(), **pca_summary(model)}
    data["feature_importance"] = [{"feature": f, "score": s} for f, s in feature_importance(model)]

    clustering = {}
    for name in config.algorithms:
        try:
            with _Stage(f"cluster:{name}"):
                assignment, tree = _cluster(name, features.values, config)
        except StageError as exc:
            data["skipped"][f"cluster:{name}"] = str(exc.cause)
            continue
        report.assignments[name] = assignment
        if tree is not None:
            report.dendrogram = tree
        meta = {k: v for k, v in assignment.metadata.items() if k not in _BULKY}
        clustering[name] = {"k": assignment.k, "sizes": assignment.sizes(), "seed": assignment.seed,
                            "n_noise": int(assignment.noise_mask.sum()), "metadata": meta}
        if cohort.true_labels is not None:
            clustering[name]["adjusted_rand_vs_truth"] = adjusted_rand(cohort.true_labels, assignment.labels)
    data["clustering"] = clustering
    if not report.assignments:
        raise StageError("cluster", DataError("no clustering algorithm succeeded"))

    with _Stage("validate"):
        report.validity = [evaluate(features.values, a, cohort) for a in report.assignments.values()]
    data["validity"] = [r.to_dict() for r in report.validity]

    if config.sweep:
        with _Stage("sweep"):
            seed = derive_seed(config.seed, "sweep")
            data["silhouette_sweep"] = {
                "KMeans": silhouette_sweep(features.values, lambda x, k: kmeans(x, k, seed=seed), config.sweep),
                "Hierarchical": silhouette_sweep(features.values, lambda x, k: hierarchical(x, k)[0], config.sweep),
            }

    with _Stage("select"):
        chosen = select_best(report.validity)
    data["chosen_algorithm"] = chosen
    assignment = report.assignments[chosen]

    with _Stage("split"):
        split = build_split(assignment, cohort, config.mode)
    report.split = split
    index = {rid: i for i, rid in enumerate(cohort.ids)}
    data["split"] = {
        "mode": split.mode,
        "roles": split.clusters,
        "low": len(split.low_ids),
        "high": len(split.high_ids),
        "low_gender": _gender_counts(cohort, split.low_ids, index),
        "high_gender": _gender_counts(cohort, split.high_ids, index),
    }

    with _Stage("summary"):
        report.tables["table3"] = demographic_summary(cluster_views(assignment, cohort, split.clusters))
        report.tables["table4"] = demographic_summary(split_views(split, cohort))
    data["cluster_demographics"] = report.tables["table3"].to_dict()
    data["group_demographics"] = report.tables["table4"].to_dict()

    lo, hi = config.cutoffs
    for name in config.subgroups:
        try:
            with _Stage(f"cutoff:{name}"):
                report.cutoffs.update(cutoff_analysis(split, cohort, range(lo, hi + 1), (name,)))
        except StageError as exc:
            if not isinstance(exc.cause, EmptyGroup):
                raise
            data["skipped"][f"cutoff:{name}"] = str(exc.cause)
    data["cutoffs"] = {name: res.to_dict() for name, res in report.cutoffs.items()}
    data["notes"] = [
        "PCA keeps the smallest number of components whose cumulative variance ratio reaches the threshold.",
        "Per-cutoff 'auc' is balanced accuracy (sens + spec) / 2; roc_auc_trapezoidal is the whole-curve area.",
        "DBSCAN noise rows are excluded from internal indices and belong to no cluster externally.",
    ]
    return report


def _gender_counts(cohort, ids, index):
    genders = [cohort[index[i]].gender for i in ids]
    return {"F": genders.count("F"), "M": genders.count("M")}


# --- serialization -------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating, Fraction)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _dump_json(payload, path: Path) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n",
                    encoding="utf-8")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def emit_report(report: PipelineReport, out_dir: str | Path) -> dict[str, str]:
    """Write report files into ``out_dir`` and return ``{filename: sha256}``.

    The manifest is also written as ``manifest.json`` (not listed in itself).
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = _write_all(report, out)
        manifest = {p.name: _sha256(p) for p in sorted(written, key=lambda p: p.name)}
        _dump_json({"toolkit_version": __version__, "files": manifest}, out / "manifest.json")
    except OSError as exc:
        raise ReportIOError(f"cannot write report to {out}: {exc}") from exc
    return manifest


def _write_all(report: PipelineReport, out: Path) -> list[Path]:
    written = []
    report_path = out / "report.json"
    _dump_json(report.data, report_path)
    written.append(report_path)
    written.append(write_table2(report.validity, out / "table2.csv"))
    for name, res in report.cutoffs.items():
        written.append(write_table5(res.table, out / f"table5_{name.lower()}.csv"))
    for key, table in report.tables.items():
        written.append(table.write_csv(out / f"{key}.csv"))
    if report.dendrogram is not None:
        names = report.cohort.ids
        path = out / "dendrogram.json"
        _dump_json(report.dendrogram.to_dict(names), path)
        written.append(path)
        path = out / "dendrogram.nwk"
        path.write_text(report.dendrogram.to_newick(names) + "\n", encoding="utf-8")
        written.append(path)
    written.append(_write_assignments(report, out / "assignments.csv"))
    written.append(_write_boxplot(report, out / "boxplot_data.csv"))
    return written


def _write_assignments(report, path):
    algos = list(report.assignments)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", *algos])
        for i, rid in enumerate(report.cohort.ids):
            w.writerow([rid, *(int(report.assignments[a].labels[i]) for a in algos)])
    return path


def _write_boxplot(report, path):
    """CSI per cluster of the chosen clustering, for external box plots."""
    assignment = report.assignments[report.chosen]
    role = {lab: r for r, lab in report.split.clusters.items()}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "algorithm", "label", "cluster", "cohort", "gender", "csi"])
        for r, lab in zip(report.cohort, assignment.labels):
            w.writerow([r.id, report.chosen, int(lab), role.get(int(lab), "noise"), r.cohort, r.gender, r.csi])
    return path


# --- fixtures --------------------------------------------------------------

FIXTURE_KINDS = ("table3_profile", "table5_confusion")


def table5_cohort() -> tuple[Cohort, GroupSplit]:
    """Cohort and low/high split whose CSI values realize the published
    Table 5 confusion counts for every cut-off from 20 to 45."""
    records = []
    low, high = [], []
    cuts = sorted(TABLE5_COUNTS["Females"])
    group_sizes = {("Females", "high"): 25, ("Females", "low"): 49, ("Males", "high"): 13, ("Males", "low"): 64}
    hc_left = {"F": 23, "M": 40}
    for sub, gender in (("Females", "F"), ("Males", "M")):
        counts = TABLE5_COUNTS[sub]
        for side in ("high", "low"):
            size = group_sizes[(sub, side)]
            # number of subjects testing positive at each cut-off
            positive = [counts[c][0] if side == "high" else size - counts[c][1] for c in cuts]
            values = [cuts[0] - 10] * (size - positive[0])
            for i, c in enumerate(cuts):
                nxt = positive[i + 1] if i + 1 < len(cuts) else 0
                values += [c] * (positive[i] - nxt)
            for v in values:
                healthy = side == "low" and hc_left[gender] > 0
                if healthy:
                    hc_left[gender] -= 1
                sid = f"T{len(records) + 1:04d}"
                records.append(SubjectRecord(sid, "HC" if healthy else "CLBP", gender,
                                             vas=0.0, pdi=0.0, was=0.0, rand36_pf=0.0, pcs=0.0,
                                             ieq=0.0, bsi=0.0, csi=float(v)))
                (high if side == "high" else low).append(sid)
    cohort = Cohort(tuple(records), provenance="fixture(table5_confusion)")
    return cohort, GroupSplit(tuple(low), tuple(high), "AB_vs_C")


def write_groups(split: GroupSplit, path: Path) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "group"])
        for i in split.low_ids:
            w.writerow([i, "low"])
        for i in split.high_ids:
            w.writerow([i, "high"])
    return path


def load_groups(path: str | Path, mode: str = "AB_vs_C") -> GroupSplit:
    low, high = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            group = row["group"].strip()
            if group not in ("low", "high"):
                raise DataError(f"unknown group {group!r} for {row['id']}")
            (low if group == "low" else high).append(row["id"].strip())
    return GroupSplit(tuple(low), tuple(high), mode)


def generate_fixture(kind: str, seed: int, out_dir: str | Path) -> list[Path]:
    if kind not in FIXTURE_KINDS:
        raise DataError(f"unknown fixture kind {kind!r}; choose from {FIXTURE_KINDS}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if kind == "table3_profile":
            cohort = generate_synthetic(TABLE3_PROFILE, seed=derive_seed(seed, "synthetic"))
            return [write_csv(cohort, out / "table3_cohort.csv")]
        cohort, split = table5_cohort()
        return [write_csv(cohort, out / "table5_cohort.csv"), write_groups(split, out / "table5_groups.csv")]
    except OSError as exc:
        raise ReportIOError(f"cannot write fixture to {out}: {exc}") from exc
