"""Low/high group construction, CSI cut-off tables and group comparisons."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .clustering.base import NOISE, ClusterAssignment
from .dataset import DEMOGRAPHICS, QUESTIONNAIRES, Cohort
from .errors import (
    AmbiguousClusters,
    DataError,
    EmptyGroup,
    EmptySample,
    EmptyTable,
    NotThreeClusters,
    UnknownVariable,
)

MODES = ("AB_vs_C", "HC_vs_C")
SUBGROUPS = {"Overall": None, "Females": "F", "Males": "M"}
DEFAULT_CUTOFFS = range(20, 46)
CLINICAL_SUM = Fraction(3, 2)

# A metric is an exact Fraction, math.inf, or None when undefined (0/0).
Metric = Union[Fraction, float, None]


@dataclass(frozen=True)
class GroupSplit:
    low_ids: tuple[str, ...]
    high_ids: tuple[str, ...]
    mode: str
    clusters: dict = field(default_factory=dict)

    def __post_init__(self):
        if set(self.low_ids) & set(self.high_ids):
            raise DataError("low and high groups overlap")

    def restrict(self, cohort: Cohort, gender: str | None) -> "GroupSplit":
        """Keep only members of one gender on both sides."""
        if gender is None:
            return self
        keep = {r.id for r in cohort if r.gender == gender}
        return replace(
            self,
            low_ids=tuple(i for i in self.low_ids if i in keep),
            high_ids=tuple(i for i in self.high_ids if i in keep),
        )


def identify_clusters(assignment: ClusterAssignment, cohort: Cohort) -> dict[str, int]:
    """Map the roles A (most healthy), B, C (highest mean CSI) to cluster labels."""
    if assignment.k != 3:
        raise NotThreeClusters(f"{assignment.algorithm} produced {assignment.k} clusters, need 3")
    if len(cohort) != assignment.n:
        raise DataError("cohort and assignment differ in row count")
    csi = cohort.values("csi")
    is_hc = np.array([r.cohort == "HC" for r in cohort])
    mean_csi = [float(csi[assignment.labels == c].mean()) for c in range(3)]
    hc_frac = [float(is_hc[assignment.labels == c].mean()) for c in range(3)]
    c_label = int(np.argmax(mean_csi))
    a_label = int(np.argmax(hc_frac))
    if mean_csi.count(mean_csi[c_label]) > 1:
        raise AmbiguousClusters("several clusters share the highest mean CSI")
    if hc_frac.count(hc_frac[a_label]) > 1:
        raise AmbiguousClusters("several clusters share the highest HC fraction")
    if a_label == c_label:
        raise AmbiguousClusters("the most healthy cluster also has the highest mean CSI")
    (b_label,) = {0, 1, 2} - {a_label, c_label}
    return {"A": a_label, "B": b_label, "C": c_label}


def build_split(assignment: ClusterAssignment, cohort: Cohort, mode: str = "AB_vs_C") -> GroupSplit:
    if mode not in MODES:
        raise DataError(f"mode must be one of {MODES}")
    roles = identify_clusters(assignment, cohort)
    labels = assignment.labels
    high = tuple(r.id for r, lab in zip(cohort, labels) if lab == roles["C"])
    if mode == "AB_vs_C":
        low = tuple(r.id for r, lab in zip(cohort, labels) if lab in (roles["A"], roles["B"]))
    else:
        low = tuple(r.id for r, lab in zip(cohort, labels) if lab == roles["A"] and r.cohort == "HC")
    return GroupSplit(low, high, mode, roles)


def _ratio(num, den) -> Metric:
    if den == 0:
        return None if num == 0 else math.inf
    return Fraction(num) / Fraction(den)


@dataclass(frozen=True)
class DiagnosticRow:
    """Confusion counts at one cut-off and the metrics derived from them.

    ``auc`` is the single-threshold balanced accuracy ``(sens + spec) / 2``.
    Rows built by :meth:`from_reported` carry published values without counts.
    """

    cutoff: int
    sensitivity: Fraction
    specificity: Fraction
    auc: Fraction
    youden: Fraction
    ppv: Metric
    npv: Metric
    plr: Metric
    nlr: Metric
    tp: int | None = None
    fp: int | None = None
    tn: int | None = None
    fn: int | None = None

    @classmethod
    def from_counts(cls, cutoff: int, tp: int, fp: int, tn: int, fn: int) -> "DiagnosticRow":
        if tp + fn == 0 or tn + fp == 0:
            raise EmptyGroup("both groups need at least one subject")
        sens = Fraction(tp, tp + fn)
        spec = Fraction(tn, tn + fp)
        return cls(
            cutoff=cutoff,
            sensitivity=sens,
            specificity=spec,
            auc=(sens + spec) / 2,
            youden=sens + spec - 1,
            ppv=_ratio(tp, tp + fp),
            npv=_ratio(tn, tn + fn),
            plr=_ratio(sens, 1 - spec),
            nlr=_ratio(1 - sens, spec),
            tp=tp,
            fp=fp,
            tn=tn,
            fn=fn,
        )

    @classmethod
    def from_reported(cls, cutoff: int, auc, youden, sens, spec, ppv, npv, plr, nlr) -> "DiagnosticRow":
        f = lambda v: None if v is None else (math.inf if v == math.inf else Fraction(str(v)))
        return cls(cutoff, f(sens), f(spec), f(auc), f(youden), f(ppv), f(npv), f(plr), f(nlr))

    @property
    def clinically_useful(self) -> bool:
        return self.sensitivity + self.specificity >= CLINICAL_SUM

    def rounded(self, places: int = 2) -> dict:
        return {
            "cutoff": self.cutoff,
            **{name: round_metric(getattr(self, name), places) for name in METRIC_COLUMNS},
        }


METRIC_COLUMNS = ("auc", "youden", "sensitivity", "specificity", "ppv", "npv", "plr", "nlr")


def round_metric(value: Metric, places: int = 2) -> float | None:
    """Round half-up from the exact value; infinities and ``None`` pass through."""
    if value is None or value == math.inf:
        return value
    frac = Fraction(value)
    with localcontext() as ctx:
        ctx.prec = 60
        exact = Decimal(frac.numerator) / Decimal(frac.denominator)
        return float(exact.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))


def _csi_lookup(cohort: Cohort) -> dict[str, float]:
    return {r.id: r.csi for r in cohort}


def diagnostic_table(
    split: GroupSplit, cohort: Cohort, cutoffs: Iterable[int] = DEFAULT_CUTOFFS
) -> list[DiagnosticRow]:
    """Sweep integer cut-offs; a subject tests positive when ``csi >= cutoff``."""
    cutoffs = [int(c) for c in cutoffs]
    if not cutoffs:
        raise EmptyTable("cut-off range is empty")
    if not split.low_ids or not split.high_ids:
        raise EmptyGroup(f"low={len(split.low_ids)}, high={len(split.high_ids)}")
    csi = _csi_lookup(cohort)
    high = np.array([csi[i] for i in split.high_ids])
    low = np.array([csi[i] for i in split.low_ids])
    rows = []
    for c in cutoffs:
        tp = int(np.sum(high >= c))
        fp = int(np.sum(low >= c))
        rows.append(DiagnosticRow.from_counts(c, tp, fp, len(low) - fp, len(high) - tp))
    return rows


@dataclass(frozen=True)
class CutoffResult:
    subgroup: str
    cutoff: int
    row: DiagnosticRow
    clinically_useful: bool
    table: tuple[DiagnosticRow, ...]
    roc_auc: float | None = None

    def to_dict(self) -> dict:
        return {
            "subgroup": self.subgroup,
            "cutoff": self.cutoff,
            "clinically_useful": self.clinically_useful,
            "metrics": self.row.rounded(),
            "counts": {k: getattr(self.row, k) for k in ("tp", "fp", "tn", "fn")},
            "roc_auc_trapezoidal": self.roc_auc,
        }


def _selection_key(row: DiagnosticRow):
    return (-row.youden, abs(row.sensitivity - row.specificity), row.cutoff)


def select_cutoff(
    table: Sequence[DiagnosticRow], subgroup: str = "Overall", roc_auc: float | None = None
) -> CutoffResult:
    """Maximise Youden's index; ties go to the more balanced sens/spec, then the lower cut-off."""
    if not table:
        raise EmptyTable("no diagnostic rows to choose from")
    best = min(table, key=_selection_key)
    return CutoffResult(subgroup, best.cutoff, best, best.clinically_useful,
                        tuple(sorted(table, key=lambda r: r.cutoff)), roc_auc)


def roc_auc(split: GroupSplit, cohort: Cohort) -> float:
    """Area under the full empirical ROC curve (trapezoidal rule), high group positive."""
    if not split.low_ids or not split.high_ids:
        raise EmptyGroup("both groups need at least one subject")
    csi = _csi_lookup(cohort)
    high = np.array([csi[i] for i in split.high_ids])
    low = np.array([csi[i] for i in split.low_ids])
    thresholds = np.unique(np.concatenate([high, low]))[::-1]
    tpr = [0.0] + [float(np.mean(high >= t)) for t in thresholds]
    fpr = [0.0] + [float(np.mean(low >= t)) for t in thresholds]
    return float(sum((fpr[i + 1] - fpr[i]) * (tpr[i + 1] + tpr[i]) / 2 for i in range(len(tpr) - 1)))


def cutoff_analysis(
    split: GroupSplit,
    cohort: Cohort,
    cutoffs: Iterable[int] = DEFAULT_CUTOFFS,
    subgroups: Sequence[str] = tuple(SUBGROUPS),
) -> dict[str, CutoffResult]:
    cutoffs = list(cutoffs)
    out = {}
    for name in subgroups:
        part = split.restrict(cohort, SUBGROUPS[name])
        table = diagnostic_table(part, cohort, cutoffs)
        out[name] = select_cutoff(table, name, roc_auc(part, cohort))
    return out


TABLE5_HEADER = ("cutoff", "auc", "youden", "sensitivity", "specificity", "ppv", "npv", "plr", "nlr",
                 "tp", "fp", "tn", "fn")


def write_table5(table: Sequence[DiagnosticRow], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE5_HEADER)
        for row in table:
            shown = row.rounded()
            cells = [row.cutoff] + [_cell(shown[m]) for m in METRIC_COLUMNS]
            cells += ["" if getattr(row, c) is None else getattr(row, c) for c in ("tp", "fp", "tn", "fn")]
            w.writerow(cells)
    return path


def _cell(v):
    if v is None:
        return "NA"
    if v == math.inf:
        return "inf"
    return f"{v:g}"


# --- Mann-Whitney U -------------------------------------------------------

EXACT_LIMIT = 400


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p_value: float
    n1: int
    n2: int
    method: str


def doubled_midranks(values: Sequence[float]) -> np.ndarray:
    """Twice the average rank of each value (integers, so sums stay exact)."""
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x), dtype=np.int64)
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + 1) + (j + 1)
        i = j + 1
    return ranks


def _exact_p(ranks2: np.ndarray, n1: int, u2_obs: int) -> float:
    """Permutation p-value of the rank-sum statistic, conditional on ties.

    Counts subsets of size ``n1`` whose doubled U is at least as far from its
    mean as the observed one.
    """
    n = len(ranks2)
    n2 = n - n1
    top = int(ranks2.sum())
    dp = np.zeros((n1 + 1, top + 1), dtype=np.int64)
    dp[0, 0] = 1
    for seen, r in enumerate(ranks2.tolist(), start=1):
        for j in range(min(seen, n1), 0, -1):
            dp[j, r:] += dp[j - 1, : top + 1 - r]
    sums = np.flatnonzero(dp[n1])
    u2 = sums - n1 * (n1 + 1)
    centre = n1 * n2
    extreme = np.abs(u2 - centre) >= abs(u2_obs - centre)
    count = int(dp[n1, sums[extreme]].sum())
    return float(Fraction(count, math.comb(n, n1)))


def mann_whitney_u(sample_a: Sequence[float], sample_b: Sequence[float]) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test; ``u`` is the statistic of ``sample_a``.

    Exact (ties handled by permutation of midranks) when ``n1 * n2 <= 400``,
    otherwise the tie- and continuity-corrected normal approximation.
    """
    a = [float(v) for v in sample_a]
    b = [float(v) for v in sample_b]
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise EmptySample("both samples need at least one value")
    ranks2 = doubled_midranks(a + b)
    u2 = int(ranks2[:n1].sum()) - n1 * (n1 + 1)
    u = u2 / 2
    if n1 * n2 <= EXACT_LIMIT:
        return MannWhitneyResult(u, _exact_p(ranks2, n1, u2), n1, n2, "exact")

    n = n1 + n2
    _, counts = np.unique(np.array(a + b), return_counts=True)
    tie_term = float(np.sum(counts**3 - counts)) / (n * (n - 1))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return MannWhitneyResult(u, 1.0, n1, n2, "normal")
    z = (abs(u - n1 * n2 / 2.0) - 0.5) / math.sqrt(var)
    p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    # erfc underflows to 0 only for |z| > ~38
    p = max(p, math.ulp(0.0))
    return MannWhitneyResult(u, p, n1, n2, "normal")


# --- demographic tables ---------------------------------------------------

SUMMARY_VARIABLES = DEMOGRAPHICS + QUESTIONNAIRES


@dataclass(frozen=True)
class DemographicTable:
    groups: tuple[str, ...]
    sizes: dict
    gender: dict
    rows: tuple[dict, ...]
    pairs: tuple[tuple[str, str], ...]

    def to_dict(self) -> dict:
        return {
            "groups": list(self.groups),
            "sizes": self.sizes,
            "gender": self.gender,
            "pairs": [list(p) for p in self.pairs],
            "rows": list(self.rows),
        }

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["variable", *self.groups, *(f"p_{a}_vs_{b}" for a, b in self.pairs)])
            w.writerow(["gender", *(self.gender[g] for g in self.groups), *("" for _ in self.pairs)])
            for row in self.rows:
                cells = [row["variable"]]
                for g in self.groups:
                    mean, sd = row["mean"][g], row["sd"][g]
                    cells.append("" if mean is None else f"{mean:.1f} ± {sd:.1f}" if sd is not None else f"{mean:.1f}")
                for a, b in self.pairs:
                    p = row["p"][f"{a}|{b}"]
                    cells.append("" if p is None else f"{p:.4g}")
                w.writerow(cells)
        return path


def demographic_summary(
    views: Sequence[tuple[str, Cohort]],
    variables: Sequence[str] = SUMMARY_VARIABLES,
    pairs: Sequence[tuple[str, str]] | None = None,
) -> DemographicTable:
    """Mean ± SD (sample SD) per group and variable, with Mann-Whitney p-values.

    ``pairs`` defaults to every pair of groups in the given order.
    """
    if not views:
        raise DataError("no groups to summarise")
    names = tuple(name for name, _ in views)
    unknown = [v for v in variables if v not in SUMMARY_VARIABLES]
    if unknown:
        raise UnknownVariable(f"unknown variables {unknown}")
    if pairs is None:
        pairs = tuple(itertools.combinations(names, 2))
    for a, b in pairs:
        if a not in names or b not in names:
            raise DataError(f"pair ({a}, {b}) names an unknown group")
    by_name = dict(views)
    rows = []
    for var in variables:
        data = {}
        for name in names:
            vals = by_name[name].values(var)
            data[name] = vals[np.isfinite(vals)]
        mean = {g: (float(v.mean()) if len(v) else None) for g, v in data.items()}
        sd = {g: (float(v.std(ddof=1)) if len(v) > 1 else None) for g, v in data.items()}
        p = {}
        for a, b in pairs:
            if len(data[a]) and len(data[b]):
                p[f"{a}|{b}"] = mann_whitney_u(data[a], data[b]).p_value
            else:
                p[f"{a}|{b}"] = None
        rows.append({"variable": var, "mean": mean, "sd": sd, "p": p})
    gender = {
        name: f"{sum(r.gender == 'F' for r in c)}F/{sum(r.gender == 'M' for r in c)}M" for name, c in views
    }
    return DemographicTable(names, {n: len(c) for n, c in views}, gender, tuple(rows), tuple(pairs))


def split_views(split: GroupSplit, cohort: Cohort) -> list[tuple[str, Cohort]]:
    index = {rid: i for i, rid in enumerate(cohort.ids)}
    return [
        ("low", cohort.select([index[i] for i in split.low_ids])),
        ("high", cohort.select([index[i] for i in split.high_ids])),
    ]


def cluster_views(assignment: ClusterAssignment, cohort: Cohort, roles: dict | None = None):
    """One cohort view per cluster, named by role when ``roles`` is given."""
    names = {lab: role for role, lab in (roles or {}).items()}
    views = []
    for c in range(assignment.k):
        idx = np.flatnonzero(assignment.labels == c)
        views.append((names.get(c, f"cluster{c}"), cohort.select(idx.tolist())))
    if roles:
        views.sort(key=lambda v: v[0])
    if np.any(assignment.labels == NOISE):
        views.append(("noise", cohort.select(np.flatnonzero(assignment.labels == NOISE).tolist())))
    return views
