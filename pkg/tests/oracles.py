"""Slow, independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import math
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

import numpy as np


def naive_ward(x):
    """Agglomerative Ward clustering recomputing every cluster distance per step.

    Distance between clusters a and b is sqrt(2 na nb / (na + nb)) * |ca - cb|.
    Ties go to the smallest (min node id, max node id) pair.
    Returns a list of (left, right, distance, size).
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    clusters = {i: [i] for i in range(n)}
    merges = []
    for step in range(n - 1):
        best = None
        for a, b in itertools.combinations(sorted(clusters), 2):
            ma, mb = clusters[a], clusters[b]
            na, nb = len(ma), len(mb)
            ca, cb = x[ma].mean(axis=0), x[mb].mean(axis=0)
            d = math.sqrt(2.0 * na * nb / (na + nb)) * float(np.linalg.norm(ca - cb))
            key = (d, a, b)
            if best is None or key < best:
                best = key
        d, a, b = best
        merged = clusters.pop(a) + clusters.pop(b)
        clusters[n + step] = merged
        merges.append((a, b, d, len(merged)))
    return merges


def silhouette_direct(x, labels):
    x = np.asarray(x, dtype=float)
    labels = list(labels)
    n = len(x)
    total = 0.0
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            continue
        a = sum(math.dist(x[i], x[j]) for j in own) / len(own)
        b = min(
            sum(math.dist(x[i], x[j]) for j in range(n) if labels[j] == c)
            / sum(1 for j in range(n) if labels[j] == c)
            for c in set(labels) if c != labels[i]
        )
        total += (b - a) / max(a, b)
    return total / n


def _centroid(x, labels, c):
    pts = [x[j] for j in range(len(x)) if labels[j] == c]
    return [sum(p[d] for p in pts) / len(pts) for d in range(len(x[0]))]


def davies_bouldin_direct(x, labels):
    x = [list(map(float, r)) for r in np.asarray(x)]
    labels = list(labels)
    cs = sorted(set(labels))
    cent = {c: _centroid(x, labels, c) for c in cs}
    scat = {}
    for c in cs:
        pts = [x[j] for j in range(len(x)) if labels[j] == c]
        scat[c] = sum(math.dist(p, cent[c]) for p in pts) / len(pts)
    worst = [max((scat[i] + scat[j]) / math.dist(cent[i], cent[j]) for j in cs if j != i) for i in cs]
    return sum(worst) / len(cs)


def calinski_harabasz_direct(x, labels):
    """Between (CO) and within (SE) dispersion from raw sums."""
    x = [list(map(float, r)) for r in np.asarray(x)]
    labels = list(labels)
    n, cs = len(x), sorted(set(labels))
    k = len(cs)
    grand = [sum(r[d] for r in x) / n for d in range(len(x[0]))]
    co = 0.0
    se = 0.0
    for c in cs:
        pts = [x[j] for j in range(n) if labels[j] == c]
        cen = _centroid(x, labels, c)
        co += len(pts) * sum((a - b) ** 2 for a, b in zip(cen, grand))
        se += sum(sum((a - b) ** 2 for a, b in zip(p, cen)) for p in pts)
    return (co / (k - 1)) / (se / (n - k))


def mann_whitney_enumerate(a, b):
    """U of ``a`` by pair counting, and the exact two-sided p by enumerating
    every way to pick |a| of the pooled values."""
    pooled = list(a) + list(b)
    n1, n2 = len(a), len(b)

    def u2_of(xs, ys):
        # twice U, to stay in integers
        return sum((p > q) * 2 + (p == q) for p in xs for q in ys)

    u2_obs = u2_of(a, b)
    hits = total = 0
    for idx in itertools.combinations(range(len(pooled)), n1):
        chosen = set(idx)
        xs = [pooled[i] for i in idx]
        ys = [pooled[i] for i in range(len(pooled)) if i not in chosen]
        total += 1
        if abs(u2_of(xs, ys) - n1 * n2) >= abs(u2_obs - n1 * n2):
            hits += 1
    return u2_obs / 2, float(Fraction(hits, total))


def half_up(value, places=2):
    if value is None or value == math.inf:
        return value
    return float(Decimal(str(float(value))).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))


def metrics_from_counts(tp, fn, tn, fp):
    """Exact Table 5 metrics; inf/None mark division by zero."""
    def ratio(p, q):
        if q == 0:
            return None if p == 0 else math.inf
        return Fraction(p) / Fraction(q)

    sens = Fraction(tp, tp + fn)
    spec = Fraction(tn, tn + fp)
    return {
        "auc": (sens + spec) / 2,
        "youden": sens + spec - 1,
        "sensitivity": sens,
        "specificity": spec,
        "ppv": ratio(tp, tp + fp),
        "npv": ratio(tn, tn + fn),
        "plr": ratio(sens, 1 - spec),
        "nlr": ratio(1 - sens, spec),
    }


def reconstruct_counts(row, n_high, n_low):
    """All (tp, tn, mismatched metric names) with the fewest mismatches
    against a published row of 2-decimal metrics. An infinite PLR is
    taken to match nothing printed."""
    best, found = None, []
    for tp in range(n_high + 1):
        for tn in range(n_low + 1):
            m = metrics_from_counts(tp, n_high - tp, tn, n_low - tn)
            bad = tuple(name for name, v in m.items() if half_up(v) != row[name])
            if best is None or len(bad) < best:
                best, found = len(bad), [(tp, tn, bad)]
            elif len(bad) == best:
                found.append((tp, tn, bad))
    return found
