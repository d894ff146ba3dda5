"""Published reference values of the CSI cut-off study.

These numbers come from the original cohort, which is not distributed; they
serve as fixtures for the selection logic and as documentation, not as
targets that synthetic data is expected to reproduce.
"""

# Internal and external validity per algorithm on the original data.
TABLE2 = {
    "Hierarchical": {"silhouette": 0.47, "calinski_harabasz": 145.66, "davies_bouldin": 0.91, "true_hc": 62, "hc_cluster_size": 65},
    "KMeans": {"silhouette": 0.48, "calinski_harabasz": 154.44, "davies_bouldin": 0.89, "true_hc": 60, "hc_cluster_size": 65},
    "DBSCAN": {"silhouette": 0.34, "calinski_harabasz": 62.46, "davies_bouldin": 3.89, "true_hc": 63, "hc_cluster_size": 69},
    "SOM": {"silhouette": 0.47, "calinski_harabasz": 153.44, "davies_bouldin": 0.90, "true_hc": 60, "hc_cluster_size": 63},
}

# Low/high HACS group sizes (female, male).
TABLE4_GROUPS = {"low": (49, 64), "high": (25, 13)}
GROUP_SIZES = {
    "Overall": {"high": 38, "low": 113},
    "Females": {"high": 25, "low": 49},
    "Males": {"high": 13, "low": 64},
}

TABLE5_METRICS = ("auc", "youden", "sensitivity", "specificity", "ppv", "npv", "plr", "nlr")
TABLE5_SUBGROUPS = ("Overall", "Females", "Males")

# cutoff, then (AUC, YI, Sen, Spe, PPV, NPV, PLR, NLR) for Overall, Females, Males.
_TABLE5_RAW = (
    (20, 0.63, 0.27, 1, 0.27, 0.31, 1, 1.36, 0, 0.58, 0.16, 1, 0.16, 0.38, 1, 1.2, 0, 0.67, 0.34, 1, 0.34, 0.24, 1, 1.52, 0),
    (21, 0.65, 0.29, 1, 0.29, 0.32, 1, 1.41, 0, 0.59, 0.18, 1, 0.18, 0.38, 1, 1.22, 0, 0.69, 0.38, 1, 0.38, 0.25, 1, 1.6, 0),
    (22, 0.64, 0.28, 0.97, 0.31, 0.32, 0.97, 1.41, 0.08, 0.58, 0.16, 0.96, 0.2, 0.38, 0.91, 1.21, 0.2, 0.7, 0.39, 1, 0.39, 0.25, 1, 1.64, 0),
    (23, 0.66, 0.32, 0.97, 0.35, 0.33, 0.98, 1.49, 0.08, 0.6, 0.2, 0.96, 0.24, 0.39, 0.92, 1.27, 0.16, 0.71, 0.42, 1, 0.42, 0.26, 1, 1.73, 0),
    (24, 0.67, 0.35, 0.97, 0.37, 0.34, 0.98, 1.55, 0.07, 0.6, 0.2, 0.96, 0.24, 0.39, 0.92, 1.27, 0.16, 0.73, 0.47, 1, 0.47, 0.28, 1, 1.88, 0),
    (25, 0.69, 0.39, 0.97, 0.42, 0.36, 0.98, 1.67, 0.06, 0.61, 0.23, 0.96, 0.27, 0.4, 0.93, 1.31, 0.15, 0.77, 0.53, 1, 0.53, 0.3, 1, 2.13, 0),
    (26, 0.71, 0.42, 0.97, 0.44, 0.37, 0.98, 1.75, 0.06, 0.61, 0.23, 0.96, 0.27, 0.4, 0.93, 1.31, 0.15, 0.79, 0.58, 1, 0.58, 0.32, 1, 2.37, 0),
    (27, 0.7, 0.41, 0.92, 0.49, 0.38, 0.95, 1.79, 0.16, 0.59, 0.19, 0.88, 0.31, 0.39, 0.83, 1.27, 0.39, 0.81, 0.62, 1, 0.62, 0.35, 1, 2.67, 0),
    (28, 0.71, 0.42, 0.89, 0.52, 0.39, 0.94, 1.87, 0.2, 0.63, 0.27, 0.88, 0.39, 0.42, 0.86, 1.44, 0.31, 0.77, 0.55, 0.92, 0.62, 0.33, 0.98, 2.46, 0.12),
    (29, 0.71, 0.43, 0.87, 0.56, 0.4, 0.93, 1.96, 0.24, 0.63, 0.27, 0.84, 0.43, 0.43, 0.84, 1.47, 0.37, 0.79, 0.58, 0.92, 0.66, 0.35, 0.98, 2.69, 0.12),
    (30, 0.72, 0.43, 0.87, 0.57, 0.4, 0.93, 2, 0.23, 0.63, 0.27, 0.84, 0.43, 0.43, 0.84, 1.47, 0.37, 0.8, 0.59, 0.92, 0.67, 0.36, 0.98, 2.81, 0.11),
    (31, 0.71, 0.43, 0.82, 0.61, 0.41, 0.91, 2.1, 0.3, 0.61, 0.23, 0.76, 0.47, 0.42, 0.79, 1.43, 0.51, 0.82, 0.64, 0.92, 0.72, 0.4, 0.98, 3.28, 0.11),
    (32, 0.73, 0.46, 0.82, 0.65, 0.44, 0.91, 2.3, 0.29, 0.64, 0.27, 0.76, 0.51, 0.44, 0.81, 1.55, 0.47, 0.84, 0.67, 0.92, 0.75, 0.43, 0.98, 3.69, 0.1),
    (33, 0.74, 0.49, 0.79, 0.7, 0.47, 0.91, 2.62, 0.3, 0.68, 0.35, 0.72, 0.63, 0.5, 0.82, 1.96, 0.44, 0.84, 0.67, 0.92, 0.75, 0.43, 0.98, 3.69, 0.1),
    (34, 0.76, 0.52, 0.79, 0.73, 0.5, 0.91, 2.97, 0.29, 0.71, 0.41, 0.72, 0.69, 0.55, 0.83, 2.35, 0.4, 0.84, 0.69, 0.92, 0.77, 0.44, 0.98, 3.94, 0.1),
    (35, 0.76, 0.52, 0.76, 0.76, 0.52, 0.91, 3.19, 0.31, 0.69, 0.37, 0.68, 0.69, 0.53, 0.81, 2.22, 0.46, 0.87, 0.74, 0.92, 0.81, 0.5, 0.98, 4.92, 0.09),
    (36, 0.74, 0.47, 0.71, 0.76, 0.5, 0.89, 2.97, 0.38, 0.67, 0.33, 0.64, 0.69, 0.52, 0.79, 2.09, 0.52, 0.83, 0.66, 0.85, 0.81, 0.48, 0.96, 4.51, 0.19),
    (37, 0.7, 0.39, 0.61, 0.79, 0.49, 0.86, 2.85, 0.5, 0.65, 0.29, 0.56, 0.73, 0.52, 0.77, 2.11, 0.6, 0.76, 0.52, 0.69, 0.83, 0.45, 0.93, 4.03, 0.37),
    (38, 0.7, 0.4, 0.61, 0.8, 0.5, 0.86, 2.97, 0.5, 0.65, 0.29, 0.56, 0.73, 0.52, 0.77, 2.11, 0.6, 0.77, 0.54, 0.69, 0.84, 0.47, 0.93, 4.43, 0.36),
    (39, 0.71, 0.41, 0.61, 0.81, 0.51, 0.86, 3.11, 0.49, 0.65, 0.29, 0.56, 0.73, 0.52, 0.77, 2.11, 0.6, 0.78, 0.55, 0.69, 0.86, 0.5, 0.93, 4.92, 0.36),
    (40, 0.7, 0.39, 0.58, 0.81, 0.51, 0.85, 3.12, 0.52, 0.66, 0.32, 0.56, 0.76, 0.54, 0.77, 2.29, 0.58, 0.74, 0.47, 0.62, 0.86, 0.47, 0.92, 4.38, 0.45),
    (41, 0.7, 0.39, 0.55, 0.84, 0.54, 0.85, 3.47, 0.53, 0.68, 0.36, 0.56, 0.8, 0.58, 0.78, 2.74, 0.55, 0.71, 0.41, 0.54, 0.88, 0.47, 0.9, 4.31, 0.53),
    (42, 0.67, 0.35, 0.5, 0.85, 0.53, 0.83, 3.32, 0.59, 0.69, 0.38, 0.56, 0.82, 0.61, 0.78, 3.05, 0.54, 0.63, 0.26, 0.38, 0.88, 0.38, 0.88, 3.08, 0.7),
    (43, 0.67, 0.35, 0.47, 0.88, 0.56, 0.83, 3.82, 0.6, 0.7, 0.4, 0.52, 0.88, 0.68, 0.78, 4.25, 0.55, 0.63, 0.26, 0.38, 0.88, 0.38, 0.88, 3.08, 0.7),
    (44, 0.67, 0.34, 0.45, 0.89, 0.59, 0.83, 4.21, 0.62, 0.68, 0.36, 0.48, 0.88, 0.67, 0.77, 3.92, 0.59, 0.65, 0.29, 0.38, 0.91, 0.45, 0.88, 4.1, 0.68),
    (45, 0.67, 0.34, 0.45, 0.89, 0.59, 0.83, 4.21, 0.62, 0.68, 0.36, 0.48, 0.88, 0.67, 0.77, 3.92, 0.59, 0.65, 0.29, 0.38, 0.91, 0.45, 0.88, 4.1, 0.68),
)


def table5(subgroup: str) -> list[dict]:
    """Published rows for one subgroup as dicts keyed by metric name."""
    offset = 1 + 8 * TABLE5_SUBGROUPS.index(subgroup)
    return [
        {"cutoff": row[0], **dict(zip(TABLE5_METRICS, row[offset : offset + 8]))}
        for row in _TABLE5_RAW
    ]


# Published optimum per subgroup.
TABLE5_OPTIMA = {"Overall": 35, "Females": 34, "Males": 35}

# Confusion counts behind the overall row at cut-off 35 (38 high, 113 low).
OVERALL_35_COUNTS = {"tp": 29, "fn": 9, "tn": 86, "fp": 27}

# Per-gender confusion counts (tp, tn) at each cut-off, reconstructed by
# exhaustive search over integer counts matching every published metric of
# the row. Overall counts are the sums. Rows with no exact integer solution
# (see TABLE5_INCONSISTENT) use the unique closest solution, which is also
# consistent with the Overall row.
TABLE5_COUNTS = {
    "Females": {
        20: (25, 8), 21: (25, 9), 22: (24, 10), 23: (24, 12), 24: (24, 12), 25: (24, 13),
        26: (24, 13), 27: (22, 15), 28: (22, 19), 29: (21, 21), 30: (21, 21), 31: (19, 23),
        32: (19, 25), 33: (18, 31), 34: (18, 34), 35: (17, 34), 36: (16, 34), 37: (14, 36),
        38: (14, 36), 39: (14, 36), 40: (14, 37), 41: (14, 39), 42: (14, 40), 43: (13, 43),
        44: (12, 43), 45: (12, 43),
    },
    "Males": {
        20: (13, 22), 21: (13, 24), 22: (13, 25), 23: (13, 27), 24: (13, 30), 25: (13, 34),
        26: (13, 37), 27: (13, 40), 28: (12, 40), 29: (12, 42), 30: (12, 43), 31: (12, 46),
        32: (12, 48), 33: (12, 48), 34: (12, 49), 35: (12, 52), 36: (11, 52), 37: (9, 53),
        38: (9, 54), 39: (9, 55), 40: (8, 55), 41: (7, 56), 42: (5, 56), 43: (5, 56),
        44: (5, 58), 45: (5, 58),
    },
}

# Published cells that no integer confusion table reproduces under half-up
# rounding: (subgroup, cutoff) -> metric names.
TABLE5_INCONSISTENT = {
    ("Females", 21): ("plr",),
    ("Males", 26): ("ppv",),
    ("Males", 27): ("youden", "specificity"),
    ("Males", 28): ("specificity",),
}
