"""Centroid difference scores, the baseline SFIT is compared against.

For cluster c and feature j the score is |mean_j(c) - mean_j| / std_j with
the global mean and population standard deviation of the whole dataset.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DegenerateFeature, LengthMismatch, UnknownCluster


def _labels_of(a):
    return np.asarray(getattr(a, "labels", a))


@dataclass
class CentroidReport:
    feature_names: tuple
    clusters: list
    sizes: list
    centroids: np.ndarray  # (C, p)
    scores: np.ndarray  # (C, p)

    def _row(self, c):
        try:
            return self.clusters.index(c)
        except ValueError:
            raise UnknownCluster(f"cluster {c} not in report") from None

    def score(self, c, feature) -> float:
        j = self.feature_names.index(feature) if isinstance(feature, str) else feature
        return float(self.scores[self._row(c), j])

    def to_dict(self, k: int = 10) -> dict:
        out = []
        for c, size in zip(self.clusters, self.sizes):
            r = self._row(c)
            out.append({
                "cluster": c,
                "size": size,
                "scores": [{"feature": f, "D": float(s)} for f, s in zip(self.feature_names, self.scores[r])],
                "top_k": top_k_by_difference(self, c, k),
            })
        return {"k": k, "clusters": out}

    def to_json(self, k: int = 10) -> str:
        return json.dumps(self.to_dict(k), indent=2) + "\n"


def centroid(d: Dataset, a, c: int) -> np.ndarray:
    """Feature means of cluster ``c`` (intercept excluded)."""
    labels = _labels_of(a)
    if labels.shape != (d.n,):
        raise LengthMismatch(f"{labels.size} labels for {d.n} rows")
    rows = labels == c
    if not rows.any():
        raise UnknownCluster(f"cluster {c} has no rows")
    return d.features[rows].mean(axis=0)


def difference_scores(d: Dataset, a) -> CentroidReport:
    labels = _labels_of(a)
    if labels.shape != (d.n,):
        raise LengthMismatch(f"{labels.size} labels for {d.n} rows")
    F = d.features
    mean, std = F.mean(axis=0), F.std(axis=0)
    flat = [d.feature_names[j] for j in np.flatnonzero(std == 0)]
    if flat:
        raise DegenerateFeature(f"constant feature(s): {', '.join(flat)}")
    clusters = sorted(int(c) for c in np.unique(labels))
    cents = np.array([centroid(d, labels, c) for c in clusters]).reshape(len(clusters), d.p)
    return CentroidReport(
        feature_names=d.feature_names,
        clusters=clusters,
        sizes=[int(np.count_nonzero(labels == c)) for c in clusters],
        centroids=cents,
        scores=np.abs(cents - mean) / std,
    )


def top_k_by_difference(r: CentroidReport, c: int, k: int) -> list:
    """Feature names by descending score; ties keep column order."""
    row = r.scores[r._row(c)]
    order = sorted(range(len(row)), key=lambda j: (-row[j], j))
    return [r.feature_names[j] for j in order[:max(k, 0)]]


def overlap(sfit_top, centroid_top) -> int:
    return len(set(sfit_top) & set(centroid_top))


def format_centroid_table(report: dict, bold=None) -> str:
    """One ranked listing per cluster; names in ``bold[cluster]`` get a ``*``."""
    bold = bold or {}
    lines = []
    for cl in report["clusters"]:
        D = {s["feature"]: s["D"] for s in cl["scores"]}
        names = cl["top_k"]
        marks = set(bold.get(cl["cluster"], ()))
        shown = [(f + " *" if f in marks else f) for f in names]
        w = max([len("Variable")] + [len(s) for s in shown])
        lines.append(f"Cluster {cl['cluster']}  (n={cl['size']})")
        lines.append(f"  {'Variable':<{w}}  {'Score of difference':>19}")
        for s, f in zip(shown, names):
            lines.append(f"  {s:<{w}}  {D[f]:>19.6f}")
    return "\n".join(lines) + "\n"
