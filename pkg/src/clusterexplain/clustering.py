"""K-means, Ward agglomerative clustering and partition agreement."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import AllClustersDropped, InvalidK, LengthMismatch, MissingFile, ParseError


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    algorithm: str = "given"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64, copy=True)
        labels.flags.writeable = False
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if labels.size:
            if labels.min() < 1:
                raise ValueError("labels must be in 1..C")
            present = np.unique(labels)
            if present.size != labels.max():
                raise ValueError(f"clusters must be numbered 1..C without gaps, got {present.tolist()}")
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def k(self) -> int:
        return int(self.labels.max()) if self.labels.size else 0

    @property
    def sizes(self) -> list:
        return np.bincount(self.labels, minlength=self.k + 1)[1:].tolist()

    def sidecar(self) -> dict:
        return {"algorithm": self.algorithm, "params": self.params, "sizes": self.sizes}


def relabel_by_appearance(raw) -> np.ndarray:
    """Map arbitrary cluster ids to 1..C in order of first occurrence."""
    raw = np.asarray(raw)
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first)] = np.arange(1, first.size + 1)
    return rank[inverse.ravel()]


def _check_k(k, n):
    if not 1 <= int(k) <= n:
        raise InvalidK(f"k must be between 1 and n={n}, got {k}")


def _sq_dists(X, C):
    d = (X * X).sum(1)[:, None] - 2 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _kmeans_pp(X, k, rng):
    n = len(X)
    centres = [X[rng.integers(n)]]
    d2 = _sq_dists(X, np.array(centres))[:, 0]
    for _ in range(1, k):
        total = d2.sum()
        if total == 0:
            idx = rng.integers(n)
        else:
            idx = min(int(np.searchsorted(np.cumsum(d2), rng.uniform() * total, side="right")), n - 1)
        centres.append(X[idx])
        d2 = np.minimum(d2, _sq_dists(X, X[idx][None, :])[:, 0])
    return np.array(centres)


def _lloyd(X, centres, max_iter, tol):
    inertia_log = []
    for _ in range(max_iter):
        d2 = _sq_dists(X, centres)
        assign = d2.argmin(axis=1)
        inertia_log.append(float(d2[np.arange(len(X)), assign].sum()))
        new = centres.copy()
        for c in range(len(centres)):
            members = X[assign == c]
            if len(members):
                new[c] = members.mean(axis=0)
        shift = np.sqrt(((new - centres) ** 2).sum(axis=1)).max()
        centres = new
        if shift < tol:
            break
    d2 = _sq_dists(X, centres)
    assign = d2.argmin(axis=1)
    inertia = float(d2[np.arange(len(X)), assign].sum())
    inertia_log.append(inertia)
    return assign, centres, inertia, inertia_log


def kmeans(d: Dataset, k: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-8, n_init: int = 1):
    """Lloyd's algorithm from k-means++ starts; the lowest-inertia run wins.

    The returned assignment's ``params`` record the final inertia and the
    per-iteration inertia trace of the winning run.
    """
    X = d.features
    _check_k(k, d.n)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, int(n_init))):
        centres = _kmeans_pp(X, int(k), rng)
        run = _lloyd(X, centres, max_iter, tol)
        if best is None or run[2] < best[2]:
            best = run
    assign, _, inertia, log = best
    params = {"k": int(k), "seed": int(seed), "max_iter": int(max_iter), "tol": tol,
              "n_init": int(n_init), "inertia": inertia, "inertia_trace": log}
    return ClusterAssignment(relabel_by_appearance(assign), "kmeans", params)


def ward_merges(X):
    """Full Ward merge sequence via Lance-Williams updates.

    Returns a list of ``(slot_i, slot_j, cost)`` where ``cost`` is the increase
    in within-cluster sum of squares; the merged cluster keeps slot ``i``.
    """
    n = len(X)
    D = 0.5 * _sq_dists(X, X)
    np.fill_diagonal(D, np.inf)
    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    merges = []
    for _ in range(n - 1):
        # D is symmetric, so the first row-major minimum has i < j and is
        # the lexicographically smallest tied pair.
        i, j = divmod(int(np.argmin(D)), n)
        cost = D[i, j]
        merges.append((i, j, float(cost)))
        ni, nj = size[i], size[j]
        nk = size[active]
        Di, Dj = D[i, active], D[j, active]
        D[i, active] = ((ni + nk) * Di + (nj + nk) * Dj - nk * cost) / (ni + nj + nk)
        D[active, i] = D[i, active]
        D[i, i] = np.inf
        D[j, :] = np.inf
        D[:, j] = np.inf
        size[i] = ni + nj
        active[j] = False
    return merges


def agglomerative_ward(d: Dataset, k: int) -> ClusterAssignment:
    """Bottom-up Ward clustering, stopped when ``k`` clusters remain.

    Naive O(n^3); fine for a few thousand rows.
    """
    X = d.features
    _check_k(k, d.n)
    parent = np.arange(d.n)
    costs = []
    for i, j, cost in ward_merges(X)[: d.n - int(k)]:
        parent[parent == j] = i
        costs.append(cost)
    return ClusterAssignment(relabel_by_appearance(parent), "ward", {"k": int(k), "merge_costs": costs})


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected pair-counting agreement of two partitions."""
    la = a.labels if isinstance(a, ClusterAssignment) else np.asarray(a)
    lb = b.labels if isinstance(b, ClusterAssignment) else np.asarray(b)
    if la.shape != lb.shape:
        raise LengthMismatch(f"partitions of {la.size} and {lb.size} rows")
    n = la.size
    _, ia = np.unique(la, return_inverse=True)
    _, ib = np.unique(lb, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)

    def pairs(x):
        x = np.asarray(x, dtype=np.float64)
        return float((x * (x - 1) / 2).sum())

    index = pairs(table)
    rows, cols = pairs(table.sum(1)), pairs(table.sum(0))
    total = n * (n - 1) / 2
    expected = rows * cols / total if total else 0.0
    best = (rows + cols) / 2
    if best == expected:
        # Both partitions trivial (all-one or all-singletons) in the same way.
        return 1.0
    return (index - expected) / (best - expected)


def drop_small_clusters(a: ClusterAssignment, d: Dataset, min_size: int):
    """Remove clusters smaller than ``min_size`` and renumber the rest 1..C'."""
    if min_size < 1:
        raise ValueError("min_size must be >= 1")
    sizes = np.bincount(a.labels, minlength=a.k + 1)
    keep_ids = [c for c in range(1, a.k + 1) if sizes[c] >= min_size]
    if not keep_ids:
        raise AllClustersDropped(f"every cluster has fewer than {min_size} rows")
    rows = np.flatnonzero(np.isin(a.labels, keep_ids))
    remap = np.zeros(a.k + 1, dtype=np.int64)
    remap[keep_ids] = np.arange(1, len(keep_ids) + 1)
    labels = remap[a.labels[rows]]
    params = dict(a.params, min_cluster_size=int(min_size),
                  dropped=[c for c in range(1, a.k + 1) if c not in keep_ids])
    return ClusterAssignment(labels, a.algorithm, params), d.subset(rows).with_labels(labels)


def save_assignment(a: ClusterAssignment, path) -> None:
    """Write a one-column ``label`` CSV plus a ``<path>.json`` sidecar."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label"])
        w.writerows([[int(v)] for v in a.labels])
    Path(str(path) + ".json").write_text(json.dumps(a.sidecar(), indent=2) + "\n", encoding="utf-8")


def load_assignment(path) -> ClusterAssignment:
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"labels file {path} not found")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ParseError(f"{path} is empty")
    body = rows[1:] if rows[0][0].strip().lower() == "label" else rows
    try:
        labels = [int(r[0]) for r in body]
    except ValueError as exc:
        raise ParseError(f"bad label in {path}: {exc}") from None
    side = Path(str(path) + ".json")
    meta = json.loads(side.read_text(encoding="utf-8")) if side.exists() else {}
    return ClusterAssignment(labels, meta.get("algorithm", "given"), meta.get("params", {}))
