"""Tabular data model, CSV ingestion, preprocessing and seeded splitting."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateFeature,
    InterceptAlreadyPresent,
    InvalidFractions,
    LengthMismatch,
    MissingColumn,
    ParseError,
)


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus names and optional 1-based cluster labels.

    When ``has_intercept`` is true, column 0 of ``X`` is the constant-one
    intercept and feature ``k`` (1-based, as in ``X1, X2, ...``) lives in
    column ``k``. Without an intercept, feature ``k`` is column ``k - 1``.
    """

    X: np.ndarray
    feature_names: tuple
    labels: Optional[np.ndarray] = None
    standardized: bool = False
    has_intercept: bool = False

    def __post_init__(self):
        X = _frozen(self.X, np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "feature_names", tuple(str(f) for f in self.feature_names))
        if X.shape[1] != self.p + int(self.has_intercept):
            raise LengthMismatch(
                f"matrix width {X.shape[1]} does not match {self.p} feature names"
                + (" plus intercept" if self.has_intercept else "")
            )
        if not np.all(np.isfinite(X)):
            raise ParseError("non-finite value in feature matrix")
        if self.has_intercept and X.shape[0] and not np.all(X[:, 0] == 1.0):
            raise ValueError("intercept column must be identically 1")
        if self.labels is not None:
            labels = _frozen(self.labels, np.int64)
            if labels.shape != (X.shape[0],):
                raise LengthMismatch(f"{labels.shape[0]} labels for {X.shape[0]} rows")
            if labels.size and labels.min() < 1:
                raise ValueError("labels must be in 1..C")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return len(self.feature_names)

    @property
    def features(self) -> np.ndarray:
        """The feature columns without the intercept."""
        return self.X[:, 1:] if self.has_intercept else self.X

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) if self.labels is not None and self.labels.size else 0

    def column(self, name: str) -> int:
        """Index of feature ``name`` in ``X``."""
        try:
            k = self.feature_names.index(name)
        except ValueError:
            raise MissingColumn(f"no column named {name!r}") from None
        return k + int(self.has_intercept)

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        labels = None if self.labels is None else self.labels[rows]
        return replace(self, X=self.X[rows], labels=labels)

    def with_labels(self, labels) -> "Dataset":
        return replace(self, labels=labels)


@dataclass(frozen=True)
class ScalingParams:
    means: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "means", _frozen(self.means, np.float64))
        object.__setattr__(self, "scales", _frozen(self.scales, np.float64))

    def apply(self, d: Dataset) -> Dataset:
        """Scale ``d`` with these (already fitted) parameters."""
        Z = (d.features - self.means) / self.scales
        return _replace_features(d, Z, standardized=True)

    def invert(self, d: Dataset) -> Dataset:
        Z = d.features * self.scales + self.means
        return _replace_features(d, Z, standardized=False)

    def to_json(self) -> str:
        return json.dumps({"means": self.means.tolist(), "scales": self.scales.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "ScalingParams":
        obj = json.loads(text)
        return cls(obj["means"], obj["scales"])


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple
    seed: int = 0

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        object.__setattr__(self, "fractions", fr)
        if not fr or any(not (f > 0) for f in fr):
            raise InvalidFractions(f"fractions must be positive, got {fr}")
        if abs(math.fsum(fr) - 1.0) > 1e-12:
            raise InvalidFractions(f"fractions must sum to 1, got {math.fsum(fr)!r}")
        if int(self.seed) < 0:
            raise InvalidFractions("seed must be non-negative")


def _replace_features(d: Dataset, Z, **changes) -> Dataset:
    X = np.column_stack([np.ones(len(Z)), Z]) if d.has_intercept else Z
    return replace(d, X=X, **changes)


def _parse_float(cell, row, column):
    try:
        v = float(cell)
    except ValueError:
        raise ParseError(f"cannot parse {cell!r} as a number", row=row, column=column) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {cell!r}", row=row, column=column)
    return v


def load_csv(path, has_header: bool = True, label_column: Optional[str] = None) -> Dataset:
    """Read a comma-separated numeric table.

    Rows are numbered from 1 counting the header line, so error positions
    match what an editor shows.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path} is empty")
    if has_header:
        header = [h.strip() for h in rows[0]]
        body = rows[1:]
        first_line = 2
    else:
        header = [f"x{k + 1}" for k in range(len(rows[0]))]
        body = rows
        first_line = 1
    if not body:
        raise ParseError(f"{path} has no data rows")
    if label_column is not None and label_column not in header:
        raise MissingColumn(f"label column {label_column!r} not in {header}")

    label_idx = header.index(label_column) if label_column is not None else None
    names = [h for k, h in enumerate(header) if k != label_idx]
    X = np.empty((len(body), len(names)))
    labels = np.empty(len(body), dtype=np.int64) if label_idx is not None else None
    for i, row in enumerate(body):
        line = first_line + i
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} cells, found {len(row)}", row=line)
        col = 0
        for k, cell in enumerate(row):
            if k == label_idx:
                v = _parse_float(cell, line, header[k])
                if v != int(v) or v < 1:
                    raise ParseError(f"label {cell!r} is not an integer >= 1", row=line, column=header[k])
                labels[i] = int(v)
            else:
                X[i, col] = _parse_float(cell, line, header[k])
                col += 1
    return Dataset(X, names, labels=labels)


def save_csv(d: Dataset, path, label_column: str = "label") -> None:
    """Write features (never the intercept) and, if present, labels."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = list(d.feature_names)
        if d.labels is not None:
            header.append(label_column)
        w.writerow(header)
        for i, row in enumerate(d.features):
            cells = [repr(float(v)) for v in row]
            if d.labels is not None:
                cells.append(str(int(d.labels[i])))
            w.writerow(cells)


def standardize(d: Dataset):
    """Centre every feature and scale it to unit population variance."""
    if d.has_intercept:
        raise InterceptAlreadyPresent("standardize before adding the intercept")
    if d.n < 2:
        raise DegenerateFeature("need at least two rows to standardize")
    means = d.X.mean(axis=0)
    scales = d.X.std(axis=0)
    const = [d.feature_names[k] for k in np.flatnonzero(scales == 0)]
    if const:
        raise DegenerateFeature(f"constant feature(s): {', '.join(const)}")
    params = ScalingParams(means, scales)
    return params.apply(d), params


def one_hot_encode(d: Dataset, categorical_columns: Sequence[str]) -> Dataset:
    """Replace each named column by one 0/1 indicator per distinct value."""
    for name in categorical_columns:
        if name not in d.feature_names:
            raise MissingColumn(f"no column named {name!r}")
    cats = set(categorical_columns)
    F = d.features
    cols, names = [], []
    for k, name in enumerate(d.feature_names):
        if name not in cats:
            cols.append(F[:, k])
            names.append(name)
            continue
        for v in np.unique(F[:, k]):
            cols.append((F[:, k] == v).astype(np.float64))
            names.append(f"{name}_{v:g}")
    Z = np.column_stack(cols) if cols else np.empty((d.n, 0))
    return _replace_features(d, Z, feature_names=tuple(names))


def add_intercept(d: Dataset) -> Dataset:
    if d.has_intercept:
        raise InterceptAlreadyPresent("dataset already has an intercept column")
    X = np.column_stack([np.ones(d.n), d.X]) if d.p else np.ones((d.n, 1))
    return replace(d, X=X, has_intercept=True)


def split_sizes(n: int, fractions) -> list:
    """Largest-remainder apportionment of ``n`` rows; ties go to earlier parts."""
    quotas = [f * n for f in fractions]
    sizes = [int(math.floor(q)) for q in quotas]
    order = sorted(range(len(quotas)), key=lambda k: (-(quotas[k] - sizes[k]), k))
    for k in order[: n - sum(sizes)]:
        sizes[k] += 1
    return sizes


def split_indices(n: int, spec: SplitSpec) -> list:
    if n < len(spec.fractions):
        raise InvalidFractions(f"cannot split {n} rows into {len(spec.fractions)} parts")
    perm = np.random.default_rng(spec.seed).permutation(n)
    parts, start = [], 0
    for size in split_sizes(n, spec.fractions):
        parts.append(np.sort(perm[start:start + size]))
        start += size
    return parts


def split(d: Dataset, spec: SplitSpec) -> list:
    """Random disjoint partition of the rows, sized by ``spec.fractions``."""
    return [d.subset(idx) for idx in split_indices(d.n, spec)]
