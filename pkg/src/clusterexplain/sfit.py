"""Single Feature Introduction Test on a trained classifier.

Feature sets are tuples of column indices into an intercept-augmented input:
column 0 is the intercept and feature ``k`` (``Xk``) is column ``k``. Masking
keeps the intercept and the columns of the set and zeroes the rest, so inputs
must be standardized for zero to mean "at the feature average".
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from statistics import NormalDist
from typing import Optional

import numpy as np

from .data import Dataset
from .errors import DimensionMismatch, InvalidCounts, LabelMissing, SContainsIntercept, TooFewSamples, UnknownCluster
from .mlp import MlpModel, losses

MIN_CLUSTER_ROWS = 20


@dataclass(frozen=True)
class SfitParams:
    alpha: float = 0.05
    beta: float = 0.05
    max_order: int = 1
    # Also test pairs of two non-significant features when p <= 10.
    all_pairs: bool = True

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        if not 0 <= self.beta < 1:
            raise ValueError("beta must be in [0, 1)")
        if self.max_order not in (1, 2, 3):
            raise ValueError("max_order must be 1, 2 or 3")


@dataclass
class SfitEntry:
    features: tuple
    median: float
    ci_lower: float
    ci_upper: float
    p_value: float
    significant: bool
    n_positive: int
    n_total: int
    # Higher orders only: the sub-model the set was tested against.
    baseline: Optional[tuple] = None

    @property
    def order(self) -> int:
        return len(self.features)


@dataclass
class SfitReport:
    feature_names: tuple
    params: SfitParams
    entries: dict = field(default_factory=dict)
    cluster: Optional[int] = None
    model: str = ""
    n_total: int = 0

    def order(self, k: int) -> list:
        return self.entries.get(k, [])

    def all_entries(self) -> list:
        return [e for k in sorted(self.entries) for e in self.entries[k]]

    def significant(self, k: int = 1) -> list:
        return [e.features for e in self.order(k) if e.significant]

    def entry(self, features) -> SfitEntry:
        key = tuple(sorted(features))
        for e in self.entries.get(len(key), []):
            if e.features == key:
                return e
        raise KeyError(key)

    def names(self, features) -> list:
        return [self.feature_names[j - 1] for j in features]

    def to_dict(self) -> dict:
        out = []
        for e in self.all_entries():
            item = {
                "features": self.names(e.features),
                "order": e.order,
                "median": e.median,
                "ci": [e.ci_lower, e.ci_upper],
                "p_value": e.p_value,
                "n_positive": e.n_positive,
                "n_total": e.n_total,
                "significant": e.significant,
            }
            if e.baseline is not None:
                item["baseline"] = self.names(e.baseline)
            out.append(item)
        return {
            "params": asdict(self.params),
            "cluster": self.cluster,
            "model": self.model,
            "n_total": self.n_total,
            "entries": out,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self, k: Optional[int] = None) -> str:
        return format_sfit_table(self.to_dict(), k)


def mask(x, S=()) -> np.ndarray:
    """Zero every coordinate except the intercept (column 0) and those in ``S``.

    Works on a single vector or row-wise on a matrix.
    """
    x = np.asarray(x, dtype=np.float64)
    width = x.shape[-1]
    S = sorted(int(j) for j in S)
    if any(j == 0 for j in S):
        raise SContainsIntercept("feature sets may not contain the intercept column")
    if any(j < 0 or j >= width for j in S):
        raise DimensionMismatch(f"feature index out of range for width {width}")
    out = np.zeros_like(x)
    keep = [0, *S]
    out[..., keep] = x[..., keep]
    return out


def _masked_losses(m: MlpModel, X, y, S) -> np.ndarray:
    return losses(m, mask(X, S), y)


def deltas(m: MlpModel, X, y, S, beta: float) -> np.ndarray:
    """Row-wise ``(1 - beta) * loss(intercept only) - loss(intercept + S)``."""
    if not S:
        raise ValueError("feature set must be nonempty")
    X = np.atleast_2d(X)
    return (1.0 - beta) * _masked_losses(m, X, y, ()) - _masked_losses(m, X, y, S)


def delta(m: MlpModel, x, y: int, S, beta: float) -> float:
    return float(deltas(m, x, [y], S, beta)[0])


def binom_test_greater(n_pos: int, n: int) -> float:
    """Exact P(X >= n_pos) for X ~ Binomial(n, 1/2).

    Computed with integer arithmetic, so the only rounding is the final
    (correctly rounded) division.
    """
    n_pos, n = int(n_pos), int(n)
    if n < 1 or not 0 <= n_pos <= n:
        raise InvalidCounts(f"need 0 <= n_pos <= n and n >= 1, got ({n_pos}, {n})")
    if n_pos == 0:
        return 1.0
    tail = 0
    c = math.comb(n, n_pos)
    for k in range(n_pos, n + 1):
        tail += c
        c = c * (n - k) // (k + 1)
    return tail / (1 << n)


def normal_quantile(prob: float) -> float:
    # stdlib uses Wichura's AS241, accurate to about 1e-16.
    return NormalDist().inv_cdf(prob)


def ci_indices(n: int, alpha: float):
    """1-based order-statistic indices bracketing the median, clamped to [1, n]."""
    half = normal_quantile(1 - alpha / 2) * math.sqrt(n) / 2
    lo = math.floor((n + 1) / 2 - half)
    hi = math.ceil((n + 1) / 2 + half)
    return max(lo, 1), min(hi, n)


def median_ci(values, alpha: float):
    """Distribution-free confidence interval for the median.

    Returns ``(lower, upper, lo_index, hi_index)`` with 1-based indices into
    the ascending order statistics.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = len(v)
    if n < 2:
        raise TooFewSamples(f"need at least 2 values for a median interval, got {n}")
    lo, hi = ci_indices(n, alpha)
    return float(v[lo - 1]), float(v[hi - 1]), lo, hi


def lower_median(values) -> float:
    v = np.sort(np.asarray(values, dtype=np.float64))
    return float(v[(len(v) - 1) // 2])


def _sign_test(values, alpha):
    n_pos = int(np.count_nonzero(values > 0))
    p = binom_test_greater(n_pos, len(values))
    return n_pos, p, p < alpha


def _check_inputs(m: MlpModel, d2: Dataset):
    if d2.labels is None:
        raise LabelMissing("inference set has no labels")
    if not d2.has_intercept:
        raise DimensionMismatch("inference set needs an intercept column")
    if d2.X.shape[1] != m.input_width:
        raise DimensionMismatch(f"inference width {d2.X.shape[1]}, model expects {m.input_width}")
    if d2.n < 2:
        raise TooFewSamples(f"need at least 2 inference rows, got {d2.n}")


def _first_order_entries(m, X, y, p, params):
    base = _masked_losses(m, X, y, ())
    entries = []
    for j in range(1, p + 1):
        dj = (1.0 - params.beta) * base - _masked_losses(m, X, y, (j,))
        n_pos, pval, sig = _sign_test(dj, params.alpha)
        lo, hi, _, _ = median_ci(dj, params.alpha)
        entries.append(SfitEntry((j,), lower_median(dj), lo, hi, pval, sig, n_pos, len(dj)))
    return entries


def _new_report(m, d2, params, cluster=None):
    return SfitReport(
        feature_names=d2.feature_names,
        params=params,
        cluster=cluster,
        model=m.fingerprint(),
        n_total=d2.n,
    )


def sfit_first_order(m: MlpModel, d2: Dataset, params: SfitParams = SfitParams()) -> SfitReport:
    """Test every feature on its own against the intercept-only input.

    A feature is significant when the one-sided sign test on its loss
    differences rejects at ``params.alpha``; ties (zero differences) count as
    failures. Medians are the lower-middle order statistic.
    """
    _check_inputs(m, d2)
    report = _new_report(m, d2, params)
    report.entries[1] = _first_order_entries(m, d2.X, d2.labels, d2.p, params)
    return report


def _candidates(order, previous, significant, p, params):
    cands = set()
    for S in previous:
        for j in significant:
            if j not in S:
                cands.add(tuple(sorted((*S, j))))
    if order == 2 and params.all_pairs and p <= 10:
        cands.update(itertools.combinations(range(1, p + 1), 2))
    return sorted(cands)


def sfit_higher_order(m: MlpModel, d2: Dataset, params: SfitParams = SfitParams(max_order=2)) -> SfitReport:
    """First-order SFIT followed by hierarchical interaction tests.

    Order-k candidates extend each tested order-(k-1) set by one significant
    single feature. A set's importance is its median gain over the
    intercept-only input (same scale as single features); its significance
    is a sign test of its gain over the best strict sub-model, the size k-1
    subset with the lowest median loss.
    """
    _check_inputs(m, d2)
    X, y, p = d2.X, d2.labels, d2.p
    report = _new_report(m, d2, params)
    report.entries[1] = _first_order_entries(m, X, y, p, params)
    significant = [e.features[0] for e in report.entries[1] if e.significant]

    base = _masked_losses(m, X, y, ())
    cache = {}

    def masked(S):
        if S not in cache:
            cache[S] = _masked_losses(m, X, y, S)
        return cache[S]

    previous = [e.features for e in report.entries[1]]
    for order in range(2, params.max_order + 1):
        entries = []
        for S in _candidates(order, previous, significant, p, params):
            gain = (1.0 - params.beta) * base - masked(S)
            subs = list(itertools.combinations(S, order - 1))
            best = min(subs, key=lambda T: (lower_median(masked(T)), T))
            extra = masked(best) - masked(S) - params.beta * base
            n_pos, pval, sig = _sign_test(extra, params.alpha)
            lo, hi, _, _ = median_ci(gain, params.alpha)
            entries.append(SfitEntry(S, lower_median(gain), lo, hi, pval, sig, n_pos, len(gain), best))
        report.entries[order] = entries
        previous = [e.features for e in entries]
        if not previous:
            break
    return report


def sfit(m: MlpModel, d2: Dataset, params: SfitParams = SfitParams()) -> SfitReport:
    if params.max_order == 1:
        return sfit_first_order(m, d2, params)
    return sfit_higher_order(m, d2, params)


def sfit_per_cluster(m: MlpModel, d2: Dataset, cluster: int, params: SfitParams = SfitParams(),
                     min_rows: int = MIN_CLUSTER_ROWS) -> SfitReport:
    """Run SFIT on the rows of one cluster only, keeping the multi-class loss."""
    if d2.labels is None:
        raise LabelMissing("inference set has no labels")
    rows = np.flatnonzero(d2.labels == cluster)
    if rows.size == 0:
        raise UnknownCluster(f"cluster {cluster} not present in inference labels")
    if rows.size < min_rows:
        raise TooFewSamples(f"cluster {cluster} has {rows.size} inference rows, need {min_rows}")
    report = sfit(m, d2.subset(rows), params)
    report.cluster = int(cluster)
    return report


def rank_features(r: SfitReport, k: int, order: int = 1) -> list:
    """Significant entries of one order, by descending median then index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    sig = [e for e in r.order(order) if e.significant]
    return sorted(sig, key=lambda e: (-e.median, e.features))[:k]


def format_sfit_table(report: dict, k: Optional[int] = None) -> str:
    """Plain-text table of significant entries, as ``report`` JSON objects hold them."""
    title = "All data" if report.get("cluster") is None else f"Cluster {report['cluster']}"
    lines = [f"{title}  (alpha={report['params']['alpha']}, beta={report['params']['beta']}, n={report['n_total']})"]
    orders = sorted({e["order"] for e in report["entries"]}) or [1]
    for order in orders:
        sig = [e for e in report["entries"] if e["order"] == order and e["significant"]]
        sig.sort(key=lambda e: -e["median"])
        if k is not None:
            sig = sig[:k]
        label = "Variable" if order == 1 else "Interaction"
        if not sig:
            lines.append("  no significant features" if order == 1 else f"  no significant order-{order} interactions")
            continue
        names = [", ".join(e["features"]) for e in sig]
        w = max(len(label), *(len(s) for s in names))
        lines.append(f"  {label:<{w}}  {'Median':>10}  {'CI lower':>10}  {'CI upper':>10}")
        for s, e in zip(names, sig):
            lines.append(f"  {s:<{w}}  {e['median']:>10.4g}  {e['ci'][0]:>10.4g}  {e['ci'][1]:>10.4g}")
    return "\n".join(lines) + "\n"
