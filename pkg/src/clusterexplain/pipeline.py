"""Cluster, label, classify and explain: the whole method in one call.

Stages run in a fixed order and any failure is re-raised as a
``PipelineError`` naming the stage. Every random choice derives from the
config's seed, and no report carries a timestamp, so re-running a config
rewrites byte-identical files.
"""
from __future__ import annotations

import contextlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional


from .centroid import difference_scores, format_centroid_table, overlap, top_k_by_difference
from .clustering import (ClusterAssignment, adjusted_rand_index, agglomerative_ward, drop_small_clusters, kmeans,
                         save_assignment)
from .data import Dataset, SplitSpec, add_intercept, load_csv, split, standardize
from .errors import ConfigError, MissingFile, PipelineError, TooFewSamples
from .fcps import GenSpec, generate
from .mlp import MlpConfig, accuracy, save_model, train
from .sfit import SfitParams, format_sfit_table, rank_features, sfit, sfit_per_cluster

log = logging.getLogger(__name__)

ALGORITHMS = ("kmeans", "ward", "given")


@contextlib.contextmanager
def stage(name):
    """Tag any exception raised in the block with the stage name."""
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc


@dataclass(frozen=True)
class InputSource:
    csv: Optional[str] = None
    label_column: Optional[str] = None
    has_header: bool = True
    generate: Optional[GenSpec] = None

    def __post_init__(self):
        if (self.csv is None) == (self.generate is None):
            raise ConfigError("input needs exactly one of 'csv' or 'generate'")


@dataclass(frozen=True)
class ClusteringConfig:
    algorithm: str = "kmeans"
    k: Optional[int] = None
    min_cluster_size: int = 1
    n_init: int = 10
    seed: Optional[int] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"clustering algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.algorithm != "given" and (self.k is None or int(self.k) < 1):
            raise ConfigError(f"{self.algorithm} needs a positive k")
        if int(self.min_cluster_size) < 1 or int(self.n_init) < 1:
            raise ConfigError("min_cluster_size and n_init must be >= 1")


@dataclass(frozen=True)
class PipelineConfig:
    input: InputSource
    clustering: ClusteringConfig
    split: SplitSpec
    mlp: MlpConfig
    sfit: SfitParams
    seed: int
    output_dir: str = "out"
    top_k: int = 5
    # Centroid rankings default to twice the SFIT length.
    centroid_top_k: Optional[int] = None
    # "inference" (held-out split) or "all" rows.
    sfit_on: str = "inference"
    min_sfit_rows: int = 20

    def __post_init__(self):
        if self.sfit_on not in ("inference", "all"):
            raise ConfigError("sfit_on must be 'inference' or 'all'")
        if int(self.top_k) < 1:
            raise ConfigError("top_k must be >= 1")
        if self.centroid_top_k is None:
            object.__setattr__(self, "centroid_top_k", 2 * int(self.top_k))
        if len(self.split.fractions) not in (2, 3):
            raise ConfigError("split needs 2 (train, inference) or 3 (train, validation, inference) fractions")

    def to_dict(self) -> dict:
        """Every setting except ``output_dir``, so relocated runs compare equal."""
        src = self.input
        inp = {"csv": src.csv, "label_column": src.label_column, "has_header": src.has_header}
        if src.generate is not None:
            g = src.generate
            inp = {"generate": {"shape": g.shape.value, "n": int(g.n), "seed": int(g.seed), "noise": g.noise}}
        return {
            "seed": self.seed,
            "input": inp,
            "clustering": asdict(self.clustering),
            "split": {"fractions": list(self.split.fractions), "seed": self.split.seed},
            "mlp": dict(asdict(self.mlp), hidden_sizes=list(self.mlp.hidden_sizes)),
            "sfit": asdict(self.sfit),
            "sfit_on": self.sfit_on,
            "top_k": self.top_k,
            "centroid_top_k": self.centroid_top_k,
            "min_sfit_rows": self.min_sfit_rows,
        }


def _build(cls, raw, what, **defaults):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"'{what}' must be an object")
    known = set(cls.__dataclass_fields__)
    extra = sorted(set(raw) - known)
    if extra:
        raise ConfigError(f"unknown key(s) in '{what}': {', '.join(extra)}")
    kwargs = dict(defaults)
    kwargs.update(raw)
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid '{what}': {exc}") from None


def config_from_dict(raw: dict, base_dir=None) -> PipelineConfig:
    """Validate a JSON-style dict; relative paths resolve against ``base_dir``."""
    top = {"seed", "input", "clustering", "split", "mlp", "sfit", "output_dir", "top_k", "centroid_top_k",
           "sfit_on", "min_sfit_rows"}
    extra = sorted(set(raw) - top)
    if extra:
        raise ConfigError(f"unknown config key(s): {', '.join(extra)}")
    if "seed" not in raw:
        raise ConfigError("config must set 'seed'")
    seed = raw["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("'seed' must be a non-negative integer")

    def resolve(p):
        if p is None or base_dir is None or Path(p).is_absolute():
            return p
        return str(Path(base_dir) / p)

    with stage("input"):
        inp = dict(raw.get("input") or {})
        if "generate" in inp:
            inp["generate"] = _build(GenSpec, inp["generate"], "input.generate", seed=seed)
        if "csv" in inp:
            inp["csv"] = resolve(inp["csv"])
        source = _build(InputSource, inp, "input")
    with stage("cluster"):
        clustering = _build(ClusteringConfig, raw.get("clustering"), "clustering", seed=seed)
    with stage("split"):
        spl = dict(raw.get("split") or {})
        if "fractions" in spl:
            spl["fractions"] = tuple(spl["fractions"])
        split_spec = _build(SplitSpec, spl, "split", fractions=(0.7, 0.15, 0.15), seed=seed)
    with stage("train"):
        mlp = _build(MlpConfig, raw.get("mlp"), "mlp", seed=seed)
    with stage("sfit"):
        params = _build(SfitParams, raw.get("sfit"), "sfit")
    rest = {k: raw[k] for k in ("top_k", "centroid_top_k", "sfit_on", "min_sfit_rows") if k in raw}
    with stage("config"):
        try:
            return PipelineConfig(input=source, clustering=clustering, split=split_spec, mlp=mlp, sfit=params,
                                  seed=seed, output_dir=resolve(raw.get("output_dir", "out")), **rest)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"config file {path} not found")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(raw, base_dir=path.parent)


@dataclass
class PipelineReport:
    output_dir: Path
    summary: dict
    assignment: ClusterAssignment
    model: object
    sfit_reports: dict = field(default_factory=dict)
    sfit_all: object = None
    centroid: object = None


def _load_input(src: InputSource) -> Dataset:
    if src.generate is not None:
        return generate(src.generate)
    if not Path(src.csv).exists():
        raise MissingFile(f"input file {src.csv} not found")
    return load_csv(src.csv, has_header=src.has_header, label_column=src.label_column)


def _cluster(d: Dataset, cc: ClusteringConfig) -> ClusterAssignment:
    if cc.algorithm == "kmeans":
        return kmeans(d, cc.k, seed=cc.seed, n_init=cc.n_init)
    if cc.algorithm == "ward":
        return agglomerative_ward(d, cc.k)
    if d.labels is None:
        raise ConfigError("clustering 'given' needs labels in the input")
    return ClusterAssignment(d.labels, "given", {})


def _sfit_digest(report, k) -> dict:
    top = rank_features(report, k)
    out = {
        "n_total": report.n_total,
        "significant": [report.names(f)[0] for f in report.significant(1)],
        "top_k": [report.names(e.features)[0] for e in top],
    }
    for order in sorted(report.entries):
        if order > 1:
            out[f"order_{order}_significant"] = [report.names(f) for f in report.significant(order)]
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def run_pipeline(cfg: PipelineConfig) -> PipelineReport:
    out = Path(cfg.output_dir)
    with stage("load"):
        raw = _load_input(cfg.input)
        truth = raw.labels
    with stage("standardize"):
        z, scaling = standardize(raw)
    with stage("cluster"):
        assignment = _cluster(z, cfg.clustering)
        ari = adjusted_rand_index(truth, assignment) if truth is not None and cfg.clustering.algorithm != "given" else None
        log.info("clustered %d rows into %d clusters", z.n, assignment.k)
    with stage("drop_small_clusters"):
        sizes_before = assignment.sizes
        kept, zl = drop_small_clusters(assignment, z, cfg.clustering.min_cluster_size)
    with stage("split"):
        parts = split(add_intercept(zl), cfg.split)
        train_d, val_d, inf_d = parts if len(parts) == 3 else (parts[0], None, parts[1])
    with stage("train"):
        model = train(train_d, val_d, cfg.mlp)
        model.scaling = scaling
        model.feature_names = tuple(z.feature_names)
    with stage("evaluate"):
        acc_inf = accuracy(model, inf_d)
        acc_train = accuracy(model, train_d)
        log.info("accuracy: train %.4f, inference %.4f", acc_train, acc_inf)

    with stage("sfit"):
        target = inf_d if cfg.sfit_on == "inference" else add_intercept(zl)
        fp = model.fingerprint()
        all_report = sfit(model, target, cfg.sfit)
        all_report.model = fp
        per_cluster, skipped = {}, []
        for c in range(1, kept.k + 1):
            try:
                r = sfit_per_cluster(model, target, c, cfg.sfit, min_rows=cfg.min_sfit_rows)
            except (TooFewSamples, KeyError) as exc:
                skipped.append({"cluster": c, "reason": str(exc)})
                continue
            r.model = fp
            per_cluster[c] = r

    with stage("centroid"):
        cent = difference_scores(zl, kept)

    with stage("overlap"):
        comparisons = []
        for c, r in per_cluster.items():
            s_top = [r.names(e.features)[0] for e in rank_features(r, cfg.top_k)]
            c_top = top_k_by_difference(cent, c, cfg.centroid_top_k)
            comparisons.append({"cluster": c, "sfit_top": s_top, "centroid_top": c_top,
                                "overlap": overlap(s_top, c_top)})

    summary = {
        "config": cfg.to_dict(),
        "n_rows": raw.n,
        "feature_names": list(raw.feature_names),
        "clustering": {
            "algorithm": assignment.algorithm,
            "k": assignment.k,
            "sizes": sizes_before,
            "dropped": kept.params.get("dropped", []),
            "kept_sizes": kept.sizes,
            "ari": ari,
        },
        "split": {"train": train_d.n, "validation": 0 if val_d is None else val_d.n, "inference": inf_d.n},
        "model": {
            "fingerprint": fp,
            "layer_sizes": model.layer_sizes,
            "best_epoch": model.best_epoch,
            "epochs_run": len(model.train_loss),
            "accuracy_train": acc_train,
            "accuracy_inference": acc_inf,
        },
        "sfit": {
            "rows": cfg.sfit_on,
            "all": _sfit_digest(all_report, cfg.top_k),
            "clusters": [dict(cluster=c, **_sfit_digest(r, cfg.top_k)) for c, r in per_cluster.items()],
            "skipped": skipped,
        },
        "comparison": comparisons,
    }

    with stage("write"):
        out.mkdir(parents=True, exist_ok=True)
        save_assignment(kept, out / "labels.csv")
        save_model(model, out / "model.json")
        for stale in out.glob("sfit_cluster_*.json"):
            stale.unlink()
        (out / "sfit_all.json").write_text(all_report.to_json(), encoding="utf-8")
        for c, r in per_cluster.items():
            (out / f"sfit_cluster_{c}.json").write_text(r.to_json(), encoding="utf-8")
        (out / "centroid.json").write_text(cent.to_json(cfg.centroid_top_k), encoding="utf-8")
        _write_json(out / "summary.json", summary)

    return PipelineReport(out, summary, kept, model, per_cluster, all_report, cent)


def _read_json(path: Path):
    if not path.exists():
        raise MissingFile(f"{path} not found")
    return json.loads(path.read_text(encoding="utf-8"))


def render_report(directory) -> str:
    """Plain-text tables for every report JSON in a pipeline output directory."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingFile(f"report directory {directory} not found")
    summary = _read_json(directory / "summary.json")
    centroid = _read_json(directory / "centroid.json")
    k = summary["config"]["top_k"]
    parts = []
    cl = summary["clustering"]
    m = summary["model"]
    head = [f"{summary['n_rows']} rows, {len(summary['feature_names'])} features; "
            f"{cl['algorithm']} clustering into {cl['k']} clusters, sizes {cl['sizes']}"]
    if cl["dropped"]:
        head.append(f"dropped small clusters {cl['dropped']}")
    if cl["ari"] is not None:
        head.append(f"adjusted Rand index vs given labels: {cl['ari']:.4f}")
    head.append(f"classifier accuracy: train {m['accuracy_train']:.4f}, inference {m['accuracy_inference']:.4f}")
    parts.append("\n".join(head) + "\n")

    all_path = directory / "sfit_all.json"
    if all_path.exists():
        parts.append(format_sfit_table(_read_json(all_path), k))
    bold = {}
    for item in summary["sfit"]["clusters"]:
        c = item["cluster"]
        parts.append(format_sfit_table(_read_json(directory / f"sfit_cluster_{c}.json"), k))
        bold[c] = item["top_k"]
    for item in summary["sfit"]["skipped"]:
        parts.append(f"Cluster {item['cluster']}: skipped ({item['reason']})\n")
    parts.append("Centroid difference scores (* = also in the SFIT top list)\n"
                 + format_centroid_table(centroid, bold))
    if summary["comparison"]:
        lines = ["Overlap of SFIT top-%d and centroid top-%d" % (k, summary["config"]["centroid_top_k"])]
        for item in summary["comparison"]:
            lines.append(f"  cluster {item['cluster']}: {item['overlap']} of {len(item['sfit_top'])}")
        parts.append("\n".join(lines) + "\n")
    return "\n".join(parts)
