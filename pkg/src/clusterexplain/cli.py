"""Command-line entry point.

Exit status: 0 on success, 2 for bad input or configuration, 1 for any
other failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .centroid import difference_scores, format_centroid_table
from .clustering import agglomerative_ward, kmeans, load_assignment, save_assignment
from .data import SplitSpec, add_intercept, load_csv, save_csv, split, standardize
from .errors import ClusterExplainError, ConfigError, LengthMismatch, MissingFile, PipelineError
from .fcps import FcpsShape, GenSpec, generate
from .mlp import MlpConfig, accuracy, load_model, save_model, train
from .pipeline import load_config, render_report, run_pipeline
from .sfit import SfitParams, sfit, sfit_per_cluster

log = logging.getLogger("clusterexplain")


def _config(cls, **kwargs):
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _read_table(path, label_column="label"):
    """Load a CSV, treating a ``label_column`` header (if present) as labels."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"input file {path} not found")
    with path.open(newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    label = label_column if label_column in [h.strip() for h in header] else None
    return load_csv(path, label_column=label)


def _with_labels(d, labels_path):
    a = load_assignment(labels_path)
    if a.n != d.n:
        raise LengthMismatch(f"{a.n} labels for {d.n} rows")
    return d.with_labels(a.labels)


def cmd_generate(args):
    spec = _config(GenSpec, shape=args.shape, n=args.n, seed=args.seed, noise=args.noise)
    d = generate(spec)
    save_csv(d, args.out)
    print(f"wrote {d.n} rows of {spec.shape.value}-like data to {args.out}")


def cmd_cluster(args):
    d = _read_table(args.input)
    z, _ = standardize(d.with_labels(None))
    if args.algo == "kmeans":
        a = kmeans(z, args.k, seed=args.seed, n_init=args.n_init)
    else:
        a = agglomerative_ward(z, args.k)
    save_assignment(a, args.out)
    print(f"{args.algo}: {a.k} clusters, sizes {a.sizes}; wrote {args.out}")


def _hidden(text):
    try:
        return tuple(int(h) for h in text.split(",") if h.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"hidden sizes must be comma-separated integers, got {text!r}") from None


def cmd_train(args):
    cfg = _config(MlpConfig, hidden_sizes=args.hidden, seed=args.seed, max_epochs=args.epochs,
                  batch_size=args.batch_size, learning_rate=args.lr, early_stopping_patience=args.patience)
    fractions = (1.0 - args.val_fraction, args.val_fraction)
    spec = _config(SplitSpec, fractions=fractions, seed=args.seed)
    d = _with_labels(_read_table(args.input), args.labels)
    z, scaling = standardize(d)
    tr, va = split(add_intercept(z), spec)
    m = train(tr, va, cfg)
    m.scaling = scaling
    m.feature_names = tuple(z.feature_names)
    save_model(m, args.out)
    print(f"trained {m.layer_sizes} for {len(m.train_loss)} epochs (best {m.best_epoch}); "
          f"validation accuracy {accuracy(m, va):.4f}; wrote {args.out}")


def cmd_explain(args):
    params = _config(SfitParams, alpha=args.alpha, beta=args.beta, max_order=args.order)
    m = load_model(args.model)
    d = _with_labels(_read_table(args.input), args.labels)
    if m.scaling is None:
        raise ConfigError("model has no stored scaling; train it with the 'train' subcommand")
    if m.feature_names is not None and tuple(d.feature_names) != tuple(m.feature_names):
        raise ConfigError(f"input columns {list(d.feature_names)} differ from the model's {list(m.feature_names)}")
    d2 = add_intercept(m.scaling.apply(d))
    if args.cluster is None:
        r = sfit(m, d2, params)
    else:
        r = sfit_per_cluster(m, d2, args.cluster, params, min_rows=args.min_rows)
    r.model = m.fingerprint()
    text = r.to_json()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(r.to_text(args.top))


def cmd_centroid(args):
    d = _with_labels(_read_table(args.input), args.labels)
    r = difference_scores(d, d.labels)
    if args.out:
        Path(args.out).write_text(r.to_json(args.top), encoding="utf-8")
    print(format_centroid_table(r.to_dict(args.top)), end="")


def cmd_pipeline(args):
    cfg = load_config(args.config)
    if args.output_dir:
        from dataclasses import replace
        cfg = replace(cfg, output_dir=args.output_dir)
    report = run_pipeline(cfg)
    print(render_report(report.output_dir), end="")


def cmd_report(args):
    print(render_report(args.directory), end="")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clusterexplain",
                                description="Explain clusters with significance-tested feature importance.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic labeled benchmark shape")
    g.add_argument("--shape", required=True, help=", ".join(s.value for s in FcpsShape))
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("cluster", help="cluster the standardized rows of a CSV")
    c.add_argument("--algo", choices=("kmeans", "ward"), required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--input", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--n-init", type=int, default=10)
    c.set_defaults(func=cmd_cluster)

    t = sub.add_parser("train", help="train the classifier on cluster labels")
    t.add_argument("--input", required=True)
    t.add_argument("--labels", required=True)
    t.add_argument("--hidden", type=_hidden, default=(50, 25, 10))
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--epochs", type=int, default=50)
    t.add_argument("--batch-size", type=int, default=32)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--patience", type=int, default=5)
    t.add_argument("--val-fraction", type=float, default=0.15)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("explain", help="run the feature introduction test")
    e.add_argument("--model", required=True)
    e.add_argument("--input", required=True)
    e.add_argument("--labels", required=True)
    e.add_argument("--cluster", type=int, default=None)
    e.add_argument("--alpha", type=float, default=0.05)
    e.add_argument("--beta", type=float, default=0.05)
    e.add_argument("--order", type=int, choices=(1, 2, 3), default=1)
    e.add_argument("--top", type=int, default=None, help="rows per table")
    e.add_argument("--min-rows", type=int, default=20)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_explain)

    d = sub.add_parser("centroid", help="centroid difference scores per cluster")
    d.add_argument("--input", required=True)
    d.add_argument("--labels", required=True)
    d.add_argument("--top", type=int, default=10)
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_centroid)

    pl = sub.add_parser("pipeline", help="run every stage from a JSON config")
    pl.add_argument("--config", required=True)
    pl.add_argument("--output-dir", default=None, help="override the config's output_dir")
    pl.set_defaults(func=cmd_pipeline)

    r = sub.add_parser("report", help="print the tables of a pipeline output directory")
    r.add_argument("directory")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(over="ignore", under="ignore")
    try:
        args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc.cause, ConfigError) else 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ClusterExplainError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
