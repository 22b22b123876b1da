"""Shared builders for the test modules."""
import numpy as np

from clusterexplain.data import Dataset, SplitSpec, add_intercept, split, standardize
from clusterexplain.fcps import GenSpec, generate
from clusterexplain.mlp import MlpConfig, MlpModel, train

FRACTIONS = (0.7, 0.15, 0.15)


def make_dataset(X, names=None, labels=None):
    X = np.asarray(X, dtype=float)
    names = names or [f"X{k + 1}" for k in range(X.shape[1])]
    return Dataset(X, names, labels=labels)


def fit(d: Dataset, seed: int, cfg: MlpConfig = None):
    """Standardize, split 70/15/15 and train; returns (model, inference split)."""
    z, _ = standardize(d)
    tr, va, te = split(add_intercept(z), SplitSpec(FRACTIONS, seed=seed))
    return train(tr, va, cfg or MlpConfig(seed=seed)), te


def fit_shape(shape, seed: int, n=None):
    return fit(generate(GenSpec(shape, n=n, seed=seed)), seed)


def displaced_blobs(seed, per_blob=250, p=5, shift=4.0, features=(3, 1, 4, 2)):
    """Four unit-variance blobs; blob c sits ``shift`` along feature ``features[c-1]`` only."""
    rng = np.random.default_rng(seed)
    X, y = [], []
    for c, j in enumerate(features, start=1):
        centre = np.zeros(p)
        centre[j - 1] = shift
        X.append(centre + rng.standard_normal((per_blob, p)))
        y.append(np.full(per_blob, c))
    return make_dataset(np.vstack(X), labels=np.concatenate(y))


def linear_model(W, b):
    """A network with no hidden layer: logits = x @ W + b."""
    return MlpModel([np.asarray(W, dtype=float)], [np.asarray(b, dtype=float)])


def rows_away_from_kinks(m: MlpModel, rng, n, margin=1e-3):
    """Standard-normal inputs whose hidden pre-activations all clear zero by ``margin``.

    A central difference that straddles a ReLU kink does not estimate the
    derivative, so gradient checks sample only differentiable points.
    """
    rows = []
    while len(rows) < n:
        a = rng.standard_normal((1, m.input_width))
        x, clear = a, True
        for W, b in zip(m.weights[:-1], m.biases[:-1]):
            z = a @ W + b
            clear &= bool(np.abs(z).min() > margin)
            a = np.maximum(z, 0.0)
        if clear:
            rows.append(x[0])
    return np.array(rows)
