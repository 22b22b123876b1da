import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterexplain.data import SplitSpec, add_intercept, split, standardize
from clusterexplain.errors import BadLabel, DimensionMismatch, MissingFile
from clusterexplain.fcps import GenSpec, generate
from clusterexplain.mlp import (MlpConfig, MlpModel, accuracy, init_params, load_model, loss, loss_and_gradients,
                                losses, model_from_dict, model_to_dict, predict, predict_proba, save_model, train)
from helpers import make_dataset, rows_away_from_kinks


def random_model(sizes, seed):
    rng = np.random.default_rng(seed)
    W, b = init_params(sizes, rng)
    b = [rng.normal(0, 0.1, v.shape) for v in b]
    return MlpModel(W, b)


def numeric_gradient(m, X, y, h=1e-4):
    out = []
    for a in (*m.weights, *m.biases):
        g = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            keep = a[idx]
            a[idx] = keep + h
            up = loss_and_gradients(m, X, y)[0]
            a[idx] = keep - h
            down = loss_and_gradients(m, X, y)[0]
            a[idx] = keep
            g[idx] = (up - down) / (2 * h)
        out.append(g)
    return out


def relative_error(a, b):
    a, b = np.concatenate([v.ravel() for v in a]), np.concatenate([v.ravel() for v in b])
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


def constant_model(width, logits):
    """A network whose output ignores its input."""
    W = [np.zeros((width, 2)), np.zeros((2, len(logits)))]
    b = [np.zeros(2), np.asarray(logits, dtype=float)]
    return MlpModel(W, b)


def hepta_splits(seed=0):
    d = generate(GenSpec("Hepta", seed=seed))
    z, _ = standardize(d)
    return split(add_intercept(z), SplitSpec((0.7, 0.15, 0.15), seed=seed))


class TestConfig:
    @pytest.mark.parametrize("bad", [dict(hidden_sizes=()), dict(max_epochs=0), dict(batch_size=0),
                                     dict(learning_rate=0.0), dict(early_stopping_patience=0)])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            MlpConfig(**bad)


class TestGradients:
    @pytest.mark.parametrize("seed", range(20))
    def test_against_central_differences(self, seed):
        m = random_model([7, 5, 3], seed)
        rng = np.random.default_rng(100 + seed)
        X, y = rows_away_from_kinks(m, rng, 6), rng.integers(1, 4, 6)
        _, gW, gb = loss_and_gradients(m, X, y)
        assert relative_error(gW + gb, numeric_gradient(m, X, y)) < 1e-3

    def test_deeper_network(self):
        m = random_model([4, 6, 5, 3], 7)
        rng = np.random.default_rng(8)
        X, y = rows_away_from_kinks(m, rng, 10), rng.integers(1, 4, 10)
        _, gW, gb = loss_and_gradients(m, X, y)
        assert relative_error(gW + gb, numeric_gradient(m, X, y)) < 1e-3


class TestPrediction:
    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 10_000), scale=st.floats(0.01, 100.0))
    def test_probabilities_are_a_distribution(self, seed, scale):
        m = random_model([4, 6, 3], seed)
        X = scale * np.random.default_rng(seed).standard_normal((5, 4))
        P = predict_proba(m, X)
        assert (P >= 0).all()
        np.testing.assert_allclose(P.sum(1), 1.0, atol=1e-12)

    def test_zero_network_is_uniform(self):
        m = constant_model(3, [0.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(predict_proba(m, np.ones(3)), [[0.25] * 4])

    def test_pure(self):
        m = random_model([3, 4, 2], 0)
        x = np.array([0.3, -1.0, 2.0])
        np.testing.assert_array_equal(predict_proba(m, np.vstack([x, x]))[0], predict_proba(m, x)[0])

    def test_width_checked(self):
        with pytest.raises(DimensionMismatch):
            predict_proba(random_model([3, 4, 2], 0), np.ones(4))


class TestLoss:
    def test_certain_prediction(self):
        assert loss(constant_model(2, [1000.0, 0.0]), np.ones(2), 1) == 0.0

    def test_uniform_four_classes(self):
        assert loss(constant_model(2, [0.0] * 4), np.ones(2), 3) == pytest.approx(math.log(4), abs=1e-12)

    def test_floor(self):
        assert loss(constant_model(2, [0.0, -1000.0]), np.ones(2), 2) == pytest.approx(-math.log(1e-12))

    def test_near_certain_keeps_a_nonzero_loss(self):
        assert 0 < loss(constant_model(2, [40.0, 0.0]), np.ones(2), 1) < 1e-16

    def test_bad_label(self):
        with pytest.raises(BadLabel):
            losses(constant_model(2, [0.0, 0.0]), np.ones((1, 2)), [3])


class TestTraining:
    def test_hepta_accuracy(self):
        tr, va, te = hepta_splits(0)
        m = train(tr, va, MlpConfig(seed=0))
        assert accuracy(m, te) >= 0.95
        assert len(m.train_loss) <= 50

    def test_deterministic(self):
        tr, va, _ = hepta_splits(1)
        a = train(tr, va, MlpConfig(seed=4, max_epochs=5))
        b = train(tr, va, MlpConfig(seed=4, max_epochs=5))
        assert a.fingerprint() == b.fingerprint()
        assert a.val_loss == b.val_loss
        assert a.fingerprint() != train(tr, va, MlpConfig(seed=5, max_epochs=5)).fingerprint()

    @pytest.mark.parametrize("patience", [1, 2, 5])
    def test_returns_best_validation_weights(self, patience):
        tr, va, _ = hepta_splits(2)
        m = train(tr, va, MlpConfig(seed=0, max_epochs=40, learning_rate=0.05, early_stopping_patience=patience))
        log = m.val_loss
        assert log[m.best_epoch] == min(log)
        assert log[m.best_epoch] <= log[0]
        assert len(log) - 1 - m.best_epoch <= patience
        assert losses(m, va.X, va.labels).mean() == pytest.approx(log[m.best_epoch], rel=1e-9)

    def test_single_class(self):
        rng = np.random.default_rng(0)
        d = add_intercept(make_dataset(rng.standard_normal((40, 2)), labels=np.ones(40, dtype=int)))
        m = train(d, None, MlpConfig(hidden_sizes=(4,), max_epochs=3))
        assert m.n_classes == 1
        assert accuracy(m, d) == 1.0

    def test_constant_model_on_balanced_classes(self):
        rng = np.random.default_rng(3)
        labels = rng.integers(1, 5, 400)
        d = make_dataset(rng.standard_normal((400, 2)), labels=labels)
        assert accuracy(constant_model(2, [1.0, 0.0, 0.0, 0.0]), d) == pytest.approx(0.25, abs=0.07)

    def test_perfect_model(self):
        d = make_dataset([[-1.0], [1.0]], labels=[1, 2])
        m = MlpModel([np.array([[1.0, -1.0]]), np.array([[-10.0, 10.0], [10.0, -10.0]])],
                     [np.zeros(2), np.zeros(2)])
        np.testing.assert_array_equal(predict(m, d.X), [1, 2])
        assert accuracy(m, d) == 1.0


class TestSerialization:
    def test_round_trip(self, tmp_path):
        tr, va, _ = hepta_splits(3)
        m = train(tr, va, MlpConfig(seed=1, max_epochs=3, hidden_sizes=(8, 4)))
        save_model(m, tmp_path / "m.json")
        back = load_model(tmp_path / "m.json")
        assert back.fingerprint() == m.fingerprint()
        assert back.config == m.config and back.val_loss == m.val_loss
        np.testing.assert_array_equal(predict_proba(back, va.X), predict_proba(m, va.X))

    def test_rejects_foreign_blob(self):
        blob = model_to_dict(random_model([2, 3, 2], 0))
        blob["version"] = 99
        with pytest.raises(ValueError):
            model_from_dict(blob)

    def test_missing(self, tmp_path):
        with pytest.raises(MissingFile):
            load_model(tmp_path / "none.json")
