import csv

import numpy as np
import pytest

from src.model.menet import MenetModel
from src.model.training import EarlyStopping, accuracy, annealed_lr, train, write_history_csv
from src.models import MenetConfig
from src.validators import NumericalError, ValidationError


def clusters(n=60, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 2
    centers = np.where(labels[:, None] == 0, -3.0, 3.0)
    x = centers + rng.normal(scale=0.5, size=(n, 4))
    return {"doc2vec": x}, labels


def make_cfg(**kw):
    base = dict(
        views=["doc2vec"], n_h13=8, learning_rate=0.05, weight_decay=0.0,
        batch_size=16, max_epochs=40, patience=40, seed=3,
    )
    base.update(kw)
    return MenetConfig(**base)


def fresh_model(cfg):
    return MenetModel(cfg, {"doc2vec": 4}, m=2)


def test_separable_data_is_learned():
    views, labels = clusters()
    model, history = train(fresh_model(make_cfg()), views, labels, views, labels)
    assert history.best_val_accuracy == 1.0
    assert accuracy(model, views, labels) == 1.0


def test_early_stop_restores_best_weights(mocker):
    cfg = make_cfg(patience=3, max_epochs=20)
    model = fresh_model(cfg)
    views, labels = clusters()
    scores = iter([0.5, 0.4, 0.3, 0.2, 0.1, 0.0])
    seen = []

    def fake_accuracy(m, v, y):
        seen.append(m.snapshot())
        return next(scores)

    mocker.patch("src.model.training.accuracy", side_effect=fake_accuracy)
    model, history = train(model, views, labels, views, labels)

    assert len(history.records) == history.best_epoch + cfg.patience == 4
    assert history.best_epoch == 1
    assert history.stopped_early
    assert model.epoch == 1
    for name, value in seen[0].items():
        np.testing.assert_array_equal(model.params[name], value)
    # one epoch of 60 rows in batches of 16
    assert model.optimizer.t == 4


def test_equal_accuracy_is_not_an_improvement():
    stopper = EarlyStopping(patience=2)
    assert stopper.update(1, 0.5)
    assert not stopper.update(2, 0.5)
    assert not stopper.should_stop
    assert not stopper.update(3, 0.49)
    assert stopper.should_stop
    assert stopper.best_epoch == 1


def test_training_is_deterministic():
    views, labels = clusters(40, seed=1)
    a, ha = train(fresh_model(make_cfg(max_epochs=5)), views, labels, views, labels)
    b, hb = train(fresh_model(make_cfg(max_epochs=5)), views, labels, views, labels)
    assert ha == hb
    for name in a.param_names():
        np.testing.assert_array_equal(a.params[name], b.params[name])


def test_sgd_optimizer_trains():
    views, labels = clusters(40, seed=2)
    model, history = train(
        fresh_model(make_cfg(optimizer="sgd", learning_rate=0.5)), views, labels, views, labels
    )
    assert history.best_val_accuracy == 1.0


def test_infinite_input_is_a_numerical_error():
    views, labels = clusters(20)
    views["doc2vec"][3, 0] = np.inf
    with pytest.raises(NumericalError):
        train(fresh_model(make_cfg()), views, labels, clusters(20)[0], labels)


def test_empty_validation_split():
    views, labels = clusters(20)
    empty = {"doc2vec": np.zeros((0, 4))}
    with pytest.raises(ValidationError):
        train(fresh_model(make_cfg()), views, labels, empty, np.array([], dtype=int))


def test_label_count_must_match_rows():
    views, labels = clusters(20)
    with pytest.raises(ValidationError):
        train(fresh_model(make_cfg()), views, labels[:-1], views, labels)


def test_annealed_learning_rate():
    cfg = MenetConfig(learning_rate=0.1, anneal_factor=0.5, anneal_every=2)
    assert [annealed_lr(cfg, e) for e in (1, 2, 3, 4, 5)] == pytest.approx([0.1, 0.1, 0.05, 0.05, 0.025])


def test_history_csv(tmp_path):
    views, labels = clusters(20)
    _, history = train(fresh_model(make_cfg(max_epochs=3)), views, labels, views, labels)
    path = tmp_path / "history.csv"
    write_history_csv(history, path)
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["epoch", "train_loss", "val_accuracy", "lr"]
    assert [int(r[0]) for r in rows[1:]] == [1, 2, 3]
    assert float(rows[1][1]) == history.records[0].train_loss
