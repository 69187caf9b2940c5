import math

import numpy as np
import pytest
from scipy import sparse
from scipy.special import expit

from src.model.menet import MenetModel, cross_entropy, one_hot, relu, softmax
from src.models import MenetConfig
from src.validators import FeatureMismatchError, ValidationError

DIMS = {"tfidf": 6, "node2vec": 5, "doc2vec": 4, "timestamp": 3}


def make_cfg(**kw):
    base = dict(n_h11=4, n_h12=3, n_h13=3, n_h14=2, weight_decay=0.1, seed=1)
    base.update(kw)
    return MenetConfig(**base)


def random_views(n, seed=0, sparse_tfidf=True):
    rng = np.random.default_rng(seed)
    views = {v: rng.normal(size=(n, d)) for v, d in DIMS.items()}
    if sparse_tfidf:
        dense = rng.random((n, DIMS["tfidf"]))
        dense[dense < 0.6] = 0.0
        views["tfidf"] = sparse.csr_matrix(dense)
    return views


def oracle_forward(model, views):
    hidden = []
    for v in model.views:
        x = views[v].toarray() if sparse.issparse(views[v]) else views[v]
        hidden.append(np.maximum(x @ model.params[f"W_{v}"] + model.params[f"b_{v}"], 0))
    z = np.concatenate(hidden, axis=1) @ model.params["W_o"] + model.params["b_o"]
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def test_zero_parameters_give_uniform_output():
    model = MenetModel(make_cfg(), DIMS, m=4, init=False)
    probs = model.forward(random_views(5)).probabilities
    np.testing.assert_allclose(probs, np.full((5, 4), 0.25))


def test_two_class_softmax_is_logistic():
    logits = np.random.default_rng(2).normal(size=(10, 2)) * 5
    probs = softmax(logits)
    np.testing.assert_allclose(probs[:, 0], expit(logits[:, 0] - logits[:, 1]), atol=1e-12)


def test_softmax_survives_large_logits():
    probs = softmax(np.array([[1e4, 0.0, -1e4], [1e4, 1e4, 1e4]]))
    assert np.all(np.isfinite(probs))
    np.testing.assert_allclose(probs.sum(axis=1), [1.0, 1.0])
    np.testing.assert_allclose(probs[1], [1 / 3] * 3)


def test_forward_matches_direct_computation():
    model = MenetModel(make_cfg(), DIMS, m=3)
    views = random_views(7, seed=1)
    np.testing.assert_allclose(model.forward(views).probabilities, oracle_forward(model, views), atol=1e-12)


def test_sparse_and_dense_inputs_agree():
    model = MenetModel(make_cfg(), DIMS, m=3)
    views = random_views(6, seed=4)
    dense = dict(views, tfidf=views["tfidf"].toarray())
    np.testing.assert_allclose(
        model.forward(views).probabilities, model.forward(dense).probabilities, atol=1e-12
    )


def test_identical_inputs_in_two_branches():
    cfg = make_cfg(n_h12=4, views=["node2vec", "doc2vec"])
    model = MenetModel(cfg, {"node2vec": 4, "doc2vec": 4}, m=2)
    x = np.random.default_rng(3).normal(size=(5, 4))
    views = {"node2vec": x, "doc2vec": x}
    np.testing.assert_allclose(model.forward(views).probabilities, oracle_forward(model, views), atol=1e-12)


def test_missing_view_is_zeros():
    model = MenetModel(make_cfg(), DIMS, m=3)
    views = random_views(4, sparse_tfidf=False)
    without = dict(views, doc2vec=None)
    zeros = dict(views, doc2vec=np.zeros((4, DIMS["doc2vec"])))
    np.testing.assert_allclose(model.forward(without).probabilities, model.forward(zeros).probabilities)
    del without["doc2vec"]
    np.testing.assert_allclose(model.forward(without).probabilities, model.forward(zeros).probabilities)


def test_input_shape_errors():
    model = MenetModel(make_cfg(), DIMS, m=3)
    views = random_views(4, sparse_tfidf=False)
    with pytest.raises(ValidationError, match="timestamp"):
        model.forward(dict(views, timestamp=np.zeros((4, 24))))
    with pytest.raises(FeatureMismatchError):
        model.forward(dict(views, node2vec=np.zeros((3, DIMS["node2vec"]))))
    with pytest.raises(ValidationError, match="Dimension mismatch for view tfidf"):
        model.backward(dict(views, tfidf=sparse.csr_matrix((4, 2))), np.zeros(4, dtype=int))


def test_construction_errors():
    with pytest.raises(ValidationError):
        MenetModel(make_cfg(), DIMS, m=1)
    with pytest.raises(ValidationError):
        MenetModel(make_cfg(m=5), DIMS, m=4)
    with pytest.raises(ValidationError):
        MenetModel(make_cfg(), {"tfidf": 6}, m=3)


def test_loss_examples():
    model = MenetModel(make_cfg(weight_decay=0.0), DIMS, m=2, init=False)
    assert abs(model.loss(np.array([[0.7, 0.3]]), np.array([0])) - 0.35667) < 1e-5

    n, m = 6, 4
    uniform = MenetModel(make_cfg(weight_decay=0.0), DIMS, m=m, init=False)
    probs = uniform.forward(random_views(n)).probabilities
    assert abs(uniform.loss(probs, np.arange(n) % m) - n * math.log(m)) < 1e-9

    decayed = MenetModel(make_cfg(weight_decay=0.5), DIMS, m=3)
    perfect = one_hot(np.array([0, 2, 1]), 3)
    expected = 0.25 * np.sum(decayed.params["W_o"] ** 2)
    assert abs(decayed.loss(perfect, np.array([0, 2, 1])) - expected) < 1e-12
    assert decayed.loss(perfect, np.array([0, 2, 1]), with_decay=False) == 0.0


def test_log_is_clamped():
    assert cross_entropy(np.array([[0.0, 1.0]]), np.array([[1.0, 0.0]])) == pytest.approx(-math.log(1e-12))


def test_labels_out_of_range():
    with pytest.raises(ValidationError):
        one_hot(np.array([0, 3]), 3)


def numeric_gradient(model, views, labels, name, h):
    param = model.params[name]
    numeric = np.zeros_like(param)
    for idx in np.ndindex(param.shape):
        saved = param[idx]
        param[idx] = saved + h
        up = model.objective(views, labels)
        param[idx] = saved - h
        down = model.objective(views, labels)
        param[idx] = saved
        numeric[idx] = (up - down) / (2 * h)
    return numeric


@pytest.mark.parametrize("trial", range(100))
def test_gradients_match_finite_differences(trial):
    rng = np.random.default_rng(trial)
    dims = {v: int(d) for v, d in zip(DIMS, rng.integers(1, 5, size=len(DIMS)))}
    hidden = rng.integers(1, 4, size=4)
    m = int(rng.integers(2, 5))
    n = int(rng.integers(1, 8))
    cfg = make_cfg(
        n_h11=int(hidden[0]), n_h12=int(hidden[1]), n_h13=int(hidden[2]), n_h14=int(hidden[3]),
        weight_decay=float(rng.uniform(0.0, 0.5)), seed=trial,
    )
    model = MenetModel(cfg, dims, m=m)
    views = {v: rng.normal(size=(n, d)) for v, d in dims.items()}
    views["tfidf"] = sparse.csr_matrix(np.where(rng.random((n, dims["tfidf"])) < 0.5, 0.0, rng.random((n, dims["tfidf"]))))
    labels = rng.integers(0, m, size=n)
    # nonzero biases keep every hidden unit away from the ReLU kink
    for _ in range(20):
        for view in model.views:
            model.params[f"b_{view}"] = rng.normal(size=model.hidden_sizes[view])
        pre = model.forward_pass(views).pre_activations
        if min(np.abs(p).min() for p in pre.values()) > 1e-3:
            break
    model.params["b_o"] = rng.normal(size=m)
    _, grads = model.backward(views, labels)

    for name in model.param_names():
        numeric = numeric_gradient(model, views, labels, name, h=1e-5)
        denom = np.linalg.norm(numeric) + np.linalg.norm(grads[name])
        if denom == 0:
            continue
        assert np.linalg.norm(numeric - grads[name]) / denom <= 1e-4, name


def test_backward_returns_summed_cross_entropy():
    model = MenetModel(make_cfg(), DIMS, m=3)
    views = random_views(8, seed=2)
    labels = np.arange(8) % 3
    ce, _ = model.backward(views, labels)
    probs = model.forward(views).probabilities
    assert ce == pytest.approx(model.loss(probs, labels, with_decay=False))


def test_output_bias_gradient_closed_form():
    model = MenetModel(make_cfg(), DIMS, m=3)
    views = random_views(10, seed=8)
    labels = np.arange(10) % 3
    _, grads = model.backward(views, labels)
    probs = model.forward(views).probabilities
    np.testing.assert_allclose(grads["b_o"], (probs - one_hot(labels, 3)).mean(axis=0), atol=1e-12)


def test_dead_relu_branch_has_zero_gradient():
    model = MenetModel(make_cfg(), DIMS, m=3)
    model.params["b_timestamp"][:] = -1e3
    _, grads = model.backward(random_views(10, seed=9), np.arange(10) % 3)
    assert not grads["W_timestamp"].any()
    assert not grads["b_timestamp"].any()
    assert grads["W_doc2vec"].any()


def test_predict_ties_go_to_lowest_class():
    model = MenetModel(make_cfg(), DIMS, m=4, init=False)
    assert model.predict(random_views(5)).tolist() == [0] * 5


def test_constant_logit_shift_keeps_predictions():
    model = MenetModel(make_cfg(), DIMS, m=3)
    views = random_views(20, seed=10)
    before = model.forward(views)
    model.params["b_o"] += 7.5
    after = model.forward(views)
    np.testing.assert_allclose(after.probabilities, before.probabilities, atol=1e-12)
    np.testing.assert_array_equal(after.class_ids, before.class_ids)


def test_batched_prediction_matches_full_batch():
    model = MenetModel(make_cfg(), DIMS, m=3)
    views = random_views(23, seed=11)
    np.testing.assert_array_equal(model.predict(views, batch_size=5), model.predict(views))


def test_relu():
    np.testing.assert_array_equal(relu(np.array([-1.0, 0.0, 2.0])), [0.0, 0.0, 2.0])
