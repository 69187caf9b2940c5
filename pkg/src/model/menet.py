"""Four-branch MENET classifier: one ReLU layer per view, concatenation, softmax head."""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from ..models import MenetConfig
from ..utils.logger import logger
from ..validators import FeatureMismatchError, ValidationError, validate_dimensions, validate_feature_rows

Matrix = Union[np.ndarray, sparse.spmatrix]
Views = Mapping[str, Optional[Matrix]]
Params = Dict[str, np.ndarray]

LOG_EPS = 1e-12


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row maximum so large logits do not overflow."""
    shifted = logits - np.max(logits, axis=1, keepdims=True)
    exps = np.exp(shifted)
    return exps / np.sum(exps, axis=1, keepdims=True)


def one_hot(labels: np.ndarray, m: int) -> np.ndarray:
    """
    Class ids to one-hot rows; 2-D input is taken as already one-hot.

    Raises:
        ValidationError: If a class id lies outside [0, m)
    """
    labels = np.asarray(labels)
    if labels.ndim == 2:
        if labels.shape[1] != m:
            raise ValidationError(f"One-hot labels have {labels.shape[1]} columns, expected {m}")
        return labels.astype(np.float64)
    ids = labels.astype(np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= m):
        raise ValidationError(f"Class id out of range [0, {m}): {int(ids[(ids < 0) | (ids >= m)][0])}")
    out = np.zeros((ids.size, m))
    out[np.arange(ids.size), ids] = 1.0
    return out


def cross_entropy(probabilities: np.ndarray, targets: np.ndarray) -> float:
    """Summed cross-entropy, log clamped at 1e-12."""
    return float(-np.sum(targets * np.log(np.maximum(probabilities, LOG_EPS))))


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass
class PredictionBatch:
    """Per-user class probabilities."""

    probabilities: np.ndarray

    @property
    def class_ids(self) -> np.ndarray:
        # np.argmax returns the first maximum, so ties go to the lowest class id
        return np.argmax(self.probabilities, axis=1)

    def __len__(self) -> int:
        return self.probabilities.shape[0]


@dataclass
class ForwardPass:
    inputs: Dict[str, Matrix]
    pre_activations: Dict[str, np.ndarray]
    hidden: np.ndarray
    probabilities: np.ndarray


class MenetModel:
    """
    MENET parameters for the selected views.

    Branch v maps a d_v input to n_h1v ReLU units (``W_<view>``, ``b_<view>``);
    the concatenated hidden vector feeds an m-way softmax (``W_o``, ``b_o``).
    Branches follow the canonical view order tfidf, node2vec, doc2vec, timestamp.
    """

    def __init__(self, cfg: MenetConfig, dims: Mapping[str, int], m: int, init: bool = True):
        if m < 2:
            raise ValidationError(f"Need at least two classes, got {m}")
        if cfg.m is not None and cfg.m != m:
            raise ValidationError(f"Configured {cfg.m} classes but the class table has {m}")
        missing = [v for v in cfg.views if v not in dims]
        if missing:
            raise ValidationError(f"No input dimension for view: {', '.join(missing)}")

        self.config = cfg.model_copy(update={"m": m})
        self.views: List[str] = list(cfg.views)
        self.dims: Dict[str, int] = {v: int(dims[v]) for v in self.views}
        self.hidden_sizes: Dict[str, int] = cfg.hidden_sizes()
        self.m = m
        self.epoch = 0
        self.optimizer = None
        self.params: Params = {}

        rng = np.random.default_rng(cfg.seed)
        for view in self.views:
            d, h = self.dims[view], self.hidden_sizes[view]
            self.params[f"W_{view}"] = glorot_uniform(rng, d, h) if init else np.zeros((d, h))
            self.params[f"b_{view}"] = np.zeros(h)
        total_hidden = self.concat_size
        self.params["W_o"] = glorot_uniform(rng, total_hidden, m) if init else np.zeros((total_hidden, m))
        self.params["b_o"] = np.zeros(m)

        logger.debug(
            "menet",
            "model_initialized",
            views=self.views,
            dims=self.dims,
            hidden=self.hidden_sizes,
            classes=m
        )

    @property
    def concat_size(self) -> int:
        return sum(self.hidden_sizes.values())

    def param_names(self) -> List[str]:
        names = []
        for view in self.views:
            names += [f"W_{view}", f"b_{view}"]
        return names + ["W_o", "b_o"]

    def snapshot(self) -> Params:
        return {name: value.copy() for name, value in self.params.items()}

    def restore(self, params: Params) -> None:
        for name in self.param_names():
            self.params[name] = params[name].copy()

    def _inputs(self, views: Views) -> Tuple[Dict[str, Matrix], int]:
        """Resolve per-view inputs; an absent view becomes zero rows."""
        unknown = [v for v, x in views.items() if x is not None and v not in self.dims]
        if unknown:
            logger.debug("menet", "unused_views_ignored", views=unknown)

        given = {v: views[v] for v in self.views if views.get(v) is not None}
        if not given:
            raise ValidationError("No input for any of the model's views")
        n = validate_feature_rows({v: x.shape[0] for v, x in given.items()})
        validate_dimensions(self.dims, {v: x.shape[1] for v, x in given.items()})

        inputs: Dict[str, Matrix] = {}
        for view in self.views:
            x = given.get(view)
            if x is None:
                inputs[view] = np.zeros((n, self.dims[view]))
            else:
                inputs[view] = x.tocsr() if sparse.issparse(x) else np.asarray(x, dtype=np.float64)
        return inputs, n

    def forward_pass(self, views: Views) -> ForwardPass:
        inputs, _ = self._inputs(views)
        pre, hidden = {}, []
        for view in self.views:
            a = np.asarray(inputs[view] @ self.params[f"W_{view}"]) + self.params[f"b_{view}"]
            pre[view] = a
            hidden.append(relu(a))
        z = np.concatenate(hidden, axis=1)
        probs = softmax(z @ self.params["W_o"] + self.params["b_o"])
        return ForwardPass(inputs=inputs, pre_activations=pre, hidden=z, probabilities=probs)

    def forward(self, views: Views) -> PredictionBatch:
        """
        Class probabilities for a batch of users.

        Args:
            views: View name to (n, d_v) matrix; a missing or None view is all zeros

        Raises:
            ValidationError: If a view has the wrong width
            FeatureMismatchError: If views disagree on the row count
        """
        return PredictionBatch(probabilities=self.forward_pass(views).probabilities)

    def decay_term(self) -> float:
        return 0.5 * self.config.weight_decay * float(np.sum(self.params["W_o"] ** 2))

    def loss(self, probabilities: np.ndarray, labels: np.ndarray, with_decay: bool = True) -> float:
        """
        Summed cross-entropy over the batch, plus (λ/2)·‖W_o‖² when ``with_decay``.

        Args:
            probabilities: (n, m) forward output
            labels: Class ids or one-hot rows
        """
        value = cross_entropy(probabilities, one_hot(labels, self.m))
        return value + self.decay_term() if with_decay else value

    def objective(self, views: Views, labels: np.ndarray) -> float:
        """The optimized quantity: batch-mean cross-entropy plus (λ/2)·‖W_o‖²."""
        probs = self.forward_pass(views).probabilities
        n = probs.shape[0]
        return cross_entropy(probs, one_hot(labels, self.m)) / n + self.decay_term()

    def backward(self, views: Views, labels: np.ndarray) -> Tuple[float, Params]:
        """
        Gradients of :meth:`objective` with respect to every parameter.

        The ReLU subgradient at zero is taken as zero.

        Returns:
            (summed cross-entropy of the batch, gradients by parameter name)
        """
        fp = self.forward_pass(views)
        targets = one_hot(labels, self.m)
        n = targets.shape[0]
        if fp.probabilities.shape[0] != n:
            raise FeatureMismatchError(
                f"Row count mismatch: views have {fp.probabilities.shape[0]} rows, labels have {n} rows"
            )

        d_logits = (fp.probabilities - targets) / n
        grads: Params = {
            "W_o": fp.hidden.T @ d_logits + self.config.weight_decay * self.params["W_o"],
            "b_o": d_logits.sum(axis=0),
        }
        d_hidden = d_logits @ self.params["W_o"].T

        offset = 0
        for view in self.views:
            h = self.hidden_sizes[view]
            d_pre = d_hidden[:, offset:offset + h] * (fp.pre_activations[view] > 0)
            offset += h
            grads[f"W_{view}"] = np.asarray(fp.inputs[view].T @ d_pre)
            grads[f"b_{view}"] = d_pre.sum(axis=0)

        return cross_entropy(fp.probabilities, targets), grads

    def predict(self, views: Views, batch_size: Optional[int] = None) -> np.ndarray:
        """Argmax class ids, in input order; ties go to the lowest class id."""
        inputs, n = self._inputs(views)
        step = batch_size or max(n, 1)
        out = np.zeros(n, dtype=np.int64)
        for start in range(0, n, step):
            chunk = {v: x[start:start + step] for v, x in inputs.items()}
            out[start:start + step] = self.forward(chunk).class_ids
        return out


def select_rows(views: Views, rows: Sequence[int]) -> Dict[str, Optional[Matrix]]:
    """Subset every view to the given rows (None views stay None)."""
    idx = np.asarray(rows, dtype=np.int64)
    return {v: (x[idx] if x is not None else None) for v, x in views.items()}


def view_rows(views: Views) -> int:
    for x in views.values():
        if x is not None:
            return x.shape[0]
    raise ValidationError("No feature views given")
