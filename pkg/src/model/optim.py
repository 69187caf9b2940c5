"""Adam and plain SGD updates over a dict of numpy parameters."""

from typing import Dict

import numpy as np

Params = Dict[str, np.ndarray]


class SGD:
    name = "sgd"

    def __init__(self, params: Params, lr: float):
        self.lr = lr
        self.t = 0

    def step(self, params: Params, grads: Params) -> None:
        self.t += 1
        for key, grad in grads.items():
            params[key] -= self.lr * grad

    def state(self) -> Params:
        return {}

    def load_state(self, state: Params, t: int) -> None:
        self.t = t


class Adam:
    """
    Adam with bias-corrected first and second moment estimates.

    Parameters are updated in place.
    """

    name = "adam"

    def __init__(
        self,
        params: Params,
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {key: np.zeros_like(value) for key, value in params.items()}
        self.v = {key: np.zeros_like(value) for key, value in params.items()}

    def step(self, params: Params, grads: Params) -> None:
        self.t += 1
        bias1 = 1.0 - self.beta1 ** self.t
        bias2 = 1.0 - self.beta2 ** self.t
        for key, grad in grads.items():
            m, v = self.m[key], self.v[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            params[key] -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)

    def state(self) -> Params:
        """Moment estimates keyed ``m.<param>`` and ``v.<param>``."""
        out = {f"m.{key}": value.copy() for key, value in self.m.items()}
        out.update({f"v.{key}": value.copy() for key, value in self.v.items()})
        return out

    def load_state(self, state: Params, t: int) -> None:
        for key in self.m:
            self.m[key] = state[f"m.{key}"].copy()
            self.v[key] = state[f"v.{key}"].copy()
        self.t = t


def make_optimizer(name: str, params: Params, lr: float):
    if name == "adam":
        return Adam(params, lr)
    if name == "sgd":
        return SGD(params, lr)
    raise ValueError(f"Unknown optimizer: {name}")
