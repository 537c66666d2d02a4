"""Parameter-update rules for the training loops.

Both optimizers mutate parameter tensors in place and keep any internal
state keyed by parameter identity, so a run's trajectory is a pure function
of (initial parameters, gradient sequence, hyperparameters).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .tensor import Tensor

__all__ = ["Sgd", "Adam", "make_optimizer"]


class Sgd:
    """Plain stochastic gradient descent."""

    def __init__(self, params: list[Tensor], learning_rate: float):
        if learning_rate <= 0:
            raise ConfigurationError(f"learning_rate must be positive, got {learning_rate}")
        self.params = list(params)
        self.learning_rate = float(learning_rate)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        for p in self.params:
            if p.grad is not None:
                p.data -= self.learning_rate * p.grad


class Adam:
    """Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(
        self,
        params: list[Tensor],
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        if learning_rate <= 0:
            raise ConfigurationError(f"learning_rate must be positive, got {learning_rate}")
        self.params = list(params)
        self.learning_rate = float(learning_rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        self.step_count += 1
        b1t = 1.0 - self.beta1 ** self.step_count
        b2t = 1.0 - self.beta2 ** self.step_count
        for p, m, v in zip(self.params, self._m, self._v):
            if p.grad is None:
                continue
            g = p.grad
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p.data -= self.learning_rate * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


def make_optimizer(kind: str, params: list[Tensor], learning_rate: float):
    if kind == "adam":
        return Adam(params, learning_rate)
    if kind == "sgd":
        return Sgd(params, learning_rate)
    raise ConfigurationError(f"unknown optimizer {kind!r}; expected 'adam' or 'sgd'")
