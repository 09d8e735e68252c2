"""SGD and Adam on named parameter tensors. Update order follows dict
insertion order, so steps are deterministic."""

from __future__ import annotations

import numpy as np

from .exceptions import ConfigurationError, ShapeMismatchError
from .tensor import Tensor


class Optimizer:
    def __init__(self, params: dict[str, Tensor], lr: float):
        if lr <= 0:
            raise ConfigurationError(f"learning rate must be > 0, got {lr}")
        self.params = dict(params)
        self.lr = float(lr)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def _grad(self, name: str, p: Tensor) -> np.ndarray:
        g = p.grad
        if g is None:
            return np.zeros_like(p.data)
        if g.shape != p.data.shape:
            raise ShapeMismatchError(
                f"gradient shape {g.shape} does not match parameter {name} {p.data.shape}")
        return g


class SGD(Optimizer):
    kind = "sgd"

    def step(self) -> None:
        for name, p in self.params.items():
            p.data -= p.data.dtype.type(self.lr) * self._grad(name, p)


class Adam(Optimizer):
    kind = "adam"

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        super().__init__(params, lr)
        if not (0 < beta1 < 1 and 0 < beta2 < 1):
            raise ConfigurationError(f"betas must lie in (0,1), got {beta1}, {beta2}")
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in self.params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in self.params.items()}

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, p in self.params.items():
            g = self._grad(name, p)
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            m_hat = m / (1 - b1 ** self.t)
            v_hat = v / (1 - b2 ** self.t)
            p.data -= (self.lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(p.data.dtype)
