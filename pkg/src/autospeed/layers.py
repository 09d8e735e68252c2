"""Parameterized layers: conv, transposed conv and dense, each with an
activation baked in. Weights use Glorot-uniform init, biases start at zero."""

from __future__ import annotations

import math

import numpy as np

from . import tensor as T
from .tensor import Tensor


def glorot_uniform(shape, fan_in, fan_out, rng, dtype=np.float32) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Layer:
    kind = "?"

    def __init__(self, name: str):
        self.name = name
        self.weight: Tensor
        self.bias: Tensor

    def named_params(self) -> dict[str, Tensor]:
        return {f"{self.name}.weight": self.weight, f"{self.name}.bias": self.bias}

    def load(self, weight: np.ndarray, bias: np.ndarray) -> None:
        if weight.shape != self.weight.data.shape or bias.shape != self.bias.data.shape:
            from .exceptions import ShapeMismatchError
            raise ShapeMismatchError(
                f"layer {self.name}: checkpoint tensors {weight.shape}/{bias.shape} do not "
                f"match declared {self.weight.data.shape}/{self.bias.data.shape}")
        self.weight.data = weight.astype(self.weight.data.dtype, copy=False)
        self.bias.data = bias.astype(self.bias.data.dtype, copy=False)


class ConvLayer(Layer):
    kind = "conv"

    def __init__(self, name, in_ch, out_ch, kernel=3, stride=(1, 1), padding="same",
                 act="leaky_relu", alpha=0.1, rng=None, dtype=np.float32):
        super().__init__(name)
        self.in_ch, self.out_ch = in_ch, out_ch
        self.kernel, self.stride, self.padding = kernel, tuple(stride), padding
        self.act, self.alpha = act, alpha
        fan = kernel * kernel
        w = glorot_uniform((out_ch, in_ch, kernel, kernel), in_ch * fan, out_ch * fan,
                           rng, dtype)
        self.weight = Tensor(w, requires_grad=True, dtype=dtype, name=f"{name}.weight")
        self.bias = Tensor(np.zeros(out_ch, dtype=dtype), requires_grad=True, dtype=dtype,
                           name=f"{name}.bias")

    def __call__(self, x: Tensor) -> Tensor:
        y = T.conv2d(x, self.weight, self.bias, self.stride, self.padding)
        return T.activation(y, self.act, self.alpha)


class TConvLayer(Layer):
    """Adjoint of a conv with the same stride/padding; out_hw names the
    spatial shape of the conv input it upsamples back to."""

    kind = "tconv"

    def __init__(self, name, in_ch, out_ch, out_hw, kernel=3, stride=(1, 1),
                 padding="same", act="leaky_relu", alpha=0.1, rng=None, dtype=np.float32):
        super().__init__(name)
        self.in_ch, self.out_ch = in_ch, out_ch
        self.out_hw = tuple(out_hw)
        self.kernel, self.stride, self.padding = kernel, tuple(stride), padding
        self.act, self.alpha = act, alpha
        fan = kernel * kernel
        w = glorot_uniform((in_ch, out_ch, kernel, kernel), in_ch * fan, out_ch * fan,
                           rng, dtype)
        self.weight = Tensor(w, requires_grad=True, dtype=dtype, name=f"{name}.weight")
        self.bias = Tensor(np.zeros(out_ch, dtype=dtype), requires_grad=True, dtype=dtype,
                           name=f"{name}.bias")

    def __call__(self, x: Tensor) -> Tensor:
        y = T.tconv2d(x, self.weight, self.bias, self.out_hw, self.stride, self.padding)
        return T.activation(y, self.act, self.alpha)


class DenseLayer(Layer):
    kind = "dense"

    def __init__(self, name, in_dim, out_dim, act="leaky_relu", alpha=0.1,
                 rng=None, dtype=np.float32):
        super().__init__(name)
        self.in_dim, self.out_dim = in_dim, out_dim
        self.act, self.alpha = act, alpha
        w = glorot_uniform((in_dim, out_dim), in_dim, out_dim, rng, dtype)
        self.weight = Tensor(w, requires_grad=True, dtype=dtype, name=f"{name}.weight")
        self.bias = Tensor(np.zeros(out_dim, dtype=dtype), requires_grad=True, dtype=dtype,
                           name=f"{name}.bias")

    def __call__(self, x: Tensor) -> Tensor:
        return T.activation(T.dense(x, self.weight, self.bias), self.act, self.alpha)


def collect_params(layers) -> dict[str, Tensor]:
    params: dict[str, Tensor] = {}
    for layer in layers:
        params.update(layer.named_params())
    return params
