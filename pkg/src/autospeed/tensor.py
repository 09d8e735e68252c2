"""Reverse-mode autodiff on numpy arrays.

Values are float32 by default (float64 is used by the gradient checker);
reductions accumulate in float64. Ops record a tape only while gradients
are enabled; `backward` walks it in reverse topological order, which is
fixed by construction order, so gradient accumulation is deterministic.
"""

from __future__ import annotations

import contextlib

import numpy as np

from .exceptions import ConfigurationError, GraphError, ShapeMismatchError

_GRAD_ENABLED = True
_VALIDATE = True


def set_validation(enabled: bool) -> None:
    """Toggle NaN/Inf rejection in the public Tensor constructor."""
    global _VALIDATE
    _VALIDATE = bool(enabled)


@contextlib.contextmanager
def no_grad():
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents", "name")

    def __init__(self, data, requires_grad=False, dtype=np.float32, name=None):
        arr = np.asarray(data, dtype=dtype)
        if _VALIDATE and arr.size and not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite values in tensor {name or ''} of shape {arr.shape}")
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._backward = None
        self._parents = ()
        self.name = name

    @classmethod
    def _wrap(cls, data, parents, backward):
        """Internal op result; skips validation, inherits grad requirement."""
        t = cls.__new__(cls)
        t.data = data
        t.grad = None
        t.name = None
        if _GRAD_ENABLED and any(p.requires_grad for p in parents):
            t.requires_grad = True
            t._parents = parents
            t._backward = backward
        else:
            t.requires_grad = False
            t._parents = ()
            t._backward = None
        return t

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.astype(self.data.dtype, copy=True)
        else:
            self.grad += g

    def backward(self) -> None:
        """Reverse-mode pass from a scalar; fills .grad on every reachable leaf."""
        if self.data.ndim != 0 and self.data.size != 1:
            raise GraphError(f"backward requires a scalar, got shape {self.shape}")
        if self._backward is None and not self.requires_grad:
            raise GraphError("no recorded computation graph; forward ran under no_grad "
                             "or no input requires gradients")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def reshape(self, *shape):
        return reshape(self, *shape)

    def __repr__(self):
        tag = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={tuple(self.shape)}, dtype={self.data.dtype}{tag})"


def _as_tensor(x, like: Tensor) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=like.data.dtype), dtype=like.data.dtype)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient down to the shape it was broadcast from."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, s in enumerate(shape):
        if s == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def add(a: Tensor, b) -> Tensor:
    b = _as_tensor(b, a)
    out = a.data + b.data

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g, b.data.shape))

    return Tensor._wrap(out, (a, b), backward)


def sub(a: Tensor, b) -> Tensor:
    b = _as_tensor(b, a)
    out = a.data - b.data

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(-g, b.data.shape))

    return Tensor._wrap(out, (a, b), backward)


def mul(a: Tensor, b) -> Tensor:
    b = _as_tensor(b, a)
    out = a.data * b.data

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g * a.data, b.data.shape))

    return Tensor._wrap(out, (a, b), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeMismatchError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeMismatchError(f"matmul inner dims differ: {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(g @ b.data.T)
        if b.requires_grad:
            b.accumulate_grad(a.data.T @ g)

    return Tensor._wrap(out, (a, b), backward)


def reshape(a: Tensor, *shape) -> Tensor:
    if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
        shape = tuple(shape[0])
    out = a.data.reshape(shape)

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(g.reshape(a.data.shape))

    return Tensor._wrap(out, (a,), backward)


# -- activations ------------------------------------------------------------

ACTIVATIONS = ("relu", "leaky_relu", "linear")


def activation(x: Tensor, kind: str, alpha: float = 0.1) -> Tensor:
    """Elementwise nonlinearity: relu, leaky_relu(alpha) or linear (identity)."""
    if kind == "linear":
        return x
    if kind == "relu":
        out = np.maximum(x.data, 0)

        def backward(g):
            if x.requires_grad:
                x.accumulate_grad(g * (x.data > 0))

        return Tensor._wrap(out, (x,), backward)
    if kind == "leaky_relu":
        out = np.where(x.data >= 0, x.data, x.data * x.data.dtype.type(alpha))

        def backward(g):
            if x.requires_grad:
                x.accumulate_grad(g * np.where(x.data >= 0, 1.0, alpha).astype(x.data.dtype))

        return Tensor._wrap(out, (x,), backward)
    raise ConfigurationError(f"unknown activation kind {kind!r}; expected one of {ACTIVATIONS}")


# -- loss ---------------------------------------------------------------------


def mse(a: Tensor, b: Tensor) -> Tensor:
    """Mean squared error over all elements, accumulated in float64."""
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(f"mse shapes differ: {a.shape} vs {b.shape}")
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    out = np.asarray((diff * diff).mean() if diff.size else 0.0, dtype=a.data.dtype)
    scale = 2.0 / max(diff.size, 1)

    def backward(g):
        gd = (g * scale) * diff
        if a.requires_grad:
            a.accumulate_grad(gd.astype(a.data.dtype))
        if b.requires_grad:
            b.accumulate_grad((-gd).astype(b.data.dtype))

    return Tensor._wrap(out, (a, b), backward)


# -- convolution --------------------------------------------------------------


def _conv_geometry(size: int, k: int, stride: int, padding: str) -> tuple[int, int, int]:
    """Output extent and (before, after) pad for one spatial axis."""
    if padding == "same":
        out = -(-size // stride)
        total = max((out - 1) * stride + k - size, 0)
        return out, total // 2, total - total // 2
    if padding == "valid":
        if size < k:
            raise ShapeMismatchError(f"valid conv needs input >= kernel, got {size} < {k}")
        return (size - k) // stride + 1, 0, 0
    raise ConfigurationError(f"padding must be 'same' or 'valid', got {padding!r}")


def conv_output_shape(hw: tuple[int, int], k: int, stride: tuple[int, int],
                      padding: str) -> tuple[int, int]:
    ho, _, _ = _conv_geometry(hw[0], k, stride[0], padding)
    wo, _, _ = _conv_geometry(hw[1], k, stride[1], padding)
    return ho, wo


def _im2col(xp: np.ndarray, kh: int, kw: int, sh: int, sw: int) -> np.ndarray:
    # padded (N,C,H,W) -> (N,Ho,Wo,C*kh*kw)
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))
    win = win[:, :, ::sh, ::sw]
    n, c, ho, wo = win.shape[:4]
    return win.transpose(0, 2, 3, 1, 4, 5).reshape(n, ho * wo, c * kh * kw)


def _conv_fwd(x, w, stride, pads):
    (sh, sw), (pt, pb, pl, pr) = stride, pads
    K, C, kh, kw = w.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pt, pb), (pl, pr))) if (pt or pb or pl or pr) else x
    ho = (xp.shape[2] - kh) // sh + 1
    wo = (xp.shape[3] - kw) // sw + 1
    cols = _im2col(xp, kh, kw, sh, sw)
    y = cols @ w.reshape(K, C * kh * kw).T
    return y.reshape(x.shape[0], ho, wo, K).transpose(0, 3, 1, 2), cols


def _conv_dw(cols, dy, k_shape):
    # dy: (N,K,Ho,Wo); cols from the forward input
    K, C, kh, kw = k_shape
    dy2 = dy.transpose(0, 2, 3, 1).reshape(-1, K)
    return (dy2.T @ cols.reshape(-1, C * kh * kw)).reshape(K, C, kh, kw)


def _conv_dx(dy, w, stride, pads, x_shape):
    # scatter-add of dy @ W back onto the (padded) input grid
    (sh, sw), (pt, pb, pl, pr) = stride, pads
    K, C, kh, kw = w.shape
    N, _, H, W = x_shape
    n, _, ho, wo = dy.shape
    dcols = dy.transpose(0, 2, 3, 1).reshape(-1, K) @ w.reshape(K, C * kh * kw)
    dcols = dcols.reshape(N, ho, wo, C, kh, kw).transpose(0, 3, 1, 2, 4, 5)
    dxp = np.zeros((N, C, H + pt + pb, W + pl + pr), dtype=dy.dtype)
    for i in range(kh):
        for j in range(kw):
            dxp[:, :, i:i + sh * ho:sh, j:j + sw * wo:sw] += dcols[:, :, :, :, i, j]
    return dxp[:, :, pt:pt + H, pl:pl + W]


def _check_4d(x: Tensor, what: str) -> None:
    if x.data.ndim != 4:
        raise ShapeMismatchError(f"{what} expects NCHW input, got shape {x.shape}")


def conv2d(x: Tensor, w: Tensor, b: Tensor, stride=(1, 1), padding="same") -> Tensor:
    """Strided cross-correlation (no kernel flip), NCHW layout."""
    _check_4d(x, "conv2d")
    K, C, kh, kw = w.data.shape
    if x.data.shape[1] != C:
        raise ShapeMismatchError(
            f"conv2d channel mismatch: input {x.shape} has {x.data.shape[1]} channels, "
            f"kernel {w.shape} expects {C}")
    sh, sw = stride
    if sh < 1 or sw < 1:
        raise ConfigurationError(f"stride must be >= 1, got {stride}")
    _, pt, pb = _conv_geometry(x.data.shape[2], kh, sh, padding)
    _, pl, pr = _conv_geometry(x.data.shape[3], kw, sw, padding)
    pads = (pt, pb, pl, pr)
    y, cols = _conv_fwd(x.data, w.data, stride, pads)
    out = y + b.data.reshape(1, K, 1, 1)

    def backward(g):
        if x.requires_grad:
            x.accumulate_grad(_conv_dx(g, w.data, stride, pads, x.data.shape))
        if w.requires_grad:
            w.accumulate_grad(_conv_dw(cols, g, w.data.shape))
        if b.requires_grad:
            b.accumulate_grad(g.sum(axis=(0, 2, 3)))

    return Tensor._wrap(out, (x, w, b), backward)


def tconv2d(x: Tensor, w: Tensor, b: Tensor, out_hw: tuple[int, int],
            stride=(1, 1), padding="same") -> Tensor:
    """Transposed convolution: the adjoint of conv2d(·; w, stride, padding)
    mapping conv outputs back onto a declared input grid of spatial size out_hw.
    Kernel layout (in_ch, out_ch, kh, kw); bias is per output channel."""
    _check_4d(x, "tconv2d")
    K, C, kh, kw = w.data.shape
    if x.data.shape[1] != K:
        raise ShapeMismatchError(
            f"tconv2d channel mismatch: input {x.shape} has {x.data.shape[1]} channels, "
            f"kernel {w.shape} expects {K}")
    ho, pt, pb = _conv_geometry(out_hw[0], kh, stride[0], padding)
    wo, pl, pr = _conv_geometry(out_hw[1], kw, stride[1], padding)
    if (ho, wo) != tuple(x.data.shape[2:]):
        raise ShapeMismatchError(
            f"tconv2d input spatial shape {tuple(x.data.shape[2:])} does not match the "
            f"adjoint conv output {(ho, wo)} for target {tuple(out_hw)}")
    pads = (pt, pb, pl, pr)
    full_shape = (x.data.shape[0], C, out_hw[0], out_hw[1])
    y = _conv_dx(x.data, w.data, stride, pads, full_shape)
    out = y + b.data.reshape(1, C, 1, 1)

    def backward(g):
        if x.requires_grad:
            gx, _ = _conv_fwd(g, w.data, stride, pads)
            x.accumulate_grad(gx)
        if w.requires_grad:
            gp = np.pad(g, ((0, 0), (0, 0), (pads[0], pads[1]), (pads[2], pads[3]))) \
                if any(pads) else g
            cols = _im2col(gp, kh, kw, stride[0], stride[1])
            w.accumulate_grad(_conv_dw(cols, x.data, w.data.shape))
        if b.requires_grad:
            b.accumulate_grad(g.sum(axis=(0, 2, 3)))

    return Tensor._wrap(out, (x, w, b), backward)


def dense(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Affine map x @ w + b for (N, D) inputs."""
    if x.data.ndim != 2:
        raise ShapeMismatchError(f"dense expects (N, D) input, got {x.shape}")
    if x.data.shape[1] != w.data.shape[0]:
        raise ShapeMismatchError(f"dense shapes differ: input {x.shape} vs weight {w.shape}")
    return add(matmul(x, w), b)
