import numpy as np
import numpy.testing as npt
import pytest

from autospeed.exceptions import ConfigurationError
from autospeed.optim import SGD, Adam
from autospeed.tensor import Tensor


def scalar_adam_oracle(w0, grads, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Direct implementation of the bias-corrected update on one scalar."""
    w, m, v = w0, 0.0, 0.0
    trace = []
    for t, g in enumerate(grads, start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        m_hat = m / (1 - beta1 ** t)
        v_hat = v / (1 - beta2 ** t)
        w = w - lr * m_hat / (np.sqrt(v_hat) + eps)
        trace.append(w)
    return trace


def param(value):
    p = Tensor(np.asarray(value, dtype=np.float32), requires_grad=True)
    return p


class TestSGD:
    def test_single_step(self):
        p = param([1.0])
        p.grad = np.array([0.5], dtype=np.float32)
        SGD({"w": p}, lr=0.1).step()
        npt.assert_allclose(p.data, [0.95], rtol=1e-6)

    def test_zero_gradient_no_change(self):
        p = param([2.0, -3.0])
        p.grad = np.zeros(2, dtype=np.float32)
        SGD({"w": p}, lr=0.5).step()
        npt.assert_array_equal(p.data, [2.0, -3.0])

    def test_tensor_case_matches_loop(self):
        rng = np.random.default_rng(1)
        w0 = rng.standard_normal((3, 4)).astype(np.float32)
        g = rng.standard_normal((3, 4)).astype(np.float32)
        p = param(w0.copy())
        p.grad = g.copy()
        SGD({"w": p}, lr=0.01).step()
        expect = np.empty_like(w0)
        for i in range(3):
            for j in range(4):
                expect[i, j] = w0[i, j] - np.float32(0.01) * g[i, j]
        npt.assert_array_equal(p.data, expect)

    def test_rejects_nonpositive_lr(self):
        with pytest.raises(ConfigurationError):
            SGD({"w": param([1.0])}, lr=0.0)

    def test_preserves_shape(self):
        p = param(np.zeros((2, 5)))
        p.grad = np.ones((2, 5), dtype=np.float32)
        SGD({"w": p}, lr=0.1).step()
        assert p.data.shape == (2, 5)


class TestAdam:
    def test_first_step_magnitude_is_lr(self):
        # bias correction cancels: m_hat = g, v_hat = g^2, so |step| ~ lr
        for scale in (1e-3, 1.0, 1e3):
            p = param(np.zeros(4))
            p.grad = np.full(4, scale, dtype=np.float32)
            Adam({"w": p}, lr=0.1).step()
            npt.assert_allclose(np.abs(p.data), 0.1, rtol=1e-4)

    def test_zero_grad_zero_moments_no_change(self):
        p = param([1.5])
        p.grad = np.zeros(1, dtype=np.float32)
        Adam({"w": p}, lr=0.1).step()
        npt.assert_array_equal(p.data, [1.5])

    def test_three_step_trace_matches_scalar_oracle(self):
        expect = scalar_adam_oracle(0.0, [1.0, 1.0, 1.0], lr=0.1)
        # frozen from the oracle; with constant gradient each step is ~ -lr
        npt.assert_allclose(expect, [-0.1, -0.2, -0.3], atol=1e-7)
        p = param([0.0])
        opt = Adam({"w": p}, lr=0.1)
        for step in range(3):
            p.grad = np.ones(1, dtype=np.float32)
            opt.step()
            npt.assert_allclose(p.data[0], expect[step], rtol=1e-5)

    def test_rejects_bad_betas(self):
        with pytest.raises(ConfigurationError):
            Adam({"w": param([0.0])}, lr=0.1, beta1=1.0)

    def test_moments_match_param_shapes(self):
        p = param(np.zeros((2, 3)))
        opt = Adam({"w": p}, lr=0.1)
        assert opt.m["w"].shape == (2, 3) and opt.v["w"].shape == (2, 3)
        assert opt.t == 0
