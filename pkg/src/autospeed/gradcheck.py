"""Central finite-difference verification of reverse-mode gradients."""

from __future__ import annotations

from .exceptions import ConfigurationError
from .tensor import Tensor, no_grad


def grad_check(loss_fn, params: dict[str, Tensor], eps: float = 1e-3) -> float:
    """Max over all parameter elements of the relative disagreement between
    the analytic gradient of loss_fn() and central finite differences.

    Relative error per element: |a - n| / max(|a|, |n|, 1e-8). loss_fn must be
    deterministic and rebuild its graph from `params` on every call. Run on
    float64 parameters to check the gradient formulas themselves rather than
    float32 rounding.
    """
    if not (1e-4 <= eps <= 1e-2):
        raise ConfigurationError(f"eps must lie in [1e-4, 1e-2], got {eps}")
    for p in params.values():
        p.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = {k: (p.grad.copy() if p.grad is not None else None) for k, p in params.items()}

    max_err = 0.0
    with no_grad():
        for name, p in params.items():
            a = analytic[name]
            flat = p.data.reshape(-1)
            a_flat = a.reshape(-1) if a is not None else None
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                up = loss_fn().item()
                flat[i] = orig - eps
                down = loss_fn().item()
                flat[i] = orig
                numeric = (up - down) / (2.0 * eps)
                analytic_i = float(a_flat[i]) if a_flat is not None else 0.0
                denom = max(abs(analytic_i), abs(numeric), 1e-8)
                max_err = max(max_err, abs(analytic_i - numeric) / denom)
    return max_err
