"""Central finite-difference oracle for gradient verification (float64)."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, backward


def numeric_grad(f: Callable[[], Tensor], x: Tensor, eps: float = 1e-6) -> np.ndarray:
    """Central differences of scalar ``f()`` w.r.t. every entry of ``x.data``."""
    g = np.zeros_like(x.data)
    flat = x.data.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + eps
        hi = f().item()
        flat[i] = old - eps
        lo = f().item()
        flat[i] = old
        gflat[i] = (hi - lo) / (2 * eps)
    return g


def relative_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-6) -> float:
    """||a - b|| / max(||a||, ||b||, floor).

    The floor keeps structurally-zero gradients (e.g. a key bias under
    softmax shift invariance) from turning finite-difference noise into a
    relative error of 1.
    """
    denom = max(np.linalg.norm(a), np.linalg.norm(b), floor)
    return float(np.linalg.norm(a - b) / denom)


def check_gradients(
    f: Callable[[], Tensor], inputs: Sequence[Tensor], eps: float = 1e-6
) -> list[float]:
    """Relative error between analytic and numeric gradients, one per input."""
    for x in inputs:
        x.zero_grad()
    backward(f())
    analytic = [x.grad.copy() for x in inputs]
    return [relative_error(a, numeric_grad(f, x, eps)) for a, x in zip(analytic, inputs)]


def check_directional(
    f: Callable[[], Tensor], inputs: Sequence[Tensor], rng: np.random.Generator, eps: float = 1e-6
) -> float:
    """Relative error of the gradient along one random direction over all ``inputs``.

    Compares ``sum_i <grad_i, v_i>`` with ``(f(x + eps v) - f(x - eps v)) / 2 eps``;
    two forward passes cover every parameter of a full model.
    """
    for x in inputs:
        x.zero_grad()
    backward(f())
    dirs = [rng.standard_normal(x.shape) for x in inputs]
    analytic = sum(float(np.sum(x.grad * v)) for x, v in zip(inputs, dirs))
    for x, v in zip(inputs, dirs):
        x.data += eps * v
    hi = f().item()
    for x, v in zip(inputs, dirs):
        x.data -= 2 * eps * v
    lo = f().item()
    for x, v in zip(inputs, dirs):
        x.data += eps * v
    numeric = (hi - lo) / (2 * eps)
    return relative_error(np.array([analytic]), np.array([numeric]))
