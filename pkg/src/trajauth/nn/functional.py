"""Differentiable layer primitives used by both models.

Each op computes its forward in numpy and registers a hand-written backward.
Fused ops (softmax, layer norm, batch norm, conv, losses) keep the graph small.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ShapeError
from . import kernels
from .tensor import Tensor, as_tensor, make_result, matmul, reshape, transpose, unbroadcast

BN_EPS = 1e-5
LN_EPS = 1e-5
PROB_CLAMP = 1e-7


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """``x @ w + b`` over the last axis; ``w`` is ``(d_in, d_out)``."""
    if x.shape[-1] != w.shape[0]:
        raise ShapeError(f"linear: input {x.shape} does not conform to weight {w.shape}")
    y = matmul(x, w)
    if b is not None:
        if b.shape != (w.shape[1],):
            raise ShapeError(f"linear: bias {b.shape} does not match weight {w.shape}")
        y = y + b
    return y


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return make_result(np.where(mask, x.data, 0).astype(x.dtype), (x,), lambda g: (g * mask,))


def softmax(x: Tensor, axis: int = -1, mask: np.ndarray | None = None) -> Tensor:
    """Max-subtracted softmax. ``mask`` marks disallowed entries (exact zeros out)."""
    z = x.data
    if mask is not None:
        z = np.where(mask, -np.inf, z)
    z = z - np.max(z, axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / np.sum(e, axis=axis, keepdims=True)

    def fn(g):
        return (y * (g - np.sum(g * y, axis=axis, keepdims=True)),)

    return make_result(y, (x,), fn)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = LN_EPS) -> Tensor:
    xd = x.data
    mu = xd.mean(axis=-1, keepdims=True)
    xc = xd - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    gd, d = gamma.data, xd.shape[-1]

    def fn(g):
        dxhat = g * gd
        dx = inv * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                    - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
        dgamma = (g * xhat).reshape(-1, d).sum(axis=0)
        dbeta = g.reshape(-1, d).sum(axis=0)
        return dx, dgamma, dbeta

    return make_result(xhat * gd + beta.data, (x, gamma, beta), fn)


def same_padding(k: int) -> tuple[int, int]:
    """Left/right zero padding that preserves length; even kernels pad more on the left."""
    return k // 2, (k - 1) // 2


def conv1d(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """Same-padded 1D convolution (cross-correlation). ``x`` is ``(N, C_in, L)``."""
    if x.ndim != 3:
        raise ShapeError(f"conv1d expects (N, C, L), got {x.shape}")
    if x.shape[2] < 1:
        raise ShapeError("conv1d: temporal length must be >= 1")
    if x.shape[1] != w.shape[1]:
        raise ShapeError(f"conv1d: input channels {x.shape} vs weight {w.shape}")
    k = w.shape[2]
    left, right = same_padding(k)
    xpad = np.pad(x.data, ((0, 0), (0, 0), (left, right)))
    L = x.shape[2]
    y = kernels.conv1d_forward(xpad, w.data)
    if b is not None:
        y = y + b.data[None, :, None]

    def fn(g):
        dxpad, dw = kernels.conv1d_backward(xpad, w.data, g)
        db = g.sum(axis=(0, 2)) if b is not None else None
        return dxpad[:, :, left : left + L], dw, db

    parents = (x, w) if b is None else (x, w, b)
    return make_result(y.astype(x.dtype, copy=False), parents, fn)


def batch_norm1d(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = 0.1,
    eps: float = BN_EPS,
) -> Tensor:
    """Per-channel normalisation of ``(N, C, L)``; running stats are updated in place when training."""
    xd = x.data
    gd = gamma.data[None, :, None]
    bd = beta.data[None, :, None]
    if not training:
        inv = 1.0 / np.sqrt(running_var + eps)
        scale = (gamma.data * inv)[None, :, None]
        shift = (beta.data - running_mean * gamma.data * inv)[None, :, None]
        xhat = (xd - running_mean[None, :, None]) * inv[None, :, None]

        def fn_eval(g):
            return g * scale, (g * xhat).sum(axis=(0, 2)), g.sum(axis=(0, 2))

        return make_result((xd * scale + shift).astype(xd.dtype), (x, gamma, beta), fn_eval)

    m = xd.shape[0] * xd.shape[2]
    mu = xd.mean(axis=(0, 2))
    xc = xd - mu[None, :, None]
    var = (xc * xc).mean(axis=(0, 2))
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv[None, :, None]

    unbiased = var * m / (m - 1) if m > 1 else var
    running_mean *= 1.0 - momentum
    running_mean += momentum * mu
    running_var *= 1.0 - momentum
    running_var += momentum * unbiased

    def fn(g):
        dxhat = g * gd
        dx = inv[None, :, None] * (
            dxhat
            - dxhat.mean(axis=(0, 2), keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=(0, 2), keepdims=True)
        )
        return dx, (g * xhat).sum(axis=(0, 2)), g.sum(axis=(0, 2))

    return make_result(xhat * gd + bd, (x, gamma, beta), fn)


def global_avg_pool(x: Tensor) -> Tensor:
    """Mean over the last (time) axis: ``(..., C, L) -> (..., C)``."""
    return x.mean(axis=-1)


# ---------------------------------------------------------------------------
# attention


def causal_mask(lq: int, lk: int) -> np.ndarray:
    """True where position i must not attend to j (j > i)."""
    return np.triu(np.ones((lq, lk), dtype=bool), k=1)


def scaled_dot_attention(q: Tensor, k: Tensor, v: Tensor, mask: np.ndarray | None = None):
    """softmax(q kᵀ / √d_k) v over the last two axes. Returns (output, weights)."""
    dk = q.shape[-1]
    scores = matmul(q, transpose(k, _swap_last(k.ndim))) * (1.0 / np.sqrt(dk))
    weights = softmax(scores, axis=-1, mask=mask)
    return matmul(weights, v), weights


def _swap_last(ndim: int) -> tuple[int, ...]:
    axes = list(range(ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return tuple(axes)


def multi_head_attention(
    q_in: Tensor,
    k_in: Tensor,
    v_in: Tensor,
    params: dict[str, Tensor],
    n_head: int,
    causal: bool = False,
    return_weights: bool = False,
):
    """Project, split into ``n_head`` heads, attend, concatenate, project.

    Inputs are ``(L, d_model)`` or ``(B, L, d_model)``. ``params`` holds
    ``wq, bq, wk, bk, wv, bv, wo, bo`` with ``wq`` of shape
    ``(d_model, n_head * d_k)``.
    """
    d_model = q_in.shape[-1]
    hd = params["wq"].shape[1]
    if hd % n_head:
        raise ConfigError(f"projection width {hd} not divisible by n_head={n_head}")
    dk = hd // n_head
    squeeze = q_in.ndim == 2
    if squeeze:
        q_in, k_in, v_in = (reshape(t, (1,) + t.shape) for t in (q_in, k_in, v_in))
    B, lq, lk = q_in.shape[0], q_in.shape[1], k_in.shape[1]

    def heads(t, w, b, L):
        t = linear(t, params[w], params[b])
        return transpose(reshape(t, (B, L, n_head, dk)), (0, 2, 1, 3))

    q = heads(q_in, "wq", "bq", lq)
    k = heads(k_in, "wk", "bk", lk)
    v = heads(v_in, "wv", "bv", lk)
    mask = causal_mask(lq, lk) if causal else None
    out, weights = scaled_dot_attention(q, k, v, mask)
    out = reshape(transpose(out, (0, 2, 1, 3)), (B, lq, hd))
    out = linear(out, params["wo"], params["bo"])
    if out.shape[-1] != d_model:
        raise ShapeError("attention output projection must return d_model features")
    if squeeze:
        out = reshape(out, (lq, d_model))
    if return_weights:
        w = weights.data[0] if squeeze else weights.data
        return out, w
    return out


# ---------------------------------------------------------------------------
# losses


def mse_loss(pred: Tensor, target) -> Tensor:
    """Mean of squared error over every element."""
    t = target.data if isinstance(target, Tensor) else np.asarray(target, dtype=pred.dtype)
    if pred.shape != t.shape:
        raise ShapeError(f"mse_loss: prediction {pred.shape} vs target {t.shape}")
    diff = pred.data - t
    n = diff.size

    def fn(g):
        return (g * (2.0 / n) * diff,)

    return make_result(np.asarray(np.mean(diff * diff), dtype=pred.dtype), (pred,), fn)


def bce_loss(p: Tensor, labels) -> Tensor:
    """Mean binary cross-entropy of probabilities ``p`` against {0,1} labels.

    Probabilities are clamped to [1e-7, 1 - 1e-7] before the log; the clamp
    passes no gradient outside that interval.
    """
    y = np.asarray(labels, dtype=p.dtype).reshape(p.shape)
    pd = p.data
    pc = np.clip(pd, PROB_CLAMP, 1.0 - PROB_CLAMP)
    inside = (pd >= PROB_CLAMP) & (pd <= 1.0 - PROB_CLAMP)
    n = pd.size
    val = -np.mean(y * np.log(pc) + (1.0 - y) * np.log1p(-pc))

    def fn(g):
        d = -(y / pc - (1.0 - y) / (1.0 - pc)) / n
        return (g * d * inside,)

    return make_result(np.asarray(val, dtype=p.dtype), (p,), fn)


def positional_table(L: int, d_model: int) -> np.ndarray:
    """Sinusoidal table: sin on even dims, cos on odd dims, wavelength base 10000."""
    if L < 1:
        raise ShapeError("positional encoding needs L >= 1")
    pos = np.arange(L, dtype=np.float64)[:, None]
    i2 = np.arange(0, d_model, 2, dtype=np.float64)
    angle = pos / np.power(10000.0, i2 / d_model)
    pe = np.zeros((L, d_model))
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle[:, : d_model // 2])
    return pe


__all__ = [
    "linear",
    "relu",
    "softmax",
    "layer_norm",
    "conv1d",
    "same_padding",
    "batch_norm1d",
    "global_avg_pool",
    "causal_mask",
    "scaled_dot_attention",
    "multi_head_attention",
    "mse_loss",
    "bce_loss",
    "positional_table",
    "as_tensor",
    "unbroadcast",
]
