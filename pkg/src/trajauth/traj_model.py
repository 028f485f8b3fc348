"""Encoder-decoder forecaster mapping a 2D joint window to a 3D controller window.

Input/decoder tokens are the sum of a learned value embedding, a sinusoidal
positional table and a scalar global-time feature ``t / T - 0.5``. The
encoder is a stack of post-norm transformer layers. Two decoder modes exist:

``full``
    the decoder consumes the complete input window (re-embedded with its own
    weights) and a flatten -> linear head emits all ``w`` output samples at once.
``informer``
    the decoder consumes the trailing ``floor(w_in / 2)`` input samples
    followed by zero slots for the future, and a per-token projection emits
    ``w - ceil(w_in / 2)`` samples (used by the 3D -> 3D baseline).
"""
from __future__ import annotations

import numpy as np

from .config import TrajConfig
from .errors import ShapeError
from .nn import functional as F
from .nn.module import LayerNorm, Linear, Module, MultiHeadAttention
from .nn.tensor import Tensor, as_tensor, concat, reshape


def positional_encoding(L: int, d_model: int) -> np.ndarray:
    return F.positional_table(L, d_model)


def temporal_encoding(start, L: int, t_total: int = 135) -> np.ndarray:
    """Global-time feature ``(start + j) / t_total - 0.5`` as ``(B, L, 1)`` (or ``(L, 1)`` for scalar start)."""
    starts = np.atleast_1d(np.asarray(start))
    if np.any(starts < 0) or np.any(starts + L > t_total):
        raise ShapeError(f"window [start, start + {L}) exceeds the trial length {t_total}")
    te = (starts[:, None] + np.arange(L)[None, :]) / t_total - 0.5
    te = te[..., None]
    return te[0] if np.ndim(start) == 0 else te


class FeedForward(Module):
    def __init__(self, d_model, d_ffn, rng, dtype):
        self.fc1 = Linear(d_model, d_ffn, rng, dtype)
        self.fc2 = Linear(d_ffn, d_model, rng, dtype)

    def __call__(self, x):
        return self.fc2(F.relu(self.fc1(x)))


class EncoderLayer(Module):
    def __init__(self, cfg: TrajConfig, rng, dtype):
        self.attn = MultiHeadAttention(cfg.d_model, cfg.n_head, cfg.d_k, rng, dtype)
        self.norm1 = LayerNorm(cfg.d_model, dtype)
        self.ffn = FeedForward(cfg.d_model, cfg.d_ffn, rng, dtype)
        self.norm2 = LayerNorm(cfg.d_model, dtype)

    def __call__(self, x):
        x = self.norm1(x + self.attn(x, x, x))
        return self.norm2(x + self.ffn(x))


class DecoderLayer(Module):
    def __init__(self, cfg: TrajConfig, rng, dtype):
        self.self_attn = MultiHeadAttention(cfg.d_model, cfg.n_head, cfg.d_k, rng, dtype)
        self.norm1 = LayerNorm(cfg.d_model, dtype)
        self.cross_attn = MultiHeadAttention(cfg.d_model, cfg.n_head, cfg.d_k, rng, dtype)
        self.norm2 = LayerNorm(cfg.d_model, dtype)
        self.ffn = FeedForward(cfg.d_model, cfg.d_ffn, rng, dtype)
        self.norm3 = LayerNorm(cfg.d_model, dtype)

    def __call__(self, x, memory):
        x = self.norm1(x + self.self_attn(x, x, x, causal=True))
        x = self.norm2(x + self.cross_attn(x, memory, memory))
        return self.norm3(x + self.ffn(x))


class TrajModel(Module):
    def __init__(self, cfg: TrajConfig, seed: int = 0, dtype=np.float32):
        rng = np.random.default_rng(seed)
        self.cfg = cfg
        self.dtype = np.dtype(dtype)
        self.enc_embed = Linear(cfg.in_features, cfg.d_model, rng, dtype)
        self.dec_embed = Linear(cfg.in_features, cfg.d_model, rng, dtype)
        self.encoder = [EncoderLayer(cfg, rng, dtype) for _ in range(cfg.n_enc_layers)]
        self.decoder = [DecoderLayer(cfg, rng, dtype) for _ in range(cfg.n_dec_layers)]
        if cfg.decoder == "full":
            self.head = Linear(cfg.w_in * cfg.d_model, cfg.w * cfg.out_channels, rng, dtype)
        else:
            self.head = Linear(cfg.d_model, cfg.out_channels, rng, dtype)

    # -- pieces ---------------------------------------------------------------
    def _flatten_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 4:  # (B, L, n_in, 2)
            x = x.reshape(x.shape[0], x.shape[1], -1)
        if x.ndim != 3 or x.shape[2] != self.cfg.in_features:
            raise ShapeError(
                f"expected input (B, {self.cfg.w_in}, {self.cfg.in_features} features), got {x.shape}"
            )
        return x

    def embed(self, layer: Linear, x: np.ndarray, starts: np.ndarray) -> Tensor:
        """Value embedding + positional table + global-time feature, ``(B, L, d_model)``."""
        L = x.shape[1]
        pe = positional_encoding(L, self.cfg.d_model).astype(self.dtype)
        te = temporal_encoding(starts, L, self.cfg.t_total).astype(self.dtype)
        return layer(Tensor(x)) + pe + te

    def encode(self, x: np.ndarray, starts: np.ndarray) -> Tensor:
        h = self.embed(self.enc_embed, x, starts)
        for layer in self.encoder:
            h = layer(h)
        return h

    def decode(self, memory: Tensor, x: np.ndarray, starts: np.ndarray) -> Tensor:
        cfg = self.cfg
        B = x.shape[0]
        if cfg.decoder == "full":
            h = self.embed(self.dec_embed, x, starts)
        else:
            keep = cfg.w_in - cfg.overlap
            tail = x[:, keep:, :]
            zeros = np.zeros((B, cfg.w - cfg.w_in, x.shape[2]), dtype=self.dtype)
            h = self.embed(self.dec_embed, np.concatenate([tail, zeros], axis=1), starts + keep)
        for layer in self.decoder:
            h = layer(h, memory)
        if cfg.decoder == "full":
            flat = reshape(h, (B, cfg.w_in * cfg.d_model))
            return reshape(self.head(flat), (B, cfg.w, cfg.out_channels))
        return self.head(h)

    def __call__(self, x, starts) -> Tensor:
        """``(B, w_in, n_in, 2)`` or ``(B, w_in, features)`` -> ``(B, out_len, out_channels)``."""
        x = self._flatten_input(x)
        starts = np.asarray(starts, dtype=np.int64).reshape(-1)
        if starts.size == 1 and x.shape[0] > 1:
            starts = np.repeat(starts, x.shape[0])
        memory = self.encode(x, starts)
        return self.decode(memory, x, starts)

    def forward_single(self, x: np.ndarray, start: int) -> Tensor:
        """Unbatched convenience: ``(w_in, n_in, 2)`` -> ``(out_len, out_channels)``."""
        out = self(np.asarray(x)[None], np.array([start]))
        return reshape(out, out.shape[1:])


def expected_param_count(cfg: TrajConfig) -> int:
    """Closed-form trainable parameter count for a :class:`TrajConfig`."""
    d, hd, f = cfg.d_model, cfg.n_head * cfg.d_k, cfg.d_ffn
    attn = 3 * (d * hd + hd) + (hd * d + d)
    ffn = (d * f + f) + (f * d + d)
    ln = 2 * d
    enc_layer = attn + ffn + 2 * ln
    dec_layer = 2 * attn + ffn + 3 * ln
    embed = 2 * (cfg.in_features * d + d)
    if cfg.decoder == "full":
        head = cfg.w_in * d * cfg.w * cfg.out_channels + cfg.w * cfg.out_channels
    else:
        head = d * cfg.out_channels + cfg.out_channels
    return embed + cfg.n_enc_layers * enc_layer + cfg.n_dec_layers * dec_layer + head


def li_auth_input(observed3d: np.ndarray, prediction: Tensor, w_in: int) -> Tensor:
    """Observed samples before the decoder overlap, followed by the baseline's prediction.

    ``observed3d`` is ``(B, w_in, 3)``; the result has length exactly ``w``.
    """
    keep = w_in - w_in // 2
    head = as_tensor(np.asarray(observed3d[:, :keep, :], dtype=prediction.dtype))
    return concat([head, prediction], axis=1)
