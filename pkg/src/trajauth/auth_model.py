"""Fully convolutional authenticator over a predicted trajectory."""
from __future__ import annotations

import numpy as np

from .config import AuthConfig
from .errors import ConfigError, ShapeError
from .nn import functional as F
from .nn.module import BatchNorm1d, Conv1d, Linear, Module
from .nn.tensor import Tensor, as_tensor, no_grad, transpose


class ConvBlock(Module):
    def __init__(self, c_in, c_out, k, rng, dtype):
        self.conv = Conv1d(c_in, c_out, k, rng, dtype)
        self.bn = BatchNorm1d(c_out, dtype=dtype)

    def __call__(self, x):
        return F.relu(self.bn(self.conv(x)))


class AuthModel(Module):
    """conv-bn-relu x3 -> global average pool -> linear -> softmax over (impostor, genuine)."""

    def __init__(self, cfg: AuthConfig, seed: int = 0, dtype=np.float32):
        rng = np.random.default_rng(seed)
        self.cfg = cfg
        self.dtype = np.dtype(dtype)
        chans = (cfg.in_channels,) + tuple(cfg.filters)
        self.blocks = [
            ConvBlock(chans[i], chans[i + 1], cfg.kernels[i], rng, dtype) for i in range(len(cfg.filters))
        ]
        self.classifier = Linear(cfg.filters[-1], cfg.n_classes, rng, dtype)

    def features(self, traj) -> Tensor:
        """``(B, w, C)`` -> pooled ``(B, filters[-1])``."""
        traj = as_tensor(traj, self.dtype)
        if traj.ndim != 3 or traj.shape[2] != self.cfg.in_channels:
            raise ShapeError(f"expected (B, w, {self.cfg.in_channels}), got {traj.shape}")
        if traj.shape[1] < max(self.cfg.kernels):
            raise ConfigError(f"window {traj.shape[1]} shorter than the largest kernel {max(self.cfg.kernels)}")
        h = transpose(traj, (0, 2, 1))
        for block in self.blocks:
            h = block(h)
        return F.global_avg_pool(h)

    def logits(self, traj) -> Tensor:
        return self.classifier(self.features(traj))

    def __call__(self, traj) -> Tensor:
        """Probabilities ``(B, 2)``: column 0 impostor, column 1 genuine."""
        return F.softmax(self.logits(traj), axis=-1)

    def decision_score(self, traj) -> np.ndarray:
        """Genuine-class probability in eval mode (no graph, no running-stat updates)."""
        was = self.training
        self.eval()
        try:
            with no_grad():
                p = self(traj).data[:, 1]
        finally:
            self.train(was)
        return p


def expected_param_count(cfg: AuthConfig) -> int:
    total, c_in = 0, cfg.in_channels
    for c_out, k in zip(cfg.filters, cfg.kernels):
        total += c_out * c_in * k + c_out + 2 * c_out
        c_in = c_out
    return total + c_in * cfg.n_classes + cfg.n_classes
