from __future__ import annotations

from typing import Iterable

import numpy as np

from ..errors import NumericalError
from .module import Param


class Adam:
    """Adam with bias correction; moments live on each :class:`Param`."""

    def __init__(
        self,
        params: Iterable[tuple[str, Param]] | Iterable[Param],
        lr: float = 1e-4,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        items = list(params)
        if items and not isinstance(items[0], tuple):
            items = [(p.name or f"param{i}", p) for i, p in enumerate(items)]
        self.named = items
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps

    def zero_grad(self) -> None:
        for _, p in self.named:
            p.zero_grad()

    def step(self) -> None:
        for name, p in self.named:
            if not np.all(np.isfinite(p.grad)):
                raise NumericalError(f"non-finite gradient in parameter {name!r}")
        b1, b2 = self.beta1, self.beta2
        for _, p in self.named:
            g = p.grad
            p.step_count += 1
            t = p.step_count
            p.adam_m *= b1
            p.adam_m += (1.0 - b1) * g
            p.adam_v *= b2
            p.adam_v += (1.0 - b2) * (g * g)
            m_hat = p.adam_m / (1.0 - b1**t)
            v_hat = p.adam_v / (1.0 - b2**t)
            p.data -= (self.lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(p.data.dtype)
