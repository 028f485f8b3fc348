"""Parameters and a tiny module tree with named traversal."""
from __future__ import annotations

from typing import Iterator

import numpy as np

from .tensor import Tensor


class Param(Tensor):
    """Trainable leaf tensor carrying its own Adam moments."""

    __slots__ = ("adam_m", "adam_v", "step_count")

    def __init__(self, data, name: str | None = None):
        super().__init__(np.array(data, copy=True), requires_grad=True, name=name)
        self.adam_m = np.zeros_like(self.data)
        self.adam_v = np.zeros_like(self.data)
        self.step_count = 0


def uniform_fan_in(rng: np.random.Generator, shape, fan_in: int, dtype) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Module:
    """Base class: attributes that are Params, Modules or lists of Modules form the tree.

    Non-trainable state (batch-norm running statistics) is registered in
    ``self._buffers`` so it travels with checkpoints.
    """

    training: bool = True

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Param]]:
        for key, val in vars(self).items():
            if key.startswith("_"):
                continue
            name = f"{prefix}{key}"
            if isinstance(val, Param):
                yield name, val
            elif isinstance(val, Module):
                yield from val.named_parameters(name + ".")
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{i}.")

    def parameters(self) -> list[Param]:
        return [p for _, p in self.named_parameters()]

    def named_buffers(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
        for key, arr in getattr(self, "_buffers", {}).items():
            yield f"{prefix}{key}", arr
        for key, val in vars(self).items():
            if key.startswith("_"):
                continue
            name = f"{prefix}{key}"
            if isinstance(val, Module):
                yield from val.named_buffers(name + ".")
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        yield from item.named_buffers(f"{name}.{i}.")

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def train(self, mode: bool = True) -> "Module":
        self.training = mode
        for _, val in vars(self).items():
            if isinstance(val, Module):
                val.train(mode)
            elif isinstance(val, (list, tuple)):
                for item in val:
                    if isinstance(item, Module):
                        item.train(mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def num_parameters(self) -> int:
        return sum(p.data.size for p in self.parameters())

    def state_dict(self) -> dict[str, np.ndarray]:
        state = {name: p.data for name, p in self.named_parameters()}
        state.update({name: arr for name, arr in self.named_buffers()})
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = dict(self.named_parameters())
        buffers = dict(self.named_buffers())
        missing = (set(params) | set(buffers)) - set(state)
        if missing:
            raise KeyError(f"state is missing entries: {sorted(missing)}")
        for name, p in params.items():
            if state[name].shape != p.data.shape:
                raise ValueError(f"{name}: shape {state[name].shape} != {p.data.shape}")
            p.data[...] = state[name]
        for name, arr in buffers.items():
            arr[...] = state[name]


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, dtype=np.float32):
        self.weight = Param(uniform_fan_in(rng, (d_in, d_out), d_in, dtype))
        self.bias = Param(uniform_fan_in(rng, (d_out,), d_in, dtype))

    def __call__(self, x: Tensor) -> Tensor:
        from .functional import linear

        return linear(x, self.weight, self.bias)


class LayerNorm(Module):
    def __init__(self, d: int, dtype=np.float32):
        self.gamma = Param(np.ones(d, dtype=dtype))
        self.beta = Param(np.zeros(d, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        from .functional import layer_norm

        return layer_norm(x, self.gamma, self.beta)


class BatchNorm1d(Module):
    def __init__(self, channels: int, momentum: float = 0.1, dtype=np.float32):
        self.gamma = Param(np.ones(channels, dtype=dtype))
        self.beta = Param(np.zeros(channels, dtype=dtype))
        self.momentum = momentum
        self._buffers = {
            "running_mean": np.zeros(channels, dtype=dtype),
            "running_var": np.ones(channels, dtype=dtype),
        }

    @property
    def running_mean(self) -> np.ndarray:
        return self._buffers["running_mean"]

    @property
    def running_var(self) -> np.ndarray:
        return self._buffers["running_var"]

    def __call__(self, x: Tensor) -> Tensor:
        from .functional import batch_norm1d

        return batch_norm1d(
            x, self.gamma, self.beta, self.running_mean, self.running_var,
            training=self.training, momentum=self.momentum,
        )


class Conv1d(Module):
    def __init__(self, c_in: int, c_out: int, kernel: int, rng: np.random.Generator, dtype=np.float32):
        fan_in = c_in * kernel
        self.weight = Param(uniform_fan_in(rng, (c_out, c_in, kernel), fan_in, dtype))
        self.bias = Param(uniform_fan_in(rng, (c_out,), fan_in, dtype))

    def __call__(self, x: Tensor) -> Tensor:
        from .functional import conv1d

        return conv1d(x, self.weight, self.bias)


class MultiHeadAttention(Module):
    def __init__(self, d_model: int, n_head: int, d_k: int, rng: np.random.Generator, dtype=np.float32):
        hd = n_head * d_k
        self.n_head = n_head
        self.q = Linear(d_model, hd, rng, dtype)
        self.k = Linear(d_model, hd, rng, dtype)
        self.v = Linear(d_model, hd, rng, dtype)
        self.o = Linear(hd, d_model, rng, dtype)

    def param_dict(self) -> dict[str, Tensor]:
        return {
            "wq": self.q.weight, "bq": self.q.bias,
            "wk": self.k.weight, "bk": self.k.bias,
            "wv": self.v.weight, "bv": self.v.bias,
            "wo": self.o.weight, "bo": self.o.bias,
        }

    def __call__(self, q_in, k_in, v_in, causal: bool = False, return_weights: bool = False):
        from .functional import multi_head_attention

        return multi_head_attention(
            q_in, k_in, v_in, self.param_dict(), self.n_head,
            causal=causal, return_weights=return_weights,
        )
