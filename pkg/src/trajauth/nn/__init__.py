"""Minimal differentiable toolkit: tensors, layers, reverse-mode gradients, Adam."""
from . import functional, kernels
from .checkpoint import load_checkpoint, save_checkpoint
from .module import BatchNorm1d, Conv1d, LayerNorm, Linear, Module, MultiHeadAttention, Param
from .optim import Adam
from .tensor import Tensor, as_tensor, backward, concat, no_grad

__all__ = [
    "Adam",
    "BatchNorm1d",
    "Conv1d",
    "LayerNorm",
    "Linear",
    "Module",
    "MultiHeadAttention",
    "Param",
    "Tensor",
    "as_tensor",
    "backward",
    "concat",
    "functional",
    "kernels",
    "load_checkpoint",
    "no_grad",
    "save_checkpoint",
]
