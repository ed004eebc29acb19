"""Corruption-supervised quality scoring of token sequences."""

from .checkpoint import load_checkpoint, load_params, save_checkpoint, save_params
from .corrupt import (
    CorruptionSpec,
    corrupt_sample,
    corrupt_tokens,
    fragment_swap,
    quality_target,
)
from .model import (
    RegressorConfig,
    RegressorParams,
    forward,
    forward_batch,
    init_params,
    loss_and_grad,
    param_shapes,
)
from .train import AdamW, TrainConfig, score_dataset, train

__all__ = [
    "AdamW",
    "CorruptionSpec",
    "RegressorConfig",
    "RegressorParams",
    "TrainConfig",
    "corrupt_sample",
    "corrupt_tokens",
    "forward",
    "forward_batch",
    "fragment_swap",
    "init_params",
    "load_checkpoint",
    "load_params",
    "loss_and_grad",
    "param_shapes",
    "quality_target",
    "save_checkpoint",
    "save_params",
    "score_dataset",
    "train",
]
