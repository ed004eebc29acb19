"""Corruption-supervised training loop for the quality regressor.

Each step draws a batch of clean sequences, corrupts every one with a fresh
recipe (p_uniform ~ U[0, 0.3]; with probability 0.3 an additional fragment
swap of fraction ~ U[0, 0.15]; optional per-sequence pixel severities folded
in when the corpus carries them), and regresses the score onto
exp(-20 * p_eff) under MSE with AdamW. All randomness flows from the config
seed, so identical runs produce bit-identical parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericError
from ..token_io import TokenDataset
from .corrupt import P_CAP, CorruptionSpec, corrupt_sample
from .model import RegressorConfig, RegressorParams, forward_batch, init_params, loss_and_grad

_SWAP_PROB = 0.3
_SWAP_MAX = 0.15


@dataclass(frozen=True)
class TrainConfig:
    """Optimization hyperparameters; defaults are the full-scale recipe.

    The test-scale recipe used in CI shrinks batch_size to 32 and epochs to
    at most 20 (and typically raises the learning rate to compensate).
    """

    learning_rate: float = 1e-4
    weight_decay: float = 0.01
    batch_size: int = 512
    epochs: int = 200
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("learning_rate, batch_size, epochs must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")
        if self.eps <= 0 or self.weight_decay < 0:
            raise ValueError("eps must be positive and weight_decay non-negative")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


class AdamW:
    """Decoupled weight decay Adam; decays matrices only, not 1-D tensors."""

    def __init__(self, params: RegressorParams, config: TrainConfig):
        self.config = config
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.tensors.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.tensors.items()}

    def step(self, params: RegressorParams, grads: dict) -> None:
        c = self.config
        self.step_count += 1
        bc1 = 1.0 - c.beta1 ** self.step_count
        bc2 = 1.0 - c.beta2 ** self.step_count
        for name, tensor in params.tensors.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= c.beta1
            m += (1.0 - c.beta1) * g
            v *= c.beta2
            v += (1.0 - c.beta2) * (g * g)
            update = (m / bc1) / (np.sqrt(v / bc2) + c.eps)
            if tensor.ndim >= 2:
                update = update + c.weight_decay * tensor
            tensor -= c.learning_rate * update


def _corrupt_batch(dataset: TokenDataset, indices, rng, severities):
    """Corrupted sequences and quality targets for one batch."""
    seqs = []
    targets = np.empty(len(indices))
    can_swap = dataset.layout is not None
    for row, idx in enumerate(indices):
        p_uniform = float(rng.uniform(0.0, P_CAP))
        swap = 0.0
        if can_swap and rng.random() < _SWAP_PROB:
            swap = float(rng.uniform(0.0, _SWAP_MAX))
        seed = int(rng.integers(0, 2**63))
        spec = CorruptionSpec(p_uniform=p_uniform, swap_fraction=swap, seed=seed)
        seq, target = corrupt_sample(
            dataset.tokens[idx], spec, dataset.codebook.size, layout=dataset.layout
        )
        if severities is not None:
            # pixel stage already applied upstream; fold its severity into the target
            p_eff = min(P_CAP, p_uniform + swap + float(severities[idx]))
            target = float(np.exp(-20.0 * p_eff))
        seqs.append(seq)
        targets[row] = target
    return np.stack(seqs), targets


def train(
    dataset: TokenDataset,
    train_config: TrainConfig,
    model_config: RegressorConfig,
    severities=None,
    log=None,
) -> RegressorParams:
    """Train a regressor on ``dataset``; returns the final parameters.

    ``severities`` (optional, one float per sequence) marks a corpus whose
    images were pixel-degraded before tokenization. ``log``, when given, is
    called with (epoch, mean_epoch_loss) after every epoch. Raises
    :class:`NumericError` on divergence.
    """
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    if dataset.seq_len != model_config.seq_len:
        raise ValueError(
            f"dataset seq_len {dataset.seq_len} != model seq_len {model_config.seq_len}"
        )
    if dataset.codebook.size != model_config.codebook_size:
        raise ValueError("dataset and model disagree on codebook size")
    if severities is not None and len(severities) != len(dataset):
        raise ValueError("severities must align with the dataset")

    params = init_params(model_config)
    optimizer = AdamW(params, train_config)
    rng = np.random.default_rng(train_config.seed)
    n = len(dataset)
    for epoch in range(train_config.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, train_config.batch_size):
            batch_idx = order[start:start + train_config.batch_size]
            ids, targets = _corrupt_batch(dataset, batch_idx, rng, severities)
            loss, grads = loss_and_grad(params, model_config, ids, targets)
            if not np.isfinite(loss):
                raise NumericError(f"training diverged at epoch {epoch + 1} (loss {loss})")
            optimizer.step(params, grads)
            losses.append(loss)
        if log is not None:
            log(epoch + 1, float(np.mean(losses)))
    params.validate(model_config)
    return params


def score_dataset(
    params: RegressorParams,
    config: RegressorConfig,
    dataset: TokenDataset,
    batch_size: int = 256,
) -> np.ndarray:
    """Per-sequence scores in [0, 1]; the mean is the model-level score."""
    if len(dataset) == 0:
        raise ValueError("cannot score an empty dataset")
    if dataset.seq_len != config.seq_len:
        raise ValueError(f"dataset seq_len {dataset.seq_len} != model seq_len {config.seq_len}")
    if dataset.codebook.size != config.codebook_size:
        raise ValueError("dataset and model disagree on codebook size")
    parts = [
        forward_batch(params, config, dataset.tokens[i:i + batch_size])
        for i in range(0, len(dataset), batch_size)
    ]
    return np.concatenate(parts)
