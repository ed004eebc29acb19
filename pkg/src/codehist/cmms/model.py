"""Transformer regressor scoring token sequences in [0, 1].

A 2-layer pre-norm Transformer encoder over learned token embeddings with
fixed sinusoidal position encodings, mean-pooled and fed through a small MLP
head with a logistic output. Everything runs in float64 with hand-written
reverse-mode gradients so they can be checked against finite differences.

Parameter tensors live in an ordered dict; the key order below is also the
checkpoint serialization order:

    embed                               (K, d)
    layers.{i}.ln1.scale / .shift       (d,)
    layers.{i}.attn.wq/.wk/.wv/.wo      (d, d)   with biases (d,)
    layers.{i}.ln2.scale / .shift       (d,)
    layers.{i}.ff.w1 (d, 4d)  .b1 (4d,)  .w2 (4d, d)  .b2 (d,)
    head.w1 (d, mlp_hidden)  head.b1 (mlp_hidden,)
    head.w2 (mlp_hidden,)    head.b2 (1,)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import erf

from ..errors import NumericError

_LN_EPS = 1e-5
_INIT_STD = 0.02


@dataclass(frozen=True)
class RegressorConfig:
    """Architecture hyperparameters; d=64 is the test-scale build, 512 full."""

    codebook_size: int
    seq_len: int
    embed_dim: int = 512
    num_layers: int = 2
    num_heads: int = 8
    mlp_hidden: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.codebook_size < 2:
            raise ValueError("codebook size must be >= 2")
        if self.seq_len < 1:
            raise ValueError("sequence length must be >= 1")
        if self.embed_dim < 2 or self.embed_dim % 2:
            raise ValueError("embed_dim must be even and >= 2")
        if self.num_layers < 1:
            raise ValueError("need at least one layer")
        if self.embed_dim % self.num_heads:
            raise ValueError("embed_dim must divide evenly into heads")
        if self.mlp_hidden < 1:
            raise ValueError("mlp_hidden must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def param_shapes(config: RegressorConfig) -> dict:
    """Canonical tensor name -> shape map, in serialization order."""
    d = config.embed_dim
    shapes: dict = {"embed": (config.codebook_size, d)}
    for i in range(config.num_layers):
        p = f"layers.{i}."
        shapes[p + "ln1.scale"] = (d,)
        shapes[p + "ln1.shift"] = (d,)
        for name in ("wq", "wk", "wv", "wo"):
            shapes[p + "attn." + name] = (d, d)
        for name in ("bq", "bk", "bv", "bo"):
            shapes[p + "attn." + name] = (d,)
        shapes[p + "ln2.scale"] = (d,)
        shapes[p + "ln2.shift"] = (d,)
        shapes[p + "ff.w1"] = (d, 4 * d)
        shapes[p + "ff.b1"] = (4 * d,)
        shapes[p + "ff.w2"] = (4 * d, d)
        shapes[p + "ff.b2"] = (d,)
    shapes["head.w1"] = (d, config.mlp_hidden)
    shapes["head.b1"] = (config.mlp_hidden,)
    shapes["head.w2"] = (config.mlp_hidden,)
    shapes["head.b2"] = (1,)
    return shapes


class RegressorParams:
    """Ordered name -> float64 tensor map matching :func:`param_shapes`."""

    __slots__ = ("tensors",)

    def __init__(self, tensors: dict):
        self.tensors = tensors

    def __getitem__(self, key: str) -> np.ndarray:
        return self.tensors[key]

    def validate(self, config: RegressorConfig) -> None:
        shapes = param_shapes(config)
        if list(self.tensors) != list(shapes):
            raise ValueError("parameter names do not match the architecture")
        for name, shape in shapes.items():
            t = self.tensors[name]
            if t.shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {t.shape}")
            if not np.isfinite(t).all():
                raise ValueError(f"{name}: non-finite values")

    def copy(self) -> "RegressorParams":
        return RegressorParams({k: v.copy() for k, v in self.tensors.items()})


def init_params(config: RegressorConfig) -> RegressorParams:
    """Seeded initialization: N(0, 0.02) weights, zero biases, unit LN scales."""
    rng = np.random.default_rng(config.seed)
    tensors = {}
    for name, shape in param_shapes(config).items():
        if name.endswith(".scale"):
            tensors[name] = np.ones(shape)
        elif name.endswith((".shift", "b1", "b2", "bq", "bk", "bv", "bo")):
            tensors[name] = np.zeros(shape)
        else:
            tensors[name] = rng.normal(0.0, _INIT_STD, size=shape)
    return RegressorParams(tensors)


@lru_cache(maxsize=8)
def _position_encoding(seq_len: int, dim: int):
    """Interleaved sinusoidal encodings, shape (seq_len, dim), read-only."""
    pos = np.arange(seq_len, dtype=np.float64)[:, None]
    idx = np.arange(dim // 2, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, 2.0 * idx / dim)
    pe = np.zeros((seq_len, dim))
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle)
    pe.setflags(write=False)
    return pe


def _gelu(x):
    """Exact Gaussian-CDF form: x * Phi(x)."""
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


def _gelu_grad(x):
    phi = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return 0.5 * (1.0 + erf(x / math.sqrt(2.0))) + x * phi


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _layernorm_forward(x, scale, shift):
    mean = x.mean(axis=-1, keepdims=True)
    centered = x - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _LN_EPS)
    norm = centered * inv
    return norm * scale + shift, (norm, inv)


def _layernorm_backward(dy, cache, scale):
    norm, inv = cache
    dnorm = dy * scale
    dx = inv * (
        dnorm
        - dnorm.mean(axis=-1, keepdims=True)
        - norm * (dnorm * norm).mean(axis=-1, keepdims=True)
    )
    dscale = (dy * norm).sum(axis=tuple(range(dy.ndim - 1)))
    dshift = dy.sum(axis=tuple(range(dy.ndim - 1)))
    return dx, dscale, dshift


def _split_heads(x, heads):
    b, n, d = x.shape
    return x.reshape(b, n, heads, d // heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, h, n, hd = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, n, h * hd)


def _forward(params: RegressorParams, config: RegressorConfig, ids: np.ndarray,
             want_cache: bool):
    t = params.tensors
    heads = config.num_heads
    head_dim = config.embed_dim // heads
    att_scale = 1.0 / math.sqrt(head_dim)
    x = t["embed"][ids] + _position_encoding(config.seq_len, config.embed_dim)[None]
    layer_caches = []
    for i in range(config.num_layers):
        p = f"layers.{i}."
        attn_in = x
        normed1, ln1_cache = _layernorm_forward(attn_in, t[p + "ln1.scale"], t[p + "ln1.shift"])
        q = _split_heads(normed1 @ t[p + "attn.wq"] + t[p + "attn.bq"], heads)
        k = _split_heads(normed1 @ t[p + "attn.wk"] + t[p + "attn.bk"], heads)
        v = _split_heads(normed1 @ t[p + "attn.wv"] + t[p + "attn.bv"], heads)
        scores = q @ k.transpose(0, 1, 3, 2) * att_scale
        scores -= scores.max(axis=-1, keepdims=True)
        att = np.exp(scores)
        att /= att.sum(axis=-1, keepdims=True)
        context = _merge_heads(att @ v)
        x = attn_in + context @ t[p + "attn.wo"] + t[p + "attn.bo"]
        ff_in = x
        normed2, ln2_cache = _layernorm_forward(ff_in, t[p + "ln2.scale"], t[p + "ln2.shift"])
        pre1 = normed2 @ t[p + "ff.w1"] + t[p + "ff.b1"]
        hidden = _gelu(pre1)
        x = ff_in + hidden @ t[p + "ff.w2"] + t[p + "ff.b2"]
        if want_cache:
            layer_caches.append(
                (normed1, ln1_cache, q, k, v, att, context, normed2, ln2_cache, pre1, hidden)
            )
    pooled = x.mean(axis=1)
    head_pre = pooled @ t["head.w1"] + t["head.b1"]
    head_act = _gelu(head_pre)
    logit = head_act @ t["head.w2"] + t["head.b2"][0]
    score = _sigmoid(logit)
    cache = (ids, x, layer_caches, pooled, head_pre, head_act, logit, score)
    return score, cache if want_cache else None


def forward(params: RegressorParams, config: RegressorConfig, seq: np.ndarray) -> float:
    """Score a single token sequence in [0, 1]."""
    ids = np.asarray(seq)
    if ids.ndim != 1 or ids.shape[0] != config.seq_len:
        raise ValueError(f"sequence must have length {config.seq_len}")
    score, _ = _forward(params, config, ids[None], want_cache=False)
    return float(score[0])


def forward_batch(params: RegressorParams, config: RegressorConfig, ids: np.ndarray) -> np.ndarray:
    """Score a (batch, seq_len) id array; returns (batch,) scores."""
    ids = np.asarray(ids)
    if ids.ndim != 2 or ids.shape[1] != config.seq_len:
        raise ValueError(f"ids must be (batch, {config.seq_len})")
    score, _ = _forward(params, config, ids, want_cache=False)
    return score


def loss_and_grad(params: RegressorParams, config: RegressorConfig,
                  ids: np.ndarray, targets: np.ndarray):
    """Mean squared error over a batch and its exact parameter gradients.

    Returns ``(loss, grads)`` with ``grads`` keyed like the parameters.
    Raises :class:`NumericError` if the loss is not finite.
    """
    ids = np.asarray(ids)
    targets = np.asarray(targets, dtype=np.float64)
    if ids.ndim != 2 or ids.shape[1] != config.seq_len:
        raise ValueError(f"ids must be (batch, {config.seq_len})")
    if targets.shape != (ids.shape[0],):
        raise ValueError("targets must be (batch,)")
    t = params.tensors
    heads = config.num_heads
    att_scale = 1.0 / math.sqrt(config.embed_dim // heads)
    batch = ids.shape[0]

    score, cache = _forward(params, config, ids, want_cache=True)
    _, x_final, layer_caches, pooled, head_pre, head_act, logit, _ = cache
    loss = float(np.mean((score - targets) ** 2))
    if not math.isfinite(loss):
        raise NumericError("regressor loss is not finite")

    grads = {name: np.zeros_like(tensor) for name, tensor in t.items()}

    dscore = 2.0 * (score - targets) / batch
    dlogit = dscore * score * (1.0 - score)
    grads["head.w2"][:] = head_act.T @ dlogit
    grads["head.b2"][0] = dlogit.sum()
    dhead_act = dlogit[:, None] * t["head.w2"][None, :]
    dhead_pre = dhead_act * _gelu_grad(head_pre)
    grads["head.w1"][:] = pooled.T @ dhead_pre
    grads["head.b1"][:] = dhead_pre.sum(axis=0)
    dpooled = dhead_pre @ t["head.w1"].T
    dx = np.broadcast_to(dpooled[:, None, :] / config.seq_len,
                         (batch, config.seq_len, config.embed_dim)).copy()

    for i in reversed(range(config.num_layers)):
        p = f"layers.{i}."
        (normed1, ln1_cache, q, k, v, att, context,
         normed2, ln2_cache, pre1, hidden) = layer_caches[i]
        d = config.embed_dim
        # feed-forward block: x = ff_in + gelu(ln(ff_in) @ w1 + b1) @ w2 + b2
        dff_out = dx
        grads[p + "ff.w2"][:] = hidden.reshape(-1, 4 * d).T @ dff_out.reshape(-1, d)
        grads[p + "ff.b2"][:] = dff_out.sum(axis=(0, 1))
        dhidden = dff_out @ t[p + "ff.w2"].T
        dpre1 = dhidden * _gelu_grad(pre1)
        grads[p + "ff.w1"][:] = normed2.reshape(-1, d).T @ dpre1.reshape(-1, 4 * d)
        grads[p + "ff.b1"][:] = dpre1.sum(axis=(0, 1))
        dnormed2 = dpre1 @ t[p + "ff.w1"].T
        dln2_in, dscale2, dshift2 = _layernorm_backward(dnormed2, ln2_cache, t[p + "ln2.scale"])
        grads[p + "ln2.scale"][:] = dscale2
        grads[p + "ln2.shift"][:] = dshift2
        dx = dx + dln2_in
        # attention block: x = attn_in + (merge(att @ v)) @ wo + bo
        dattn_out = dx
        grads[p + "attn.wo"][:] = context.reshape(-1, d).T @ dattn_out.reshape(-1, d)
        grads[p + "attn.bo"][:] = dattn_out.sum(axis=(0, 1))
        dcontext = _split_heads(dattn_out @ t[p + "attn.wo"].T, heads)
        datt = dcontext @ v.transpose(0, 1, 3, 2)
        dv = att.transpose(0, 1, 3, 2) @ dcontext
        dscores = att * (datt - (datt * att).sum(axis=-1, keepdims=True))
        dq = dscores @ k * att_scale
        dk = dscores.transpose(0, 1, 3, 2) @ q * att_scale
        dq, dk, dv = _merge_heads(dq), _merge_heads(dk), _merge_heads(dv)
        flat1 = normed1.reshape(-1, d)
        grads[p + "attn.wq"][:] = flat1.T @ dq.reshape(-1, d)
        grads[p + "attn.bq"][:] = dq.sum(axis=(0, 1))
        grads[p + "attn.wk"][:] = flat1.T @ dk.reshape(-1, d)
        grads[p + "attn.bk"][:] = dk.sum(axis=(0, 1))
        grads[p + "attn.wv"][:] = flat1.T @ dv.reshape(-1, d)
        grads[p + "attn.bv"][:] = dv.sum(axis=(0, 1))
        dnormed1 = dq @ t[p + "attn.wq"].T + dk @ t[p + "attn.wk"].T + dv @ t[p + "attn.wv"].T
        dln1_in, dscale1, dshift1 = _layernorm_backward(dnormed1, ln1_cache, t[p + "ln1.scale"])
        grads[p + "ln1.scale"][:] = dscale1
        grads[p + "ln1.shift"][:] = dshift1
        dx = dx + dln1_in

    np.add.at(grads["embed"], ids, dx)
    return loss, grads
