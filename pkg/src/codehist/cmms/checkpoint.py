"""Binary checkpoint format for the quality regressor.

Layout, little-endian: magic ``CHMM``, version byte ``0x01``, a config block
(u32 embed_dim, num_layers, num_heads, mlp_hidden, seq_len, codebook_size,
then u64 seed), followed by every parameter tensor as float64 in the
canonical order of :func:`codehist.cmms.model.param_shapes`. Save -> load
round trips are bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import (
    BAD_HEADER,
    BAD_MAGIC,
    BAD_VERSION,
    NON_FINITE,
    TRAILING,
    TRUNCATED,
    FormatError,
)
from .model import RegressorConfig, RegressorParams, param_shapes

CHECKPOINT_MAGIC = b"CHMM"
CHECKPOINT_VERSION = 1

_CONFIG_BLOCK = struct.Struct("<IIIIIIQ")


def save_params(params: RegressorParams, config: RegressorConfig, sink) -> int:
    """Write a checkpoint to a binary stream; returns the byte count."""
    params.validate(config)
    header = (
        CHECKPOINT_MAGIC
        + bytes([CHECKPOINT_VERSION])
        + _CONFIG_BLOCK.pack(
            config.embed_dim,
            config.num_layers,
            config.num_heads,
            config.mlp_hidden,
            config.seq_len,
            config.codebook_size,
            config.seed,
        )
    )
    sink.write(header)
    written = len(header)
    for name in param_shapes(config):
        payload = params.tensors[name].astype("<f8").tobytes()
        sink.write(payload)
        written += len(payload)
    return written


def load_params(source):
    """Read a checkpoint; returns ``(params, config)``, fully validated."""
    data = source.read()
    if len(data) < 4 or data[:4] != CHECKPOINT_MAGIC:
        raise FormatError(BAD_MAGIC, "not a CHMM checkpoint (bad magic)")
    if len(data) < 5:
        raise FormatError(TRUNCATED, "header cut off before version byte")
    if data[4] != CHECKPOINT_VERSION:
        raise FormatError(BAD_VERSION, f"unsupported CHMM version {data[4]}")
    head_end = 5 + _CONFIG_BLOCK.size
    if len(data) < head_end:
        raise FormatError(TRUNCATED, "header cut off before config block")
    embed_dim, num_layers, num_heads, mlp_hidden, seq_len, codebook, seed = (
        _CONFIG_BLOCK.unpack(data[5:head_end])
    )
    try:
        config = RegressorConfig(
            codebook_size=codebook,
            seq_len=seq_len,
            embed_dim=embed_dim,
            num_layers=num_layers,
            num_heads=num_heads,
            mlp_hidden=mlp_hidden,
            seed=seed,
        )
    except ValueError as exc:
        raise FormatError(BAD_HEADER, f"inconsistent config block: {exc}") from exc
    shapes = param_shapes(config)
    expected = head_end + 8 * sum(int(np.prod(s)) for s in shapes.values())
    if len(data) < expected:
        raise FormatError(TRUNCATED, "tensor payload cut off")
    if len(data) > expected:
        raise FormatError(TRAILING, f"{len(data) - expected} trailing bytes after tensors")
    tensors = {}
    offset = head_end
    for name, shape in shapes.items():
        count = int(np.prod(shape))
        block = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        tensors[name] = block.reshape(shape).copy()
        offset += count * 8
    params = RegressorParams(tensors)
    for name, tensor in tensors.items():
        if not np.isfinite(tensor).all():
            raise FormatError(NON_FINITE, f"tensor {name} contains non-finite values")
    return params, config


def save_checkpoint(params, config, path) -> int:
    with open(path, "wb") as fh:
        return save_params(params, config, fh)


def load_checkpoint(path):
    with open(path, "rb") as fh:
        return load_params(fh)
