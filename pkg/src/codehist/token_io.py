"""Token datasets, feature-vector sets, and their file formats.

Token sequences are 1-D integer arrays; a :class:`TokenDataset` stacks them
into one ``(count, seq_len)`` array together with the codebook size and an
optional 2-D grid layout.

Two binary containers, little-endian throughout:

``CHTK`` (token datasets)
    magic ``CHTK``, version byte ``0x01``, codebook size u32, sequence
    length u32, grid rows u32, grid cols u32 (both zero when the dataset has
    no spatial layout), sequence count u64, then token ids as u32
    sequence-major.

``CHFV`` (feature vectors)
    magic ``CHFV``, version byte ``0x01``, dimension u32, vector count u64,
    then float64 values row-major. Non-finite values are rejected on both
    read and write.

The text twin of CHTK opens with ``#chtk codebook=K seqlen=N grid=RxC``
(``grid=0x0`` when no layout) followed by one space-separated sequence per
line. Binary -> text -> binary round trips are bit-identical.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BAD_HEADER,
    BAD_LINE,
    BAD_MAGIC,
    BAD_TOKEN,
    BAD_VERSION,
    NON_FINITE,
    TOKEN_RANGE,
    TRAILING,
    TRUNCATED,
    FormatError,
)

TOKENS_MAGIC = b"CHTK"
FEATURES_MAGIC = b"CHFV"
FORMAT_VERSION = 1

_TOKEN_HEADER = struct.Struct("<IIIIQ")  # codebook, seq_len, rows, cols, count
_FEATURE_HEADER = struct.Struct("<IQ")  # dim, count


@dataclass(frozen=True)
class Codebook:
    """Discrete token vocabulary of a tokenizer; ``size`` is the number of ids."""

    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ValueError(f"codebook size must be >= 2, got {self.size}")


@dataclass(frozen=True)
class GridLayout:
    """Spatial arrangement of a token sequence as ``rows x cols``, row-major."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid dimensions must be positive, got {self.rows}x{self.cols}")

    @property
    def cells(self) -> int:
        return self.rows * self.cols


@dataclass
class TokenDataset:
    """A stack of equal-length token sequences over one codebook.

    ``tokens`` has shape ``(count, seq_len)`` with every id in
    ``[0, codebook.size)``. ``layout``, when present, satisfies
    ``rows * cols == seq_len``. A dataset may be empty; statistical
    operations reject empty datasets at their own call sites.
    """

    codebook: Codebook
    tokens: np.ndarray
    layout: GridLayout | None = None

    def __post_init__(self):
        tok = np.asarray(self.tokens)
        if tok.ndim != 2:
            raise ValueError(f"tokens must be 2-D (count, seq_len), got shape {tok.shape}")
        if tok.shape[1] < 1:
            raise ValueError("sequence length must be >= 1")
        if not np.issubdtype(tok.dtype, np.integer):
            raise ValueError(f"tokens must be integers, got dtype {tok.dtype}")
        tok = np.ascontiguousarray(tok, dtype=np.int64)
        if tok.size:
            lo, hi = int(tok.min()), int(tok.max())
            if lo < 0 or hi >= self.codebook.size:
                raise ValueError(
                    f"token ids must lie in [0, {self.codebook.size}), found [{lo}, {hi}]"
                )
        if self.layout is not None and self.layout.cells != tok.shape[1]:
            raise ValueError(
                f"layout {self.layout.rows}x{self.layout.cols} does not cover "
                f"seq_len {tok.shape[1]}"
            )
        self.tokens = tok

    @property
    def seq_len(self) -> int:
        return self.tokens.shape[1]

    def __len__(self) -> int:
        return self.tokens.shape[0]

    @property
    def sequences(self):
        """Iterate the rows of ``tokens`` as 1-D arrays."""
        return iter(self.tokens)

    def subset(self, indices) -> "TokenDataset":
        """Dataset of the rows at ``indices``, same codebook and layout."""
        return TokenDataset(self.codebook, self.tokens[np.asarray(indices)], self.layout)

    @classmethod
    def from_sequences(cls, codebook, sequences, layout=None, seq_len=None) -> "TokenDataset":
        """Build a dataset from an iterable of 1-D sequences.

        ``seq_len`` is required only when ``sequences`` is empty and no
        layout pins the length.
        """
        rows = [np.asarray(s) for s in sequences]
        if rows:
            n = rows[0].shape[0] if rows[0].ndim == 1 else -1
            for r in rows:
                if r.ndim != 1 or r.shape[0] != n:
                    raise ValueError("all sequences must be 1-D and share one length")
            tok = np.stack(rows).astype(np.int64)
        else:
            if seq_len is None:
                seq_len = layout.cells if layout is not None else None
            if seq_len is None:
                raise ValueError("empty dataset needs an explicit seq_len or a layout")
            tok = np.zeros((0, seq_len), dtype=np.int64)
        return cls(codebook, tok, layout)


@dataclass
class FeatureSet:
    """Real-valued feature vectors as one ``(count, dim)`` float64 array."""

    vectors: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vectors, dtype=np.float64)
        if vec.ndim != 2:
            raise ValueError(f"vectors must be 2-D (count, dim), got shape {vec.shape}")
        if vec.shape[1] < 1:
            raise ValueError("feature dimension must be >= 1")
        if not np.isfinite(vec).all():
            raise ValueError("feature vectors must be finite")
        self.vectors = np.ascontiguousarray(vec)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]


# ---------------------------------------------------------------------------
# binary token format


def write_tokens(dataset: TokenDataset, sink) -> int:
    """Write ``dataset`` to a binary stream; returns the byte count written."""
    rows = dataset.layout.rows if dataset.layout else 0
    cols = dataset.layout.cols if dataset.layout else 0
    header = (
        TOKENS_MAGIC
        + bytes([FORMAT_VERSION])
        + _TOKEN_HEADER.pack(dataset.codebook.size, dataset.seq_len, rows, cols, len(dataset))
    )
    payload = dataset.tokens.astype("<u4").tobytes()
    sink.write(header)
    sink.write(payload)
    return len(header) + len(payload)


def read_tokens(source) -> TokenDataset:
    """Parse a binary token stream, validating every header field and id.

    Raises :class:`FormatError` with a distinct code for bad magic, bad
    version, inconsistent header, truncated payload, trailing bytes, and
    out-of-range token ids. Never raises anything else on corrupt input.
    """
    data = source.read()
    return parse_tokens(data)


def parse_tokens(data: bytes) -> TokenDataset:
    if len(data) < 4 or data[:4] != TOKENS_MAGIC:
        raise FormatError(BAD_MAGIC, "not a CHTK token file (bad magic)")
    if len(data) < 5:
        raise FormatError(TRUNCATED, "header cut off before version byte")
    if data[4] != FORMAT_VERSION:
        raise FormatError(BAD_VERSION, f"unsupported CHTK version {data[4]}")
    head_end = 5 + _TOKEN_HEADER.size
    if len(data) < head_end:
        raise FormatError(TRUNCATED, "header cut off before field block")
    codebook, seq_len, rows, cols, count = _TOKEN_HEADER.unpack(data[5:head_end])
    if codebook < 2:
        raise FormatError(BAD_HEADER, f"codebook size {codebook} below minimum of 2")
    if seq_len < 1:
        raise FormatError(BAD_HEADER, "sequence length must be >= 1")
    if (rows == 0) != (cols == 0):
        raise FormatError(BAD_HEADER, f"grid {rows}x{cols} mixes zero and nonzero dims")
    if rows and rows * cols != seq_len:
        raise FormatError(BAD_HEADER, f"grid {rows}x{cols} does not cover seq_len {seq_len}")
    expected = head_end + count * seq_len * 4
    if len(data) < expected:
        raise FormatError(
            TRUNCATED, f"payload needs {expected - head_end} bytes, found {len(data) - head_end}"
        )
    if len(data) > expected:
        raise FormatError(TRAILING, f"{len(data) - expected} trailing bytes after payload")
    ids = np.frombuffer(data[head_end:], dtype="<u4").reshape(count, seq_len)
    if ids.size and int(ids.max()) >= codebook:
        raise FormatError(
            TOKEN_RANGE, f"token id {int(ids.max())} outside codebook of size {codebook}"
        )
    layout = GridLayout(rows, cols) if rows else None
    return TokenDataset(Codebook(codebook), ids.astype(np.int64), layout)


def load_tokens(path) -> TokenDataset:
    with open(path, "rb") as fh:
        return read_tokens(fh)


def save_tokens(dataset: TokenDataset, path) -> int:
    with open(path, "wb") as fh:
        return write_tokens(dataset, fh)


# ---------------------------------------------------------------------------
# text token format

_TEXT_HEADER = re.compile(r"^#chtk codebook=(\d+) seqlen=(\d+) grid=(\d+)x(\d+)$")


def write_tokens_text(dataset: TokenDataset, sink) -> None:
    """Write the line-oriented text form of ``dataset`` to a path or stream."""
    if not hasattr(sink, "write"):
        with open(sink, "w", encoding="utf-8") as fh:
            write_tokens_text(dataset, fh)
        return
    rows = dataset.layout.rows if dataset.layout else 0
    cols = dataset.layout.cols if dataset.layout else 0
    sink.write(f"#chtk codebook={dataset.codebook.size} seqlen={dataset.seq_len} grid={rows}x{cols}\n")
    for seq in dataset.tokens:
        sink.write(" ".join(str(int(t)) for t in seq))
        sink.write("\n")


def read_tokens_text(source) -> TokenDataset:
    if not hasattr(source, "read"):
        with open(source, "r", encoding="utf-8") as fh:
            return read_tokens_text(fh)
    text = source.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # allow exactly one trailing newline
    if not lines:
        raise FormatError(BAD_HEADER, "empty token text file")
    m = _TEXT_HEADER.match(lines[0])
    if not m:
        raise FormatError(BAD_HEADER, f"malformed header line: {lines[0]!r}")
    codebook, seq_len, rows, cols = (int(g) for g in m.groups())
    if codebook < 2:
        raise FormatError(BAD_HEADER, f"codebook size {codebook} below minimum of 2")
    if seq_len < 1:
        raise FormatError(BAD_HEADER, "sequence length must be >= 1")
    if (rows == 0) != (cols == 0):
        raise FormatError(BAD_HEADER, f"grid {rows}x{cols} mixes zero and nonzero dims")
    if rows and rows * cols != seq_len:
        raise FormatError(BAD_HEADER, f"grid {rows}x{cols} does not cover seq_len {seq_len}")
    out = np.zeros((len(lines) - 1, seq_len), dtype=np.int64)
    for i, line in enumerate(lines[1:], start=1):
        parts = line.split()
        if len(parts) != seq_len:
            raise FormatError(BAD_LINE, f"line {i + 1}: expected {seq_len} tokens, got {len(parts)}")
        try:
            vals = [int(p) for p in parts]
        except ValueError:
            raise FormatError(BAD_TOKEN, f"line {i + 1}: non-integer token") from None
        for v in vals:
            if v < 0 or v >= codebook:
                raise FormatError(
                    TOKEN_RANGE, f"line {i + 1}: token id {v} outside codebook of size {codebook}"
                )
        out[i - 1] = vals
    layout = GridLayout(rows, cols) if rows else None
    return TokenDataset(Codebook(codebook), out, layout)


# ---------------------------------------------------------------------------
# binary feature format


def write_features(features: FeatureSet, sink) -> int:
    """Write a feature set to a binary stream; returns the byte count."""
    if not np.isfinite(features.vectors).all():
        raise FormatError(NON_FINITE, "feature vectors contain NaN or infinity")
    header = (
        FEATURES_MAGIC
        + bytes([FORMAT_VERSION])
        + _FEATURE_HEADER.pack(features.dim, len(features))
    )
    payload = features.vectors.astype("<f8").tobytes()
    sink.write(header)
    sink.write(payload)
    return len(header) + len(payload)


def read_features(source) -> FeatureSet:
    data = source.read()
    return parse_features(data)


def parse_features(data: bytes) -> FeatureSet:
    if len(data) < 4 or data[:4] != FEATURES_MAGIC:
        raise FormatError(BAD_MAGIC, "not a CHFV feature file (bad magic)")
    if len(data) < 5:
        raise FormatError(TRUNCATED, "header cut off before version byte")
    if data[4] != FORMAT_VERSION:
        raise FormatError(BAD_VERSION, f"unsupported CHFV version {data[4]}")
    head_end = 5 + _FEATURE_HEADER.size
    if len(data) < head_end:
        raise FormatError(TRUNCATED, "header cut off before field block")
    dim, count = _FEATURE_HEADER.unpack(data[5:head_end])
    if dim < 1:
        raise FormatError(BAD_HEADER, "feature dimension must be >= 1")
    expected = head_end + count * dim * 8
    if len(data) < expected:
        raise FormatError(
            TRUNCATED, f"payload needs {expected - head_end} bytes, found {len(data) - head_end}"
        )
    if len(data) > expected:
        raise FormatError(TRAILING, f"{len(data) - expected} trailing bytes after payload")
    vec = np.frombuffer(data[head_end:], dtype="<f8").reshape(count, dim)
    if not np.isfinite(vec).all():
        raise FormatError(NON_FINITE, "feature payload contains NaN or infinity")
    return FeatureSet(vec.copy())


def load_features(path) -> FeatureSet:
    with open(path, "rb") as fh:
        return read_features(fh)


def save_features(features: FeatureSet, path) -> int:
    with open(path, "wb") as fh:
        return write_features(features, fh)
