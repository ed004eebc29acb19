"""Byte-level contracts for the token and feature containers."""

import io
import struct

import numpy as np
import pytest

from codehist import (
    Codebook,
    FeatureSet,
    GridLayout,
    TokenDataset,
    parse_features,
    parse_tokens,
    read_tokens_text,
    write_features,
    write_tokens,
    write_tokens_text,
)
from codehist.errors import (
    NON_FINITE,
    BAD_HEADER,
    BAD_MAGIC,
    BAD_TOKEN,
    BAD_VERSION,
    BAD_LINE,
    FormatError,
    TOKEN_RANGE,
    TRAILING,
    TRUNCATED,
)

# Laid out by hand from the header contract before the writer existed:
# magic, version byte, then little-endian codebook=4, seqlen=2, rows=0,
# cols=0, count=1 (u64), then ids 0 and 3 as u32.
GOLDEN_TOKENS = bytes(
    [0x43, 0x48, 0x54, 0x4B, 0x01]
    + [0x04, 0x00, 0x00, 0x00]
    + [0x02, 0x00, 0x00, 0x00]
    + [0x00] * 8
    + [0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00]
    + [0x00, 0x00, 0x00, 0x00, 0x03, 0x00, 0x00, 0x00]
)


def small_dataset(layout=None):
    return TokenDataset(Codebook(4), np.array([[0, 3]], dtype=np.int64), layout)


def test_writer_matches_golden_bytes():
    sink = io.BytesIO()
    write_tokens(small_dataset(), sink)
    assert sink.getvalue() == GOLDEN_TOKENS


def test_golden_bytes_parse_back():
    ds = parse_tokens(GOLDEN_TOKENS)
    assert ds.codebook.size == 4
    assert ds.seq_len == 2
    assert ds.layout is None
    assert len(ds) == 1
    np.testing.assert_array_equal(ds.tokens, [[0, 3]])


def test_roundtrip_with_grid():
    ds = TokenDataset(
        Codebook(11),
        np.arange(24, dtype=np.int64).reshape(4, 6) % 11,
        GridLayout(2, 3),
    )
    sink = io.BytesIO()
    write_tokens(ds, sink)
    back = parse_tokens(sink.getvalue())
    assert back.layout == GridLayout(2, 3)
    assert back.codebook.size == 11
    np.testing.assert_array_equal(back.tokens, ds.tokens)


def test_text_roundtrip(tmp_path):
    ds = TokenDataset(
        Codebook(7), np.array([[0, 6, 3], [1, 1, 1]], dtype=np.int64), GridLayout(1, 3)
    )
    path = tmp_path / "tokens.txt"
    write_tokens_text(ds, path)
    content = path.read_text()
    assert content.splitlines()[0] == "#chtk codebook=7 seqlen=3 grid=1x3"
    back = read_tokens_text(path)
    assert back.layout == GridLayout(1, 3)
    np.testing.assert_array_equal(back.tokens, ds.tokens)


def test_text_header_without_grid(tmp_path):
    path = tmp_path / "tokens.txt"
    write_tokens_text(small_dataset(), path)
    assert path.read_text().splitlines()[0] == "#chtk codebook=4 seqlen=2 grid=0x0"
    assert read_tokens_text(path).layout is None


@pytest.mark.parametrize(
    "mutate,code",
    [
        (lambda b: b"XXXX" + b[4:], BAD_MAGIC),
        (lambda b: b[:4] + bytes([9]) + b[5:], BAD_VERSION),
        (lambda b: b[:-4], TRUNCATED),
        (lambda b: b + b"\x00", TRAILING),
        (lambda b: b[:5] + struct.pack("<I", 1) + b[9:], BAD_HEADER),  # codebook < 2
        (lambda b: b[:9] + struct.pack("<I", 0) + b[13:], BAD_HEADER),  # seqlen 0
        (lambda b: b[:13] + struct.pack("<II", 3, 0) + b[21:], BAD_HEADER),  # half grid
        (lambda b: b[:13] + struct.pack("<II", 3, 5) + b[21:], BAD_HEADER),  # r*c != N
        (lambda b: b[:-8] + struct.pack("<II", 0, 4), TOKEN_RANGE),
    ],
)
def test_malformed_tokens_raise_format_error(mutate, code):
    with pytest.raises(FormatError) as err:
        parse_tokens(mutate(GOLDEN_TOKENS))
    assert err.value.code == code


def test_text_bad_token_literal(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("#chtk codebook=4 seqlen=2 grid=0x0\n0 x\n")
    with pytest.raises(FormatError) as err:
        read_tokens_text(path)
    assert err.value.code == BAD_TOKEN


def test_text_wrong_line_length(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("#chtk codebook=4 seqlen=2 grid=0x0\n0 1 2\n")
    with pytest.raises(FormatError) as err:
        read_tokens_text(path)
    assert err.value.code == BAD_LINE


def test_text_token_out_of_range(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("#chtk codebook=4 seqlen=2 grid=0x0\n0 4\n")
    with pytest.raises(FormatError) as err:
        read_tokens_text(path)
    assert err.value.code == TOKEN_RANGE


def test_feature_roundtrip_and_header():
    fs = FeatureSet(np.array([[1.0, -2.5], [0.0, 3.25]]))
    sink = io.BytesIO()
    write_features(fs, sink)
    raw = sink.getvalue()
    assert raw[:4] == b"CHFV"
    assert raw[4] == 1
    dim, count = struct.unpack_from("<IQ", raw, 5)
    assert (dim, count) == (2, 2)
    back = parse_features(raw)
    np.testing.assert_array_equal(back.vectors, fs.vectors)


def test_feature_non_finite_rejected():
    fs = FeatureSet(np.array([[1.0, 2.0]]))
    sink = io.BytesIO()
    write_features(fs, sink)
    raw = bytearray(sink.getvalue())
    raw[-8:] = struct.pack("<d", float("nan"))
    with pytest.raises(FormatError) as err:
        parse_features(bytes(raw))
    assert err.value.code == NON_FINITE


def test_feature_truncated_and_trailing():
    fs = FeatureSet(np.array([[1.0, 2.0]]))
    sink = io.BytesIO()
    write_features(fs, sink)
    raw = sink.getvalue()
    with pytest.raises(FormatError):
        parse_features(raw[:-1])
    with pytest.raises(FormatError):
        parse_features(raw + b"\x00")


def test_dataset_validation():
    with pytest.raises(ValueError):
        Codebook(1)
    with pytest.raises(ValueError):
        TokenDataset(Codebook(4), np.array([[0, 4]]))
    with pytest.raises(ValueError):
        TokenDataset(Codebook(4), np.array([[-1, 0]]))
    with pytest.raises(ValueError):
        TokenDataset(Codebook(4), np.array([[0, 1, 2]]), GridLayout(2, 2))
    ds = small_dataset(GridLayout(1, 2))
    sub = ds.subset([0])
    assert len(sub) == 1 and sub.layout == ds.layout


def test_from_sequences_checks_shape():
    with pytest.raises(ValueError):
        TokenDataset.from_sequences(
            Codebook(4), [np.array([0, 1]), np.array([0, 1, 2])]
        )
