"""Cross-package interop: the exporter in bridge/ writes files the core reads.

The bridge checks in a golden token file produced from its reference
checkpoint and image set. This suite re-reads that file with the core
parser and pins digest, header, and payload invariants, so any format
drift on either side fails loudly.
"""

import hashlib
import json
from pathlib import Path

import pytest

from codehist import load_tokens

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "bridge" / "golden"

needs_golden = pytest.mark.skipif(
    not (GOLDEN_DIR / "golden.chtk").exists(),
    reason="bridge golden fixtures not present",
)


@needs_golden
@pytest.mark.acceptance(
    "S01 bridge golden token file parses cleanly; digest and header match "
    "its checkpoint"
)
def test_bridge_golden_interop():
    raw = (GOLDEN_DIR / "golden.chtk").read_bytes()
    pinned = (GOLDEN_DIR / "golden.sha256").read_text().strip()
    assert hashlib.sha256(raw).hexdigest() == pinned

    dataset = load_tokens(GOLDEN_DIR / "golden.chtk")  # zero validation errors

    checkpoint = json.loads((GOLDEN_DIR / "checkpoint.json").read_text())
    assert dataset.codebook.size == checkpoint["codebook_size"]
    assert dataset.seq_len == checkpoint["seq_len"]
    native_h, native_w = checkpoint["native_size"]
    patch_h, patch_w = checkpoint["patch"]
    assert dataset.layout is not None
    assert dataset.layout.rows == native_h // patch_h
    assert dataset.layout.cols == native_w // patch_w


@needs_golden
def test_bridge_golden_payload_invariants():
    dataset = load_tokens(GOLDEN_DIR / "golden.chtk")
    assert len(dataset) == 4
    assert dataset.tokens.min() >= 0
    assert dataset.tokens.max() < dataset.codebook.size
    # the fixture is only useful if it exercises a spread of the codebook
    assert len(set(dataset.tokens.ravel().tolist())) > 4
