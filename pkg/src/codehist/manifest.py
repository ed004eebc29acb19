"""Run manifests: everything needed to reproduce a CLI invocation.

A manifest records the subcommand, the exact argv, the global seed and
thread count, a sha256 digest per input file, and the produced output
names. It contains no timestamps, so re-running a command regenerates the
manifest byte-identically along with the outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

from .errors import DIGEST_MISMATCH, FormatError

MANIFEST_VERSION = 1


@dataclass
class RunManifest:
    tool: str
    version: str
    subcommand: str
    argv: list
    seed: int
    threads: int
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    manifest_version: int = MANIFEST_VERSION


def file_digest(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(manifest: RunManifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(asdict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> RunManifest:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError("bad_header", f"{path}: not valid manifest JSON ({exc})") from exc
    try:
        return RunManifest(
            tool=raw["tool"],
            version=raw["version"],
            subcommand=raw["subcommand"],
            argv=list(raw["argv"]),
            seed=int(raw["seed"]),
            threads=int(raw["threads"]),
            inputs=dict(raw.get("inputs", {})),
            outputs=list(raw.get("outputs", [])),
            manifest_version=int(raw.get("manifest_version", MANIFEST_VERSION)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError("bad_header", f"{path}: manifest field missing or malformed ({exc})") from exc


def verify_inputs(manifest: RunManifest) -> None:
    """Check that every recorded input still has its recorded digest."""
    for path, recorded in manifest.inputs.items():
        actual = file_digest(path)
        if actual != recorded:
            raise FormatError(
                DIGEST_MISMATCH,
                f"{path}: content changed since the manifest was written "
                f"(sha256 {actual[:12]}.. != {recorded[:12]}..)",
            )
