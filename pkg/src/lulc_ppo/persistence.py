"""Atomic file output, content digests, and the run manifest.

Every artifact is written to a temporary sibling and renamed into place, so
a crashed run never leaves a partial file under a final name.
"""

from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timezone
from pathlib import Path


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(
    path,
    *,
    command: str,
    config_text: str,
    seed: int,
    started_at: str,
    inputs: dict,
    outputs: dict,
    version: str,
) -> None:
    """Record what a run consumed and produced, with sha256 digests."""
    manifest = {
        "artifact_version": version,
        "command": command,
        "seed": seed,
        "started_at": started_at,
        "finished_at": utc_now_iso(),
        "config": config_text,
        "input_digests": {str(k): sha256_file(v) for k, v in inputs.items()},
        "output_digests": {str(k): sha256_file(v) for k, v in outputs.items()},
    }
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
