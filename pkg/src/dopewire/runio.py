"""Deterministic CSV/text outputs and the per-run manifest."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

__all__ = ["fmt", "write_csv", "write_text", "write_manifest"]


def fmt(value) -> str:
    """Render a value for CSV: 17 significant digits for floats, plain otherwise."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def write_text(path: Path, lines: list[str]) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    out_dir: Path,
    command: str,
    snapshot,
    seed: int,
    started: str,
    finished: str,
    files: list[Path],
    version: str,
) -> Path:
    manifest = {
        "tool": "dopewire",
        "version": version,
        "command": command,
        "seed": seed,
        "started": started,
        "finished": finished,
        "config": {key: value for key, value in snapshot},
        "outputs": {
            path.name: {"sha256": _sha256(path), "bytes": path.stat().st_size}
            for path in files
        },
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
