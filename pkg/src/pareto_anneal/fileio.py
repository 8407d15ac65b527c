"""Atomic file output.

Every artifact is written to ``<name>.partial`` first and renamed into place
once complete, so an interrupted command never leaves a truncated file under
its final name.
"""

from __future__ import annotations

import json
import os
from pathlib import Path


def partial_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".partial")


def atomic_write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    tmp = partial_path(path)
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def atomic_write_json(path: str | Path, obj, indent: int | None = None) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=indent, allow_nan=False) + "\n")
