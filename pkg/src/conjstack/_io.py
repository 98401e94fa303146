"""Atomic file writes shared by the command-line pipeline."""
from __future__ import annotations

import os
from pathlib import Path


def atomic_write_text(path: Path | str, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see partials."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path: Path | str, rows: list[list[str]]) -> None:
    atomic_write_text(path, "\n".join(",".join(cells) for cells in rows) + "\n")
