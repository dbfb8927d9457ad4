"""Plain-text column files that gnuplot reads directly."""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["write_columns"]


def write_columns(path, *columns, header: str = "") -> Path:
    """Whitespace-separated columns with an optional ``#`` header line."""
    path = Path(path)
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    if len({c.size for c in cols}) > 1:
        raise ValueError("columns must have equal length")
    with open(path, "w") as fh:
        if header:
            fh.write(f"# {header}\n")
        for row in zip(*cols):
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    return path
