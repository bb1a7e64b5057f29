"""Matrix Market coordinate I/O.

Writes real matrices in coordinate format (symmetric storage when the
matrix is symmetric) using shortest round-trip float formatting, so an
export/import cycle reproduces the entries bit-identically.
"""
from __future__ import annotations

import io

import numpy as np
import scipy.io

from .errors import ParseError


def write_matrix(path, a, comment: str = "") -> None:
    """Write a dense real matrix to `path` in Matrix Market coordinate format.

    Symmetric matrices are stored as their lower triangle with the
    ``symmetric`` qualifier; exact zeros are omitted.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    symmetric = a.shape[0] == a.shape[1] and np.array_equal(a, a.T)
    buf = io.StringIO()
    kind = "symmetric" if symmetric else "general"
    buf.write(f"%%MatrixMarket matrix coordinate real {kind}\n")
    if comment:
        buf.write(f"% {comment}\n")
    rows, cols = np.nonzero(a)
    if symmetric:
        keep = rows >= cols
        rows, cols = rows[keep], cols[keep]
    buf.write(f"{a.shape[0]} {a.shape[1]} {len(rows)}\n")
    for i, j in zip(rows, cols):
        buf.write(f"{i + 1} {j + 1} {float(a[i, j])!r}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_matrix(path) -> np.ndarray:
    """Read a Matrix Market file into a dense float array.

    Symmetric storage is expanded to the full matrix. Raises ParseError
    on malformed input.
    """
    try:
        a = scipy.io.mmread(path)
    except (ValueError, TypeError, OSError) as exc:
        raise ParseError(f"cannot read Matrix Market file {path}: {exc}") from exc
    if hasattr(a, "toarray"):
        a = a.toarray()
    return np.asarray(a, dtype=float)
