"""Pure-numpy implementations of the hot inner loops.

Drop-in fallback for the compiled extension (_kernels_cy); both expose the
same three entry points and must agree numerically:

  ncc_map(image, templ_centered, templ_var) -> score map
  sobel_magnitude(image)                    -> unnormalized gradient magnitude
  hough_accumulate(edge_rows, edge_cols, offsets, rows, cols) -> vote counts
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def ncc_map(image: np.ndarray, templ_centered: np.ndarray, templ_var: float) -> np.ndarray:
    """Normalized cross-correlation of a mean-centered template at every
    valid offset.  Windows (or templates) with no variance score 0."""
    h, w = templ_centered.shape
    n = h * w
    win = sliding_window_view(image, (h, w))
    s1 = np.einsum("uvij->uv", win)
    s2 = np.einsum("uvij,uvij->uv", win, win)
    cross = np.einsum("uvij,ij->uv", win, templ_centered)
    win_var = s2 - s1 * s1 / n
    np.maximum(win_var, 0.0, out=win_var)
    denom = np.sqrt(win_var * templ_var)
    out = np.zeros_like(cross)
    np.divide(cross, denom, out=out, where=denom > 0.0)
    return out


def sobel_magnitude(image: np.ndarray) -> np.ndarray:
    """3x3 Sobel gradient magnitude with edge replication, not normalized."""
    p = np.pad(image, 1, mode="edge")
    # horizontal derivative (along columns)
    gx = (
        (p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2])
    )
    # vertical derivative (along rows)
    gy = (
        (p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:])
    )
    return np.sqrt(gx * gx + gy * gy)


def hough_accumulate(
    edge_rows: np.ndarray,
    edge_cols: np.ndarray,
    offsets: np.ndarray,
    rows: int,
    cols: int,
) -> np.ndarray:
    """Scatter one vote per (edge pixel, perimeter offset) pair into a
    rows x cols center accumulator.  offsets is an (k, 2) int array of
    (dy, dx) displacements from center to perimeter."""
    cy = edge_rows[:, np.newaxis] - offsets[np.newaxis, :, 0]
    cx = edge_cols[:, np.newaxis] - offsets[np.newaxis, :, 1]
    ok = (cy >= 0) & (cy < rows) & (cx >= 0) & (cx < cols)
    flat = cy[ok] * cols + cx[ok]
    counts = np.bincount(flat, minlength=rows * cols)
    return counts.reshape(rows, cols).astype(np.int64)
