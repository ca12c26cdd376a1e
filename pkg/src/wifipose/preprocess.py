"""CSI frame -> square network input tensor.

The [3, 114, 32] amplitude tensor is flattened to a 114x96 matrix (rows are
subcarriers, columns concatenate the three antennas' 32-packet series),
bilinearly upsampled to a square, standardized to zero mean / unit variance,
and given a leading channel axis.
"""

from __future__ import annotations

import numpy as np

INPUT_SIZE = 136
STD_EPS = 1e-8


def flatten_antennas(frame: np.ndarray) -> np.ndarray:
    """[A, S, T] -> [S, A*T] with antenna-major columns: M[s, a*T + t] = frame[a, s, t]."""
    frame = np.asarray(frame)
    if frame.ndim != 3:
        raise ValueError(f"expected a 3-axis CSI frame, got shape {frame.shape}")
    a, s, t = frame.shape
    return frame.transpose(1, 0, 2).reshape(s, a * t)


def bilinear_resize(m: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Corner-aligned bilinear resampling of a 2-D matrix.

    Output index i samples source coordinate i*(H-1)/(out_h-1) (index 0 when
    the output axis has length 1), so resizing to the input size is exact
    and affine fields are reproduced exactly.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    h, w = m.shape
    if h < 2 or w < 2:
        raise ValueError(f"input must be at least 2x2, got {h}x{w}")
    if out_h < 1 or out_w < 1:
        raise ValueError("output dimensions must be >= 1")

    def src_coords(n_out, n_in):
        if n_out == 1:
            return np.zeros(1)
        return np.arange(n_out) * ((n_in - 1) / (n_out - 1))

    ys = src_coords(out_h, h)
    xs = src_coords(out_w, w)
    y0 = np.minimum(np.floor(ys).astype(int), h - 2)
    x0 = np.minimum(np.floor(xs).astype(int), w - 2)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]

    tl = m[np.ix_(y0, x0)]
    tr = m[np.ix_(y0, x0 + 1)]
    bl = m[np.ix_(y0 + 1, x0)]
    br = m[np.ix_(y0 + 1, x0 + 1)]
    return (
        tl * (1 - fy) * (1 - fx)
        + tr * (1 - fy) * fx
        + bl * fy * (1 - fx)
        + br * fy * fx
    )


def standardize(m: np.ndarray) -> np.ndarray:
    """(m - mean) / (std + eps) with scalar statistics over all entries."""
    m = np.asarray(m, dtype=np.float64)
    return (m - m.mean()) / (m.std() + STD_EPS)


def preprocess(frame: np.ndarray, out_size: int = INPUT_SIZE) -> np.ndarray:
    """Full chain: flatten antennas, resize to a square, standardize.

    Returns a [1, out_size, out_size] tensor.
    """
    m = standardize(bilinear_resize(flatten_antennas(frame), out_size, out_size))
    return m[None, :, :]
