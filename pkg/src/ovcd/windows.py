"""Exact box averages over a uniform fractional partition of an image.

An (H, W) image is split into an (out_h, out_w) grid of equal rectangles
whose edges generally fall between pixels.  Each pixel is treated as a unit
square of constant value, so the window mean is an exact integral, computed
with an integral image evaluated bilinearly at the fractional edges.  The
same partition is used by feature extraction and mask pooling, which keeps
the two sides of every pooled comparison aligned.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import ValidationError


def grid_edges(size: int, cells: int) -> np.ndarray:
    """The cells+1 edge coordinates of a uniform partition of [0, size]."""
    if size < 1 or cells < 1:
        raise ValidationError(f"size and cells must be positive, got {size}, {cells}")
    return np.arange(cells + 1) * (size / cells)


def _edge_integral(ii: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    # Bilinear interpolation of the integral image is exact for a
    # piecewise-constant (per-pixel) integrand.
    h = ii.shape[0] - 1
    w = ii.shape[1] - 1
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 1)
    a = (ys - y0)[:, None]
    b = (xs - x0)[None, :]
    y0 = y0[:, None]
    x0 = x0[None, :]
    return (
        (1 - a) * (1 - b) * ii[y0, x0]
        + (1 - a) * b * ii[y0, x0 + 1]
        + a * (1 - b) * ii[y0 + 1, x0]
        + a * b * ii[y0 + 1, x0 + 1]
    )


def window_sums(arr: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Exact integral of arr over each cell of an out_h x out_w partition."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D array, got shape {arr.shape}")
    h, w = arr.shape
    ii = np.zeros((h + 1, w + 1), dtype=np.float64)
    ii[1:, 1:] = np.cumsum(np.cumsum(arr, axis=0), axis=1)
    ys = grid_edges(h, out_h)
    xs = grid_edges(w, out_w)
    f = _edge_integral(ii, ys, xs)
    return f[1:, 1:] - f[:-1, 1:] - f[1:, :-1] + f[:-1, :-1]


def window_mean(arr: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Exact mean of arr over each cell of an out_h x out_w partition."""
    sums = window_sums(arr, out_h, out_w)
    h, w = np.asarray(arr).shape
    ys = grid_edges(h, out_h)
    xs = grid_edges(w, out_w)
    areas = np.diff(ys)[:, None] * np.diff(xs)[None, :]
    return sums / areas


def window_mean_std(arr: np.ndarray, out_h: int, out_w: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-cell mean and population standard deviation."""
    arr = np.asarray(arr, dtype=np.float64)
    # Moments are taken relative to a constant shift so near-uniform regions
    # do not lose the variance to cancellation; a constant array comes out
    # with a std of exactly zero.
    offset = arr.flat[0] if arr.size else 0.0
    shifted = arr - offset
    mean = window_mean(shifted, out_h, out_w)
    mean_sq = window_mean(shifted * shifted, out_h, out_w)
    var = np.maximum(mean_sq - mean * mean, 0.0)
    return mean + offset, np.sqrt(var)


def grid_shape_for(image_shape: tuple[int, int], stride: int) -> tuple[int, int]:
    """Cells needed so every cell spans at most stride pixels."""
    if stride < 1:
        raise ValidationError(f"stride must be positive, got {stride}")
    h, w = image_shape
    return -(-h // stride), -(-w // stride)


def cell_of_point(y: float, x: float, image_shape: tuple[int, int],
                  grid_shape: tuple[int, int]) -> tuple[int, int]:
    """The grid cell containing image point (y, x)."""
    h, w = image_shape
    hf, wf = grid_shape
    r = min(int(y * hf / h), hf - 1)
    c = min(int(x * wf / w), wf - 1)
    return max(r, 0), max(c, 0)


def exact_strides(image_shape: tuple[int, int], grid_shape: tuple[int, int]) -> tuple[Fraction, Fraction]:
    """Cell size in pixels as exact Fractions (no rounding drift)."""
    h, w = image_shape
    hf, wf = grid_shape
    return Fraction(h, hf), Fraction(w, wf)
