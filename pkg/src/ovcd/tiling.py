"""Splitting large pairs into fixed-size tiles and stitching results back.

Tiles are square, non-overlapping, and laid out row-major from the top-left
corner.  The bottom and right edges are zero-padded up to a whole tile; the
stitcher crops that padding away again, so stitch(tile(x)) == x.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import MissingTileError, ValidationError
from .model import BiTemporalPair, InstanceMask

Position = tuple[int, int]


@dataclass(frozen=True)
class TileGrid:
    """Geometry of one tiling: counts plus the padding the tiler added."""

    tile_size: int
    rows: int
    cols: int
    pad_bottom: int
    pad_right: int

    def __post_init__(self) -> None:
        if self.tile_size < 1 or self.rows < 1 or self.cols < 1:
            raise ValidationError(f"degenerate tile grid {self}")
        if not (0 <= self.pad_bottom < self.tile_size) or not (0 <= self.pad_right < self.tile_size):
            raise ValidationError(f"padding must be in [0, tile_size): {self}")

    @property
    def image_shape(self) -> tuple[int, int]:
        return (self.rows * self.tile_size - self.pad_bottom,
                self.cols * self.tile_size - self.pad_right)

    def origin(self, r: int, c: int) -> tuple[int, int]:
        """Top-left pixel of tile (r, c) in frame coordinates."""
        return r * self.tile_size, c * self.tile_size


def grid_for(shape: tuple[int, int], tile_size: int) -> TileGrid:
    if tile_size < 1:
        raise ValidationError(f"tile_size must be positive, got {tile_size}")
    h, w = shape
    rows = -(-h // tile_size)
    cols = -(-w // tile_size)
    return TileGrid(tile_size, rows, cols, rows * tile_size - h, cols * tile_size - w)


def _pad_to_grid(img: np.ndarray, grid: TileGrid) -> np.ndarray:
    pad = ((0, grid.pad_bottom), (0, grid.pad_right)) + ((0, 0),) * (img.ndim - 2)
    return np.pad(img, pad)


def tile(pair: BiTemporalPair, size: int) -> tuple[list[tuple[BiTemporalPair, Position]], TileGrid]:
    """Split one pair into (tile-pair, (row, col)) entries, row-major."""
    grid = grid_for(pair.shape, size)
    t1 = _pad_to_grid(pair.t1, grid)
    t2 = _pad_to_grid(pair.t2, grid)
    out = []
    for r in range(grid.rows):
        for c in range(grid.cols):
            y0, x0 = grid.origin(r, c)
            sub_id = f"{pair.pair_id}#r{r}c{c}"
            out.append((BiTemporalPair(
                t1[y0:y0 + size, x0:x0 + size],
                t2[y0:y0 + size, x0:x0 + size],
                sub_id,
            ), (r, c)))
    return out, grid


def tile_map(arr: np.ndarray, size: int) -> tuple[list[tuple[np.ndarray, Position]], TileGrid]:
    """Split one 2-D label map the same way tile() splits a pair."""
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D map, got shape {arr.shape}")
    grid = grid_for(arr.shape, size)
    padded = _pad_to_grid(arr, grid)
    out = []
    for r in range(grid.rows):
        for c in range(grid.cols):
            y0, x0 = grid.origin(r, c)
            out.append((padded[y0:y0 + size, x0:x0 + size], (r, c)))
    return out, grid


def stitch(results: Iterable[tuple[np.ndarray, Position]], grid: TileGrid) -> np.ndarray:
    """Reassemble per-tile 2-D arrays into one frame, dropping the padding."""
    seen: dict[Position, np.ndarray] = {}
    for piece, pos in results:
        if pos in seen:
            raise ValidationError(f"tile {pos} supplied twice")
        seen[pos] = np.asarray(piece)
    full = None
    for r in range(grid.rows):
        for c in range(grid.cols):
            if (r, c) not in seen:
                raise MissingTileError(f"tile ({r}, {c}) missing from stitch input")
            piece = seen[(r, c)]
            if piece.shape != (grid.tile_size, grid.tile_size):
                raise ValidationError(
                    f"tile ({r}, {c}) has shape {piece.shape}, "
                    f"expected {(grid.tile_size, grid.tile_size)}"
                )
            if full is None:
                full = np.zeros((grid.rows * grid.tile_size, grid.cols * grid.tile_size),
                                dtype=piece.dtype)
            y0, x0 = grid.origin(r, c)
            full[y0:y0 + grid.tile_size, x0:x0 + grid.tile_size] = piece
    h, w = grid.image_shape
    return full[:h, :w]


def lift_instance(inst: InstanceMask, grid: TileGrid, r: int, c: int) -> InstanceMask | None:
    """Re-express a tile-local instance in frame coordinates.

    Returns None when the instance lived entirely in the padding strip and
    vanishes after the crop.
    """
    h, w = grid.image_shape
    full = np.zeros((h, w), dtype=bool)
    y0, x0 = grid.origin(r, c)
    y1 = min(y0 + grid.tile_size, h)
    x1 = min(x0 + grid.tile_size, w)
    full[y0:y1, x0:x1] = inst.mask[: y1 - y0, : x1 - x0]
    if not full.any():
        return None
    return InstanceMask.from_mask(full, inst.quality, inst.temporal,
                                  inst.class_label, inst.change_score)
