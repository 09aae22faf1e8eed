"""Contrast measurement and contrast-gated CLAHE."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import ndimage

from .errors import InvalidParams
from .raster import as_gray

__all__ = [
    "ClaheParams",
    "ContrastReport",
    "michelson_contrast",
    "local_average_contrast",
    "clahe",
    "gate_and_enhance",
]


@dataclass(frozen=True)
class ClaheParams:
    tile_grid: Tuple[int, int] = (8, 8)  # (cols, rows)
    clip_limit: float = 2.0
    epsilon: float = 1e-9

    def __post_init__(self):
        cols, rows = self.tile_grid
        if int(cols) != cols or int(rows) != rows or cols < 1 or rows < 1:
            raise InvalidParams(f"tile_grid must hold positive integers, got {self.tile_grid}")
        object.__setattr__(self, "tile_grid", (int(cols), int(rows)))
        if not self.clip_limit > 0:
            raise InvalidParams("clip_limit must be > 0")
        if not self.epsilon > 0:
            raise InvalidParams("epsilon must be > 0")


@dataclass(frozen=True)
class ContrastReport:
    local_avg_contrast: float
    enhanced: bool


def michelson_contrast(i_max, i_min, epsilon: float = 1e-9):
    """``(i_max - i_min) / (i_max + i_min + epsilon)``; works on scalars or arrays."""
    i_max = np.asarray(i_max, dtype=np.float64)
    i_min = np.asarray(i_min, dtype=np.float64)
    out = (i_max - i_min) / (i_max + i_min + epsilon)
    return float(out) if out.ndim == 0 else out


def local_average_contrast(img, epsilon: float = 1e-9) -> float:
    """Mean Michelson contrast of the border-clamped 3x3 window around every pixel."""
    a = as_gray(img)
    # 'nearest' padding only repeats pixels already inside the clamped window,
    # so max/min equal those of the shrunken window.
    hi = ndimage.maximum_filter(a, size=3, mode="nearest")
    lo = ndimage.minimum_filter(a, size=3, mode="nearest")
    return float(np.mean(michelson_contrast(hi, lo, epsilon)))


def _clipped_lut(hist: np.ndarray, area: int, clip_limit: float) -> np.ndarray:
    limit = max(1, int(clip_limit * area / 256))
    excess = int(np.maximum(hist - limit, 0).sum())
    h = np.minimum(hist, limit)
    h += excess // 256
    residual = excess % 256
    if residual:
        step = max(256 // residual, 1)
        h[np.arange(residual) * step] += 1
    cdf = np.cumsum(h)
    # round-half-up of cdf * 255 / area in exact integer arithmetic
    return ((cdf * 510 + area) // (2 * area)).astype(np.int64)


def _interp_axis(n: int, edges: np.ndarray):
    """Per-coordinate (low tile, high tile, weight of high tile)."""
    centers = (edges[:-1] + edges[1:] - 1) / 2.0
    pos = np.arange(n, dtype=np.float64)
    last = len(centers) - 1
    i0 = np.clip(np.searchsorted(centers, pos, side="right") - 1, 0, last)
    i1 = np.minimum(i0 + 1, last)
    span = centers[i1] - centers[i0]
    wt = np.where(span > 0, (pos - centers[i0]) / np.where(span > 0, span, 1.0), 0.0)
    return i0, i1, np.clip(wt, 0.0, 1.0)


def clahe(img, params: ClaheParams = ClaheParams()) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization.

    Each tile's histogram is clipped at ``clip_limit * tile_pixels / 256``;
    the clipped mass is spread evenly over all bins (remainder spread at a
    fixed stride) before building the tile's CDF mapping. Output pixels
    blend the mappings of the surrounding tile centers bilinearly.
    Images smaller than the grid in either dimension use one tile. Otherwise
    the image is mirror-padded at the bottom/right to a whole number of
    tiles, so every tile has the same area (and the same clip limit).
    """
    a = as_gray(img)
    h, w = a.shape
    cols, rows = params.tile_grid
    if w < cols or h < rows:
        cols, rows = 1, 1
    th, tw = -(-h // rows), -(-w // cols)
    a_pad = np.pad(a, ((0, th * rows - h), (0, tw * cols - w)), mode="symmetric")
    ye, xe = np.arange(rows + 1) * th, np.arange(cols + 1) * tw

    luts = np.empty((rows, cols, 256), dtype=np.int64)
    for ty in range(rows):
        for tx in range(cols):
            tile = a_pad[ye[ty]:ye[ty + 1], xe[tx]:xe[tx + 1]]
            hist = np.bincount(tile.ravel(), minlength=256).astype(np.int64)
            luts[ty, tx] = _clipped_lut(hist, tile.size, params.clip_limit)

    y0, y1, wy = _interp_axis(h, ye)
    x0, x1, wx = _interp_axis(w, xe)
    Y0, Y1, WY = y0[:, None], y1[:, None], wy[:, None]
    X0, X1, WX = x0[None, :], x1[None, :], wx[None, :]
    top = (1.0 - WX) * luts[Y0, X0, a] + WX * luts[Y0, X1, a]
    bottom = (1.0 - WX) * luts[Y1, X0, a] + WX * luts[Y1, X1, a]
    out = (1.0 - WY) * top + WY * bottom
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def gate_and_enhance(img, t_ctr: float = 0.02, params: ClaheParams = ClaheParams()):
    """Apply CLAHE only when the local average contrast falls below ``t_ctr``.

    Returns ``(image, ContrastReport)``; when the gate stays closed the input
    array itself is returned.
    """
    if not 0 < t_ctr < 1:
        raise InvalidParams("t_ctr must lie in (0, 1)")
    a = as_gray(img)
    ctr = local_average_contrast(a, params.epsilon)
    if ctr < t_ctr:
        return clahe(a, params), ContrastReport(ctr, True)
    return a, ContrastReport(ctr, False)
