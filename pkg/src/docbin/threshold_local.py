"""Window-based thresholding: Niblack, Sauvola, Nick and Bernsen.

Windows are square, centered on the pixel and clamped at the image border
(pixel counts shrink, nothing is mirrored). A pixel is foreground when its
intensity is <= the local threshold.

Statistics come from integral images by default. ``mode="naive"`` sums each
window directly, costing O(window^2) per pixel; it exists for timing
comparisons and gives identical masks.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import InvalidParams, RegionOutOfBounds
from .raster import as_gray, integral, mean_std_from_sums, window_sums

__all__ = [
    "LocalParams",
    "Region",
    "NIBLACK_DEFAULTS",
    "SAUVOLA_DEFAULTS",
    "NICK_DEFAULTS",
    "BERNSEN_DEFAULTS",
    "niblack",
    "sauvola",
    "nick",
    "nick_region",
    "bernsen",
    "local_stats",
]

MODES = ("integral", "naive")


@dataclass(frozen=True)
class LocalParams:
    window: int = 15
    k: float = 0.5
    r: float = 128.0
    bernsen_contrast_min: int = 15
    bernsen_low_contrast_class: str = "bg"

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 3 or self.window % 2 == 0:
            raise InvalidParams(f"window must be an odd integer >= 3, got {self.window}")
        object.__setattr__(self, "window", int(self.window))
        if not self.r > 0:
            raise InvalidParams("r must be > 0")
        if self.bernsen_contrast_min < 0:
            raise InvalidParams("bernsen_contrast_min must be >= 0")
        if self.bernsen_low_contrast_class not in ("fg", "bg"):
            raise InvalidParams("bernsen_low_contrast_class must be 'fg' or 'bg'")

    def with_(self, **changes) -> "LocalParams":
        return replace(self, **changes)


NIBLACK_DEFAULTS = LocalParams(window=25, k=-0.2)
SAUVOLA_DEFAULTS = LocalParams(window=15, k=0.5, r=128.0)
NICK_DEFAULTS = LocalParams(window=35, k=-0.1)
BERNSEN_DEFAULTS = LocalParams(window=31, k=0.0, bernsen_contrast_min=15)


class Region(NamedTuple):
    """Half-open pixel rectangle ``[top, bottom) x [left, right)``."""

    top: int
    left: int
    bottom: int
    right: int


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise InvalidParams(f"mode must be one of {MODES}, got {mode!r}")


def _naive_sums(a: np.ndarray, window: int, region: Region):
    r = window // 2
    t, l, b, rt = region
    # zero padding contributes nothing to the sums; the ones-plane counts real pixels
    vals = np.pad(a.astype(np.int64), r)
    ones = np.pad(np.ones(a.shape, dtype=np.int64), r)
    sq = vals * vals
    shape = (b - t, rt - l)
    s = np.zeros(shape, dtype=np.int64)
    ss = np.zeros(shape, dtype=np.int64)
    n = np.zeros(shape, dtype=np.int64)
    for dy in range(window):
        for dx in range(window):
            ys, xs = slice(t + dy, b + dy), slice(l + dx, rt + dx)
            s += vals[ys, xs]
            ss += sq[ys, xs]
            n += ones[ys, xs]
    return s, ss, n


def local_stats(img, window: int, region: Region | None = None, mode: str = "integral"):
    """Exact window sums ``(sum, squared sum, count)`` for every pixel of ``region``."""
    _check_mode(mode)
    a = as_gray(img)
    h, w = a.shape
    region = Region(0, 0, h, w) if region is None else Region(*region)
    if mode == "naive":
        return _naive_sums(a, window, region)
    r = window // 2
    # a crop reaching r pixels past the region (or to the image edge) sees every
    # clamped window of the region, so its integral gives the same sums
    cy0, cx0 = max(0, region.top - r), max(0, region.left - r)
    cy1, cx1 = min(h, region.bottom + r), min(w, region.right + r)
    ii = integral(a[cy0:cy1, cx0:cx1])
    rows = (region.top - cy0, region.bottom - cy0)
    cols = (region.left - cx0, region.right - cx0)
    return window_sums(ii, window, rows, cols)


def _mean_std(img, p: LocalParams, region=None, mode="integral"):
    s, sq, n = local_stats(img, p.window, region, mode)
    return mean_std_from_sums(s, sq, n)


def niblack(img, p: LocalParams = NIBLACK_DEFAULTS, mode: str = "integral") -> np.ndarray:
    """T = m + k*s."""
    a = as_gray(img)
    m, s = _mean_std(a, p, mode=mode)
    return a <= m + p.k * s


def sauvola(img, p: LocalParams = SAUVOLA_DEFAULTS, mode: str = "integral") -> np.ndarray:
    """T = m * (1 - k * (1 - s / R))."""
    a = as_gray(img)
    m, s = _mean_std(a, p, mode=mode)
    return a <= m * (1.0 - p.k * (1.0 - s / p.r))


def _nick_threshold(m, sd, k):
    # sqrt(sum(p_i^2 - m^2) / NP) reduces to the population std
    return m + k * sd


def nick(img, p: LocalParams = NICK_DEFAULTS, mode: str = "integral") -> np.ndarray:
    """T = m + k * sqrt(sum(p_i^2 - m^2) / NP)."""
    a = as_gray(img)
    m, sd = _mean_std(a, p, mode=mode)
    return a <= _nick_threshold(m, sd, p.k)


def nick_region(img, region, p: LocalParams = NICK_DEFAULTS, mode: str = "integral") -> np.ndarray:
    """Nick's mask for the pixels of ``region`` only.

    Windows still draw on pixels outside the region, so the patch equals the
    matching crop of ``nick(img)``.
    """
    a = as_gray(img)
    h, w = a.shape
    reg = Region(*region)
    if not (0 <= reg.top < reg.bottom <= h and 0 <= reg.left < reg.right <= w):
        raise RegionOutOfBounds(f"region {tuple(reg)} outside {h}x{w} image")
    m, sd = _mean_std(a, p, reg, mode)
    patch = a[reg.top:reg.bottom, reg.left:reg.right]
    return patch <= _nick_threshold(m, sd, p.k)


def _window_extrema(a: np.ndarray, window: int, mode: str):
    if mode == "integral":
        # replicated borders only repeat pixels already inside the clamped window
        return (ndimage.maximum_filter(a, size=window, mode="nearest"),
                ndimage.minimum_filter(a, size=window, mode="nearest"))
    r = window // 2
    h, w = a.shape
    hi_pad = np.pad(a.astype(np.int16), r, constant_values=-1)
    lo_pad = np.pad(a.astype(np.int16), r, constant_values=256)
    hi = np.full(a.shape, -1, dtype=np.int16)
    lo = np.full(a.shape, 256, dtype=np.int16)
    for dy in range(window):
        for dx in range(window):
            np.maximum(hi, hi_pad[dy:dy + h, dx:dx + w], out=hi)
            np.minimum(lo, lo_pad[dy:dy + h, dx:dx + w], out=lo)
    return hi.astype(np.uint8), lo.astype(np.uint8)


def bernsen(img, p: LocalParams = BERNSEN_DEFAULTS, mode: str = "integral") -> np.ndarray:
    """Midrange threshold; windows with contrast below the minimum take a fixed class."""
    _check_mode(mode)
    a = as_gray(img)
    hi, lo = _window_extrema(a, p.window, mode)
    hi = hi.astype(np.int16)
    lo = lo.astype(np.int16)
    contrast = hi - lo
    t = (hi + lo) // 2
    low_class = p.bernsen_low_contrast_class == "fg"
    return np.where(contrast < p.bernsen_contrast_min, low_class, a <= t)
