"""Image containers, pixel I/O, histograms, integral images and CC labeling.

Gray images are 2-D ``uint8`` arrays. Binary images are 2-D ``bool`` arrays
where ``True`` marks foreground (ink). On disk, foreground is written as 0
(black) and background as 255 (white).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import CorruptImage, UnsupportedFormat

__all__ = [
    "IntegralImages",
    "ComponentSet",
    "as_gray",
    "as_binary",
    "rgb_to_gray",
    "load_gray",
    "load_binary",
    "save_binary",
    "save_gray",
    "histogram",
    "integral",
    "window_bounds",
    "window_sums",
    "mean_std_from_sums",
    "local_mean_std",
    "connected_components",
]

FG_VALUE = 0
BG_VALUE = 255

_WRITERS = {".png": "PNG", ".pgm": "PPM"}
# PNG and PGM are the supported inputs; TIFF and BMP are accepted because
# benchmark datasets ship in them
_READERS = ("PNG", "PPM", "TIFF", "BMP")


def as_gray(img) -> np.ndarray:
    """Validate and return ``img`` as a 2-D uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if arr.dtype == np.uint8:
        return arr
    if arr.dtype == bool:
        raise TypeError("boolean array given where a gray image is expected")
    if np.issubdtype(arr.dtype, np.integer) or np.issubdtype(arr.dtype, np.floating):
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("gray intensities must lie in [0, 255]")
        return np.rint(arr).astype(np.uint8) if np.issubdtype(arr.dtype, np.floating) else arr.astype(np.uint8)
    raise TypeError(f"unsupported dtype {arr.dtype}")


def as_binary(img) -> np.ndarray:
    """Validate and return ``img`` as a 2-D bool array (True = foreground)."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D mask, got shape {arr.shape}")
    if arr.dtype != bool:
        vals = np.unique(arr)
        if not np.all(np.isin(vals, (0, 1))):
            raise ValueError("binary image must be boolean or contain only 0/1")
        arr = arr.astype(bool)
    return arr


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma, rounded half-up, computed in exact integer arithmetic."""
    rgb = np.asarray(rgb, dtype=np.int64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    return ((299 * r + 587 * g + 114 * b + 500) // 1000).astype(np.uint8)


def load_gray(path) -> np.ndarray:
    """Read a PNG or PGM (P2/P5) file (TIFF/BMP also accepted) as 8-bit gray.

    Color inputs go through :func:`rgb_to_gray`; alpha channels are dropped.

    Raises
    ------
    FileNotFoundError
        ``path`` does not exist.
    UnsupportedFormat
        The file is neither PNG nor PGM.
    CorruptImage
        The header parses but pixel data is truncated or unreadable.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(str(path))
    try:
        im = Image.open(path)
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(f"{path}: not a PNG or PGM image") from exc
    with im:
        if im.format not in _READERS:
            raise UnsupportedFormat(f"{path}: unsupported format {im.format}")
        if im.format == "PPM" and im.mode not in ("L", "1", "I", "I;16", "I;16B"):
            raise UnsupportedFormat(f"{path}: only gray PGM files are supported")
        try:
            im.load()
        except (OSError, ValueError, SyntaxError) as exc:
            raise CorruptImage(f"{path}: {exc}") from exc
        return _pil_to_gray(im)


def _pil_to_gray(im: Image.Image) -> np.ndarray:
    mode = im.mode
    if mode == "P":
        im = im.convert("RGBA" if "transparency" in im.info else "RGB")
        mode = im.mode
    if mode in ("L", "LA"):
        arr = np.asarray(im.getchannel(0), dtype=np.uint8)
    elif mode == "1":
        arr = np.where(np.asarray(im), 255, 0).astype(np.uint8)
    elif mode in ("RGB", "RGBA", "RGBX"):
        arr = rgb_to_gray(np.asarray(im)[..., :3])
    elif mode.startswith("I"):
        raw = np.asarray(im).astype(np.int64)
        peak = 65535 if raw.max(initial=0) > 255 else 255
        arr = ((raw * 255 + peak // 2) // peak).astype(np.uint8)
    else:
        raise UnsupportedFormat(f"unsupported pixel mode {mode}")
    return np.ascontiguousarray(arr)


def _writer_for(path: Path) -> str:
    fmt = _WRITERS.get(path.suffix.lower())
    if fmt is None:
        raise UnsupportedFormat(f"{path}: output must end in .png or .pgm")
    return fmt


def load_binary(path) -> np.ndarray:
    """Read a mask file; dark (< 128) pixels are foreground."""
    return load_gray(path) < 128


def save_binary(img, path) -> None:
    """Write a binary image with foreground as 0 and background as 255."""
    mask = as_binary(img)
    save_gray(np.where(mask, FG_VALUE, BG_VALUE).astype(np.uint8), path)


def save_gray(img, path) -> None:
    path = Path(path)
    fmt = _writer_for(path)
    Image.fromarray(as_gray(img), mode="L").save(path, format=fmt)


def histogram(img) -> np.ndarray:
    """256-bin intensity counts (int64)."""
    return np.bincount(as_gray(img).ravel(), minlength=256).astype(np.int64)


@dataclass(frozen=True)
class IntegralImages:
    """Zero-padded prefix sums: ``sum[y, x]`` covers rows ``[0, y)`` and cols ``[0, x)``."""

    sum: np.ndarray
    sq_sum: np.ndarray

    @property
    def height(self) -> int:
        return self.sum.shape[0] - 1

    @property
    def width(self) -> int:
        return self.sum.shape[1] - 1


def integral(img) -> IntegralImages:
    a = as_gray(img).astype(np.int64)
    h, w = a.shape
    s = np.zeros((h + 1, w + 1), dtype=np.int64)
    sq = np.zeros((h + 1, w + 1), dtype=np.int64)
    s[1:, 1:] = a.cumsum(0).cumsum(1)
    sq[1:, 1:] = (a * a).cumsum(0).cumsum(1)
    return IntegralImages(s, sq)


def window_bounds(n: int, window: int, start: int = 0, stop: int | None = None) -> Tuple[np.ndarray, np.ndarray]:
    """Clamped [lo, hi) window extents along one axis for centers ``start..stop-1``."""
    stop = n if stop is None else stop
    r = window // 2
    c = np.arange(start, stop)
    return np.clip(c - r, 0, n), np.clip(c + r + 1, 0, n)


def window_sums(ii: IntegralImages, window: int, rows=None, cols=None):
    """Per-pixel window sum, squared sum and pixel count over a region.

    ``rows``/``cols`` are ``(start, stop)`` pairs; the default is the whole
    image. All three outputs are exact int64 arrays.
    """
    h, w = ii.height, ii.width
    r0, r1 = rows if rows is not None else (0, h)
    c0, c1 = cols if cols is not None else (0, w)
    y0, y1 = window_bounds(h, window, r0, r1)
    x0, x1 = window_bounds(w, window, c0, c1)
    Y0, Y1 = y0[:, None], y1[:, None]
    X0, X1 = x0[None, :], x1[None, :]

    def box(t):
        return t[Y1, X1] - t[Y0, X1] - t[Y1, X0] + t[Y0, X0]

    count = (Y1 - Y0) * (X1 - X0)
    return box(ii.sum), box(ii.sq_sum), count


def mean_std_from_sums(s, sq, n):
    """Population mean and std from exact integer window sums.

    The variance numerator ``n*sq - s*s`` is formed in integers, so constant
    windows give a std of exactly 0.
    """
    s = np.asarray(s, dtype=np.int64)
    sq = np.asarray(sq, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    m = s / n
    spread = np.maximum(n * sq - s * s, 0)
    return m, np.sqrt(spread.astype(np.float64)) / n


def local_mean_std(ii: IntegralImages, center: Tuple[int, int], window: int) -> Tuple[float, float]:
    """Mean and population std of the border-clamped window at ``center = (row, col)``."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    y, x = center
    s, sq, n = window_sums(ii, window, (y, y + 1), (x, x + 1))
    m, sd = mean_std_from_sums(s, sq, n)
    return float(m[0, 0]), float(sd[0, 0])


@dataclass(frozen=True)
class ComponentSet:
    labels: np.ndarray
    sizes: np.ndarray
    count: int


_EIGHT = np.ones((3, 3), dtype=bool)


def connected_components(img) -> ComponentSet:
    """8-connected foreground labeling.

    Labels are numbered in raster order of each component's first pixel;
    ``sizes[0]`` is unused and kept at 0 so ``sizes[c]`` indexes by label.
    """
    mask = as_binary(img)
    labels, count = ndimage.label(mask, structure=_EIGHT)
    sizes = np.bincount(labels.ravel(), minlength=count + 1).astype(np.int64)
    sizes[0] = 0
    return ComponentSet(labels, sizes, int(count))

