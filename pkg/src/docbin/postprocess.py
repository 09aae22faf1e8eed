"""Morphological clean-up of a binarized page.

Every pass reads one snapshot of its input and writes a new mask, so results
never depend on scan order. Pixels outside the image count as background.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams
from .raster import as_binary, connected_components

__all__ = [
    "PostprocessParams",
    "remove_isolated",
    "fill_gaps",
    "filter_components",
    "fix_pixel_artifacts",
    "postprocess",
]


@dataclass(frozen=True)
class PostprocessParams:
    lam: float = 15.0

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidParams("lambda must be > 0")


def _neighbour_counts(mask: np.ndarray):
    """(orthogonal, diagonal) foreground-neighbour counts per pixel."""
    p = np.pad(mask, 1).astype(np.uint8)
    h, w = mask.shape
    up, down = p[0:h, 1:w + 1], p[2:h + 2, 1:w + 1]
    left, right = p[1:h + 1, 0:w], p[1:h + 1, 2:w + 2]
    orth = up + down + left + right
    diag = p[0:h, 0:w] + p[0:h, 2:w + 2] + p[2:h + 2, 0:w] + p[2:h + 2, 2:w + 2]
    return orth, diag


def remove_isolated(bin_img) -> np.ndarray:
    """Drop foreground pixels with no foreground among their 8 neighbours."""
    mask = as_binary(bin_img)
    orth, diag = _neighbour_counts(mask)
    return mask & ((orth + diag) > 0)


def fill_gaps(bin_img) -> np.ndarray:
    """Set background pixels whose 4 orthogonal neighbours are all foreground."""
    mask = as_binary(bin_img)
    orth, _ = _neighbour_counts(mask)
    return mask | (orth == 4)


def filter_components(bin_img, p: PostprocessParams = PostprocessParams()) -> np.ndarray:
    """Erase every component with more than ``lam * mean / std`` pixels.

    ``mean`` and ``std`` are the population statistics of the component
    sizes. Note that this rule removes the *large* components. With fewer
    than two components, or equal sizes (std 0), the mask is returned as is.
    """
    mask = as_binary(bin_img)
    cc = connected_components(mask)
    if cc.count < 2:
        return mask.copy()
    sizes = cc.sizes[1:].astype(np.float64)
    m, s = sizes.mean(), sizes.std()
    if s == 0:
        return mask.copy()
    drop = np.zeros(cc.count + 1, dtype=bool)
    drop[1:] = sizes > p.lam * m / s
    return mask & ~drop[cc.labels]


def fix_pixel_artifacts(bin_img) -> np.ndarray:
    """Remove single-pixel convexities and fill single-pixel concavities.

    Convexity: foreground with exactly one orthogonal and at most two
    diagonal foreground neighbours. Concavity: background with exactly three
    orthogonal foreground neighbours. Both tests use the input snapshot.
    """
    mask = as_binary(bin_img)
    orth, diag = _neighbour_counts(mask)
    convex = mask & (orth == 1) & (diag <= 2)
    concave = ~mask & (orth == 3)
    return (mask & ~convex) | concave


def postprocess(bin_img, p: PostprocessParams = PostprocessParams()) -> np.ndarray:
    mask = remove_isolated(bin_img)
    mask = fill_gaps(mask)
    mask = filter_components(mask, p)
    return fix_pixel_artifacts(mask)
