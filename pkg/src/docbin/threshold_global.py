"""Otsu's threshold and the two-stage multi-threshold Otsu (TSMO) variant."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateHistogram
from .raster import as_gray

__all__ = ["OtsuResult", "TsmoResult", "otsu", "tsmo", "apply_threshold", "three_class_variance"]


@dataclass(frozen=True)
class OtsuResult:
    threshold: int
    between_class_variance: float
    degenerate: bool = False


@dataclass(frozen=True)
class TsmoResult:
    t_o1: int
    t_o2: int
    between_class_variance: float


def _as_hist(hist) -> np.ndarray:
    h = np.asarray(hist)
    if h.shape != (256,):
        raise ValueError(f"histogram must have 256 bins, got shape {h.shape}")
    if np.any(h < 0):
        raise ValueError("histogram counts must be non-negative")
    return h.astype(np.int64)


def otsu(hist) -> OtsuResult:
    """Threshold maximizing w0*w1*(mu0 - mu1)^2 with classes {p <= t} and {p > t}.

    All 256 candidates are scored in exact rational arithmetic, so plateaus
    tie exactly and the smallest maximizing ``t`` is returned. A histogram
    with a single populated bin yields that bin with variance 0 and
    ``degenerate=True``.
    """
    h = _as_hist(hist)
    total = int(h.sum())
    if total == 0:
        raise DegenerateHistogram("empty histogram")
    populated = np.flatnonzero(h)
    if len(populated) == 1:
        return OtsuResult(int(populated[0]), 0.0, True)

    counts = [int(c) for c in np.cumsum(h)]
    sums = [int(c) for c in np.cumsum(h * np.arange(256))]
    grand = sums[-1]
    best_t, best_num, best_den = 0, 0, 1
    for t in range(256):
        n0 = counts[t]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        d = sums[t] * n1 - (grand - sums[t]) * n0
        num, den = d * d, total * total * n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return OtsuResult(best_t, best_num / best_den, False)


def three_class_variance(counts, sums, total, grand, t1, t2):
    """Between-class variance of {p <= t1}, {t1 < p <= t2}, {p > t2}.

    ``counts``/``sums`` are cumulative pixel counts and intensity sums indexed
    by threshold; ``t1``/``t2`` broadcast. Empty classes contribute 0.
    """
    mu = grand / total
    n0, s0 = counts[t1], sums[t1]
    n1, s1 = counts[t2] - n0, sums[t2] - s0
    n2, s2 = total - counts[t2], grand - sums[t2]
    out = 0.0
    for n, s in ((n0, s0), (n1, s1), (n2, s2)):
        n = np.asarray(n, dtype=np.float64)
        safe = np.where(n > 0, n, 1.0)
        out = out + np.where(n > 0, n / total * (s / safe - mu) ** 2, 0.0)
    return out


def _best_pair(values: np.ndarray, t1s: np.ndarray, t2s: np.ndarray):
    # first maximum in row-major order = smallest t1, then smallest t2
    flat = int(np.argmax(values))
    i, j = np.unravel_index(flat, values.shape)
    return int(t1s[i]), int(t2s[j]), float(values[i, j])


def tsmo(hist, groups: int = 32) -> TsmoResult:
    """Two-stage multi-threshold Otsu producing ``t_o1 < t_o2``.

    Stage 1 scores every pair of group boundaries of the histogram folded
    into ``groups`` equal-width groups. Stage 2 searches ``t_o1`` over the
    two groups on either side of the first winning boundary and ``t_o2`` from
    there up to the end of the groups around the second, so plateaus resolve
    the way a full search would. Ties go to the smallest ``t_o1``, then the
    smallest ``t_o2``.
    """
    h = _as_hist(hist)
    if groups < 2 or 256 % groups:
        raise ValueError("groups must divide 256 and be at least 2")
    if np.count_nonzero(h) < 2:
        raise DegenerateHistogram("fewer than two populated bins")
    total = float(h.sum())
    counts = np.cumsum(h).astype(np.float64)
    sums = np.cumsum(h * np.arange(256)).astype(np.float64)
    grand = sums[-1]
    width = 256 // groups

    # stage 1: thresholds restricted to the last bin of each group
    bounds = np.arange(groups) * width + width - 1
    coarse = three_class_variance(counts, sums, total, grand, bounds[:, None], bounds[None, :])
    coarse = np.where(bounds[:, None] < bounds[None, :], coarse, -np.inf)
    g1, g2 = np.unravel_index(int(np.argmax(coarse)), coarse.shape)

    # stage 2: exhaustive near the winning boundaries
    t1s = np.arange(g1 * width, min((g1 + 2) * width, 256))
    t2s = np.arange(t1s[0] + 1, min((g2 + 2) * width, 256))
    fine = three_class_variance(counts, sums, total, grand, t1s[:, None], t2s[None, :])
    fine = np.where(t1s[:, None] < t2s[None, :], fine, -np.inf)
    t1, t2, var = _best_pair(fine, t1s, t2s)
    return TsmoResult(t1, t2, var)


def apply_threshold(img, t: int) -> np.ndarray:
    """Foreground where intensity <= ``t``."""
    if not 0 <= t <= 255:
        raise ValueError("threshold must lie in [0, 255]")
    return as_gray(img) <= t
