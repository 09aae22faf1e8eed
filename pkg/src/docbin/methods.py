"""Name-based dispatch over every binarization method."""
from __future__ import annotations

import numpy as np

from .config import RunConfig
from .hybrid import run_pipeline
from .raster import as_gray, histogram
from .threshold_global import apply_threshold, otsu, tsmo
from .threshold_local import bernsen, niblack, nick, sauvola
from .errors import DegenerateHistogram

METHODS = ("otsu", "tsmo", "niblack", "sauvola", "nick", "bernsen", "hybrid")


def binarize(img, method: str, cfg: RunConfig = RunConfig()):
    """Run ``method`` on a gray image; returns ``(mask, trace)``.

    ``trace`` is a :class:`~docbin.hybrid.PipelineTrace` for ``hybrid`` and
    ``None`` otherwise. Single-level pages come back all background from the
    histogram methods.
    """
    a = as_gray(img)
    mode = cfg.local_stats
    if method == "otsu":
        res = otsu(histogram(a))
        mask = np.zeros(a.shape, bool) if res.degenerate else apply_threshold(a, res.threshold)
        return mask, None
    if method == "tsmo":
        try:
            res = tsmo(histogram(a), cfg.hybrid.groups)
        except DegenerateHistogram:
            return np.zeros(a.shape, bool), None
        # the darkest of the three classes is the ink
        return apply_threshold(a, res.t_o1), None
    if method == "niblack":
        return niblack(a, cfg.niblack, mode), None
    if method == "sauvola":
        return sauvola(a, cfg.sauvola, mode), None
    if method == "nick":
        return nick(a, cfg.nick, mode), None
    if method == "bernsen":
        return bernsen(a, cfg.bernsen, mode), None
    if method == "hybrid":
        return run_pipeline(a, cfg.hybrid, cfg.postprocess, mode)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
