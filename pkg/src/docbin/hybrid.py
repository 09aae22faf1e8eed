"""Contrast-driven hybrid binarization.

The page contrast picks a global threshold (Otsu or one of the two TSMO
thresholds); tiles whose ink density is a statistical outlier ("smear") are
then re-binarized with Nick's method, using the full image as window context.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Iterator, Optional

import numpy as np

from .enhance import ClaheParams, gate_and_enhance, local_average_contrast
from .errors import DegenerateHistogram, InvalidParams
from .postprocess import PostprocessParams, postprocess
from .raster import as_binary, as_gray, histogram
from .threshold_global import apply_threshold, otsu, tsmo
from .threshold_local import NICK_DEFAULTS, LocalParams, Region, nick_region

__all__ = [
    "HybridParams",
    "ContrastCategory",
    "GlobalChoice",
    "SmearMap",
    "PipelineTrace",
    "classify_contrast",
    "global_choice",
    "select_global_threshold",
    "detect_smear",
    "hybrid_binarize",
    "run_pipeline",
]


@dataclass(frozen=True)
class HybridParams:
    t1: float = 0.03
    t2: float = 0.04
    t3: float = 0.085
    d_min: float = 5.0
    d_max: float = 25.0
    p: float = 0.5
    k_smear: float = 8.0
    segment: int = 35
    groups: int = 32
    nick: LocalParams = NICK_DEFAULTS
    t_ctr: float = 0.02
    clahe: ClaheParams = field(default_factory=ClaheParams)
    lam: float = 15.0

    def __post_init__(self):
        if not 0 < self.t1 < self.t2 < self.t3 < 1:
            raise InvalidParams("need 0 < t1 < t2 < t3 < 1")
        if not 0 <= self.d_min <= self.d_max <= 255:
            raise InvalidParams("need 0 <= d_min <= d_max <= 255")
        if not 0 <= self.p <= 1:
            raise InvalidParams("p must lie in [0, 1]")
        if int(self.segment) != self.segment or self.segment < 8:
            raise InvalidParams("segment must be an integer >= 8")
        if self.groups < 2 or 256 % self.groups:
            raise InvalidParams("groups must divide 256")
        if not 0 < self.t_ctr < 1:
            raise InvalidParams("t_ctr must lie in (0, 1)")
        if not self.lam > 0:
            raise InvalidParams("lam must be > 0")


class ContrastCategory(str, Enum):
    LOW = "low"
    FUZZY = "fuzzy"
    MEDIUM = "medium"
    HIGH = "high"


def classify_contrast(ctr: float, p: HybridParams = HybridParams()) -> ContrastCategory:
    if ctr <= p.t1:
        return ContrastCategory.LOW
    if ctr <= p.t2:
        return ContrastCategory.FUZZY
    if ctr <= p.t3:
        return ContrastCategory.MEDIUM
    return ContrastCategory.HIGH


@dataclass(frozen=True)
class GlobalChoice:
    threshold: int
    source: str  # "otsu", "tsmo_low" or "tsmo_high"
    otsu: int
    tsmo_low: Optional[int]
    tsmo_high: Optional[int]
    degenerate: bool


def global_choice(hist, cat: ContrastCategory, p: HybridParams = HybridParams()) -> GlobalChoice:
    """Pick the global threshold for a contrast category, keeping the candidates."""
    hist = np.asarray(hist, dtype=np.int64)
    o = otsu(hist)
    try:
        t = tsmo(hist, p.groups)
    except DegenerateHistogram:
        return GlobalChoice(o.threshold, "otsu", o.threshold, None, None, True)

    def pick(source):
        value = {"otsu": o.threshold, "tsmo_low": t.t_o1, "tsmo_high": t.t_o2}[source]
        return GlobalChoice(value, source, o.threshold, t.t_o1, t.t_o2, o.degenerate)

    if cat is ContrastCategory.LOW:
        return pick("tsmo_high")
    if cat is ContrastCategory.MEDIUM:
        return pick("otsu")
    if cat is ContrastCategory.HIGH:
        return pick("tsmo_low")

    # fuzzy band: take T_O2 only when it sits a moderate distance from T_O
    # and the extra band it admits is small relative to Otsu's foreground
    gap = abs(t.t_o2 - o.threshold)
    below = int(hist[: o.threshold + 1].sum())
    band = int(hist[o.threshold + 1: t.t_o2 + 1].sum())
    if p.d_min <= gap <= p.d_max and band <= p.p * below:
        return pick("tsmo_high")
    return pick("otsu")


def select_global_threshold(hist, cat: ContrastCategory, p: HybridParams = HybridParams()) -> int:
    return global_choice(hist, cat, p).threshold


@dataclass(frozen=True)
class SmearMap:
    """Per-tile ink frequencies and the outlier flags derived from them."""

    flags: np.ndarray
    frequency: np.ndarray
    segment: int
    shape: tuple
    mean: float
    std: float
    cutoff: float

    @property
    def count(self) -> int:
        return int(self.flags.sum())

    def tile(self, row: int, col: int) -> Region:
        h, w = self.shape
        s = self.segment
        return Region(row * s, col * s, min(h, (row + 1) * s), min(w, (col + 1) * s))

    def suspicious(self) -> Iterator[Region]:
        for row, col in zip(*np.nonzero(self.flags)):
            yield self.tile(int(row), int(col))


def detect_smear(bin_img, p: HybridParams = HybridParams()) -> SmearMap:
    """Flag tiles whose foreground frequency exceeds ``m + k_smear * s``.

    ``m`` and ``s`` are the mean and population std of the per-tile
    frequencies. Tiles on the last row/column may be smaller than
    ``segment``; frequencies are normalized by actual tile area.
    """
    mask = as_binary(bin_img)
    seg = int(p.segment)
    h, w = mask.shape
    rows, cols = -(-h // seg), -(-w // seg)
    padded = np.zeros((rows * seg, cols * seg), dtype=np.int64)
    padded[:h, :w] = mask
    counts = padded.reshape(rows, seg, cols, seg).sum(axis=(1, 3))
    tile_h = np.minimum(seg, h - np.arange(rows) * seg)
    tile_w = np.minimum(seg, w - np.arange(cols) * seg)
    freq = counts / (tile_h[:, None] * tile_w[None, :])
    m, s = float(freq.mean()), float(freq.std())
    cutoff = m + p.k_smear * s
    return SmearMap(freq > cutoff, freq, seg, (h, w), m, s, cutoff)


@dataclass
class PipelineTrace:
    input_contrast: float
    enhanced: bool
    contrast: float
    category: str
    threshold: Optional[int]
    threshold_source: str
    otsu_threshold: int
    tsmo_t1: Optional[int]
    tsmo_t2: Optional[int]
    degenerate: bool
    suspicious_tiles: int
    total_tiles: int
    postprocessed: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def hybrid_binarize(img, p: HybridParams = HybridParams(), mode: str = "integral"):
    """Contrast gate, category-specific global threshold, Nick on smear tiles.

    Returns ``(mask, PipelineTrace)``. A page with a single gray level has
    no ink to find and comes back all background.
    """
    working, report = gate_and_enhance(as_gray(img), p.t_ctr, p.clahe)
    ctr = local_average_contrast(working, p.clahe.epsilon)
    cat = classify_contrast(ctr, p)
    choice = global_choice(histogram(working), cat, p)

    if choice.degenerate:
        mask = np.zeros(working.shape, dtype=bool)
        smear = detect_smear(mask, p)
        threshold = None
    else:
        threshold = choice.threshold
        mask = apply_threshold(working, threshold)
        smear = detect_smear(mask, p)
        for reg in smear.suspicious():
            mask[reg.top:reg.bottom, reg.left:reg.right] = nick_region(working, reg, p.nick, mode)

    trace = PipelineTrace(
        input_contrast=report.local_avg_contrast,
        enhanced=report.enhanced,
        contrast=ctr,
        category=cat.value,
        threshold=threshold,
        threshold_source=choice.source,
        otsu_threshold=choice.otsu,
        tsmo_t1=choice.tsmo_low,
        tsmo_t2=choice.tsmo_high,
        degenerate=choice.degenerate,
        suspicious_tiles=smear.count,
        total_tiles=int(smear.flags.size),
    )
    return mask, trace


def run_pipeline(img, p: HybridParams = HybridParams(), apply_postprocess: bool = True,
                 mode: str = "integral"):
    """Full method: :func:`hybrid_binarize` followed by morphological clean-up."""
    mask, trace = hybrid_binarize(img, p, mode)
    if apply_postprocess:
        mask = postprocess(mask, PostprocessParams(p.lam))
        trace.postprocessed = True
    return mask, trace
