"""DIBCO-style evaluation: F-Measure, pseudo F-Measure, DRD, PSNR and rank-sum scores.

Foreground (ink) is the positive class throughout.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy import ndimage
from scipy.stats import rankdata
from skimage.morphology import thin

from .errors import DimensionMismatch, EmptyGroundTruth, EmptyTable, UndefinedDistortion
from .raster import as_binary

__all__ = [
    "Confusion",
    "DRD_WEIGHTS",
    "drd_weights",
    "confusion",
    "f_measure",
    "pseudo_f_measure",
    "nubn",
    "drd",
    "psnr",
    "rank_scores",
    "RankedMethod",
    "evaluate",
    "ImageScores",
    "EvalReport",
    "CRITERIA",
    "HIGHER_IS_BETTER",
]

CRITERIA = ("fm", "pfm", "drd", "psnr")
HIGHER_IS_BETTER = {"fm": True, "pfm": True, "drd": False, "psnr": True}


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def _pair(bin_img, gt):
    b, g = as_binary(bin_img), as_binary(gt)
    if b.shape != g.shape:
        raise DimensionMismatch(f"prediction {b.shape} vs ground truth {g.shape}")
    return b, g


def confusion(bin_img, gt) -> Confusion:
    b, g = _pair(bin_img, gt)
    tp = int(np.count_nonzero(b & g))
    fp = int(np.count_nonzero(b & ~g))
    fn = int(np.count_nonzero(~b & g))
    return Confusion(tp, fp, fn, b.size - tp - fp - fn)


def _harmonic(recall: float, precision: float) -> float:
    if recall + precision == 0:
        return 0.0
    return 100.0 * 2.0 * recall * precision / (recall + precision)


def f_measure(c: Confusion) -> float:
    """Percent harmonic mean of recall and precision; 0 when tp is 0."""
    if c.tp == 0:
        return 0.0
    return _harmonic(c.tp / (c.tp + c.fn), c.tp / (c.tp + c.fp))


def stroke_width(gt) -> float:
    """Median stroke width of the ground-truth ink, measured along its skeleton."""
    g = as_binary(gt)
    skel = thin(g)
    if not skel.any():
        return 0.0
    depth = ndimage.distance_transform_edt(g)
    return float(np.median(2.0 * depth[skel] - 1.0))


def pseudo_f_measure(bin_img, gt) -> float:
    """Skeleton-based recall combined with stroke-tolerant precision.

    Pseudo-recall is the fraction of the ground-truth skeleton covered by the
    prediction. Pseudo-precision counts predicted ink as correct when it lies
    within half the median stroke width of ground-truth ink. This follows the
    DIBCO definition in spirit; it does not reproduce its per-component
    distance weighting.
    """
    b, g = _pair(bin_img, gt)
    if not g.any():
        raise EmptyGroundTruth("ground truth has no foreground")
    skel = thin(g)
    recall = np.count_nonzero(b & skel) / np.count_nonzero(skel)
    radius = int(stroke_width(g) // 2)
    tolerant = ndimage.binary_dilation(g, np.ones((3, 3), bool), iterations=radius) if radius else g
    n_pred = np.count_nonzero(b)
    precision = np.count_nonzero(b & tolerant) / n_pred if n_pred else 0.0
    recall = min(max(recall, 0.0), 1.0)
    precision = min(max(precision, 0.0), 2.0)
    return _harmonic(recall, precision)


def drd_weights(size: int = 5) -> np.ndarray:
    """Normalized reciprocal-distance matrix with a zero center."""
    c = size // 2
    y, x = np.mgrid[-c:c + 1, -c:c + 1]
    dist = np.hypot(y, x)
    w = np.zeros((size, size))
    np.divide(1.0, dist, out=w, where=dist > 0)
    return w / w.sum()


DRD_WEIGHTS = drd_weights()


def nubn(gt, block: int = 8) -> int:
    """Number of ``block x block`` ground-truth blocks holding both ink and paper."""
    g = as_binary(gt)
    h, w = g.shape
    rows, cols = -(-h // block), -(-w // block)
    padded = np.zeros((rows * block, cols * block), dtype=np.int64)
    padded[:h, :w] = g
    ink = padded.reshape(rows, block, cols, block).sum(axis=(1, 3))
    bh = np.minimum(block, h - np.arange(rows) * block)
    bw = np.minimum(block, w - np.arange(cols) * block)
    area = bh[:, None] * bw[None, :]
    return int(np.count_nonzero((ink > 0) & (ink < area)))


def drd(bin_img, gt) -> float:
    """Distance reciprocal distortion.

    Each flipped pixel is charged the weighted share of its 5x5 ground-truth
    neighbourhood (edge-replicated) that disagrees with the predicted value;
    the total is divided by :func:`nubn`.
    """
    b, g = _pair(bin_img, gt)
    diff = b != g
    if not diff.any():
        return 0.0
    blocks = nubn(g)
    if blocks == 0:
        raise UndefinedDistortion("ground truth has no non-uniform 8x8 block")
    r = DRD_WEIGHTS.shape[0] // 2
    h, w = g.shape
    gp = np.pad(g, r, mode="edge")
    bv = b[diff]
    ys, xs = np.nonzero(diff)
    total = 0.0
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            wt = DRD_WEIGHTS[dy + r, dx + r]
            if wt == 0:
                continue
            total += wt * np.count_nonzero(bv != gp[ys + r + dy, xs + r + dx])
    return float(total / blocks)


def psnr(bin_img, gt) -> float:
    """PSNR on {0, 1} images with peak 1; ``inf`` when the images agree."""
    b, g = _pair(bin_img, gt)
    mse = np.count_nonzero(b != g) / b.size
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


@dataclass(frozen=True)
class RankedMethod:
    method: str
    score: int
    rank: int
    ranks: tuple


def rank_scores(table: Mapping[str, Sequence[float]], higher_better: Sequence[bool]) -> List[RankedMethod]:
    """Rank-sum scores, best (lowest) first.

    For each criterion methods are ranked 1..n, tied values sharing the
    smallest rank of their block; a method's score is the sum of its ranks.
    The final ``rank`` uses the same tie rule on scores.
    """
    names = list(table)
    if len(names) < 1 or not higher_better:
        raise EmptyTable("need at least one method and one criterion")
    values = np.array([[float(v) for v in table[n]] for n in names], dtype=np.float64)
    if values.shape[1] != len(higher_better):
        raise ValueError("each method needs one value per criterion")
    per_crit = []
    for k, hb in enumerate(higher_better):
        col = values[:, k]
        per_crit.append(rankdata(-col if hb else col, method="min").astype(int))
    ranks = np.stack(per_crit, axis=1)
    scores = ranks.sum(axis=1)
    final = rankdata(scores, method="min").astype(int)
    order = sorted(range(len(names)), key=lambda i: (scores[i], i))
    return [RankedMethod(names[i], int(scores[i]), int(final[i]), tuple(int(r) for r in ranks[i])) for i in order]


def evaluate(bin_img, gt, metrics: Sequence[str] = CRITERIA) -> Dict[str, float]:
    out: Dict[str, float] = {}
    if "fm" in metrics:
        out["fm"] = f_measure(confusion(bin_img, gt))
    if "pfm" in metrics:
        out["pfm"] = pseudo_f_measure(bin_img, gt)
    if "drd" in metrics:
        out["drd"] = drd(bin_img, gt)
    if "psnr" in metrics:
        out["psnr"] = psnr(bin_img, gt)
    return out


def fmt_value(v: Optional[float]) -> str:
    if v is None:
        return ""
    if math.isinf(v):
        return "INF"
    return f"{v:.4f}"


def json_value(v: Optional[float]):
    if v is not None and math.isinf(v):
        return "INF"
    return v


@dataclass
class ImageScores:
    image: str
    method: str
    fm: Optional[float] = None
    pfm: Optional[float] = None
    drd: Optional[float] = None
    psnr: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: json_value(v) if k in CRITERIA else v for k, v in asdict(self).items()}


@dataclass
class EvalReport:
    """Per-image scores plus per-method means."""

    rows: List[ImageScores] = field(default_factory=list)

    def methods(self) -> List[str]:
        seen: Dict[str, None] = {}
        for r in self.rows:
            seen.setdefault(r.method, None)
        return list(seen)

    def aggregate(self) -> Dict[str, Dict[str, Optional[float]]]:
        out = {}
        for m in self.methods():
            rows = [r for r in self.rows if r.method == m]
            agg = {}
            for c in CRITERIA:
                vals = [getattr(r, c) for r in rows if getattr(r, c) is not None]
                agg[c] = float(np.mean(vals)) if vals else None
            out[m] = agg
        return out

    def to_json(self) -> str:
        agg = {m: {c: json_value(v) for c, v in a.items()} for m, a in self.aggregate().items()}
        return json.dumps({"images": [r.to_dict() for r in self.rows], "aggregate": agg}, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["image", "method", "FM", "pFM", "DRD", "PSNR"])
        for r in self.rows:
            writer.writerow([r.image, r.method] + [fmt_value(getattr(r, c)) for c in CRITERIA])
        return buf.getvalue()
