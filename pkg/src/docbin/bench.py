"""Dataset pairing, method benchmarking and parameter sweeps."""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import RunConfig
from .errors import DimensionMismatch
from .methods import binarize
from .metrics import (
    CRITERIA,
    HIGHER_IS_BETTER,
    EvalReport,
    ImageScores,
    RankedMethod,
    evaluate,
    fmt_value,
    json_value,
    rank_scores,
)
from .raster import load_binary, load_gray

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".pgm", ".tif", ".tiff", ".bmp")
REPORT_COLUMNS = ("rank", "score", "method", "fm", "fmp", "drd", "psnr", "seconds")


@dataclass
class DatasetManifest:
    name: str
    pairs: List[Tuple[Path, Path]]


def find_pairs(dataset, gt_suffix: str = "_GT") -> DatasetManifest:
    """Pair each image with the file named ``<stem><gt_suffix>.<ext>``.

    Matching is case-insensitive and accepts any supported extension on
    either side.
    """
    root = Path(dataset)
    if not root.is_dir():
        return DatasetManifest(root.name, [])
    files = sorted(p for p in root.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS)
    by_stem = {p.stem.lower(): p for p in files}
    suffix = gt_suffix.lower()
    pairs = []
    for p in files:
        stem = p.stem.lower()
        if suffix and stem.endswith(suffix):
            continue
        gt = by_stem.get(stem + suffix)
        if gt is not None and gt != p:
            pairs.append((p, gt))
    return DatasetManifest(root.name, pairs)


def load_ground_truth(path) -> np.ndarray:
    """Ground truth as a mask: dark (< 128) pixels are ink."""
    return load_binary(path)


@dataclass
class MethodSummary:
    method: str
    rank: int
    score: int
    fm: Optional[float]
    fmp: Optional[float]
    drd: Optional[float]
    psnr: Optional[float]
    seconds: float
    mean_seconds: float


@dataclass
class BenchResult:
    report: EvalReport
    summaries: List[MethodSummary]
    images: int
    failures: List[Tuple[str, str]] = field(default_factory=list)

    def metric_table(self) -> Dict[str, Dict[str, Optional[float]]]:
        return {s.method: {"fm": s.fm, "fmp": s.fmp, "drd": s.drd, "psnr": s.psnr} for s in self.summaries}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for s in self.summaries:
            writer.writerow([s.rank, s.score, s.method, fmt_value(s.fm), fmt_value(s.fmp),
                             fmt_value(s.drd), fmt_value(s.psnr), f"{s.seconds:.4f}"])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "images": self.images,
            "methods": [
                {
                    "rank": s.rank, "score": s.score, "method": s.method,
                    "fm": json_value(s.fm), "fmp": json_value(s.fmp),
                    "drd": json_value(s.drd), "psnr": json_value(s.psnr),
                    "seconds": s.seconds, "mean_seconds": s.mean_seconds,
                }
                for s in self.summaries
            ],
            "per_image": json.loads(self.report.to_json())["images"],
            "failures": [{"image": i, "error": e} for i, e in self.failures],
        }
        return json.dumps(doc, indent=2)


def _run_image(pair, methods, cfg: RunConfig):
    img_path, gt_path = pair
    img = load_gray(img_path)
    gt = load_ground_truth(gt_path)
    if img.shape != gt.shape:
        raise DimensionMismatch(f"{img_path.name} {img.shape} vs ground truth {gt.shape}")
    rows, times = [], {}
    for m in methods:
        t0 = time.perf_counter()
        mask, _ = binarize(img, m, cfg)
        times[m] = time.perf_counter() - t0
        scores = evaluate(mask, gt, cfg.metrics)
        rows.append(ImageScores(img_path.name, m, **scores))
    return rows, times


def run_bench(manifest: DatasetManifest, methods: Sequence[str], cfg: RunConfig = RunConfig(),
              threads: int = 1) -> BenchResult:
    """Run every method on every pair and rank the per-method means.

    An image whose loading or processing fails is dropped for all methods and
    recorded in ``failures``. Seconds are wall-clock totals of the
    binarization calls only.
    """
    methods = list(dict.fromkeys(methods))
    work = list(manifest.pairs)

    def job(pair):
        try:
            return pair, _run_image(pair, methods, cfg), None
        except Exception as exc:  # noqa: BLE001 - one bad page must not sink the run
            return pair, None, f"{type(exc).__name__}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(job, work))
    else:
        outcomes = [job(p) for p in work]

    report = EvalReport()
    seconds = {m: 0.0 for m in methods}
    failures = []
    done = 0
    for pair, result, err in outcomes:
        if err is not None:
            log.warning("skipping %s: %s", pair[0].name, err)
            failures.append((pair[0].name, err))
            continue
        rows, times = result
        report.rows.extend(rows)
        for m, t in times.items():
            seconds[m] += t
        done += 1

    summaries: List[MethodSummary] = []
    if done:
        agg = report.aggregate()
        crits = [c for c in CRITERIA if c in cfg.metrics]
        if crits:
            ranked = rank_scores({m: [agg[m][c] for c in crits] for m in methods},
                                 [HIGHER_IS_BETTER[c] for c in crits])
        else:
            ranked = [RankedMethod(m, 0, 1, ()) for m in methods]
        for r in ranked:
            a = agg[r.method]
            summaries.append(MethodSummary(
                r.method, r.rank, r.score, a["fm"], a["pfm"], a["drd"], a["psnr"],
                seconds[r.method], seconds[r.method] / done,
            ))
    return BenchResult(report, summaries, done, failures)


@dataclass
class SweepRow:
    value: object
    fm: Optional[float]
    seconds: float


def run_sweep(manifest: DatasetManifest, param: str, values: Sequence, cfg: RunConfig = RunConfig(),
              method: str = "hybrid", threads: int = 1) -> Tuple[List[SweepRow], List[Tuple[str, str]]]:
    """One bench run of ``method`` per parameter value: (value, mean FM, mean seconds per image)."""
    configs = [cfg.with_value(param, v) for v in values]
    rows, failures = [], []
    for v, c in zip(values, configs):
        res = run_bench(manifest, [method], c, threads)
        failures.extend(res.failures)
        s = res.summaries[0] if res.summaries else None
        rows.append(SweepRow(v, s.fm if s else None, s.mean_seconds if s else float("nan")))
    return rows, failures


def sweep_csv(param: str, rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([param, "fm", "seconds"])
    for r in rows:
        writer.writerow([r.value, fmt_value(r.fm), f"{r.seconds:.6f}"])
    return buf.getvalue()
