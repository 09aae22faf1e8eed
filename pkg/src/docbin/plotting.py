"""Figures written next to bench and sweep reports."""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}

_PANELS = (("fm", "FM (%)"), ("fmp", "pseudo-FM (%)"), ("drd", "DRD (lower is better)"), ("psnr", "PSNR (dB)"))


def _finite(v):
    return v is not None and not math.isinf(v) and not math.isnan(v)


def plot_bench(result, path) -> None:
    """Four bar panels (FM, pseudo-FM, DRD, PSNR), methods in report order."""
    names = [s.method for s in result.summaries]
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, 4, figsize=(11, 3.2))
        for ax, (key, label) in zip(axes, _PANELS):
            vals = [getattr(s, key) for s in result.summaries]
            heights = [v if _finite(v) else 0.0 for v in vals]
            bars = ax.bar(range(len(names)), heights, color="0.55")
            for bar, v in zip(bars, vals):
                if v is not None and not _finite(v):
                    bar.set_hatch("//")
            ax.set_xticks(range(len(names)))
            ax.set_xticklabels(names, rotation=45, ha="right")
            ax.set_title(label)
        fig.suptitle(f"{result.images} image(s); ranked by rank-sum score")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_sweep(param: str, rows, path) -> None:
    """FM and runtime against the swept parameter, side by side."""
    xs = [r.value for r in rows]
    numeric = all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in xs)
    pos = xs if numeric else list(range(len(xs)))
    with plt.rc_context(_RC):
        fig, (left, right) = plt.subplots(1, 2, figsize=(8, 3.2))
        left.plot(pos, [r.fm if _finite(r.fm) else float("nan") for r in rows], "o-", color="k")
        left.set_ylabel("mean FM (%)")
        right.plot(pos, [r.seconds for r in rows], "s--", color="k")
        right.set_ylabel("mean seconds per image")
        for ax in (left, right):
            ax.set_xlabel(param)
            if not numeric:
                ax.set_xticks(pos)
                ax.set_xticklabels([str(x) for x in xs])
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
