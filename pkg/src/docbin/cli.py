"""Command-line front end: ``docbin binarize | evaluate | bench | sweep``.

Exit codes: 0 success, 1 bad arguments or config, 2 I/O problems (missing or
unreadable files, size mismatch, empty dataset), 3 processing errors,
4 benchmark finished but some images failed and were excluded.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .bench import find_pairs, run_bench, run_sweep, sweep_csv
from .config import load_config, resolve_key
from .errors import (
    CorruptImage,
    DimensionMismatch,
    DocbinError,
    InvalidParams,
    UnsupportedFormat,
)
from .methods import METHODS, binarize
from .metrics import CRITERIA, evaluate, fmt_value, json_value
from .raster import load_binary, load_gray, save_binary

log = logging.getLogger("docbin")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_PROCESSING, EXIT_PARTIAL = 0, 1, 2, 3, 4
DEFAULT_BENCH_METHODS = "otsu,niblack,sauvola,nick,hybrid"
_IO_ERRORS = (OSError, UnsupportedFormat, CorruptImage)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def threads_from_env(override=None) -> int:
    """Worker count: ``--threads`` wins, then ``BINARIZE_THREADS``; 0 means one per CPU."""
    n = override
    if n is None:
        raw = os.environ.get("BINARIZE_THREADS", "").strip()
        try:
            n = int(raw) if raw else 0
        except ValueError:
            log.warning("ignoring non-integer BINARIZE_THREADS=%r", raw)
            n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _methods(text: str):
    names = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in names if m not in METHODS]
    if bad or not names:
        raise UsageError(f"unknown method(s) {', '.join(bad) or '(none)'}; choose from {', '.join(METHODS)}")
    return names


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_binarize(args) -> int:
    cfg = load_config(args.config)
    img = load_gray(args.input)
    try:
        mask, trace = binarize(img, args.method, cfg)
    except DocbinError as exc:
        log.error("processing failed: %s", exc)
        return EXIT_PROCESSING
    out = Path(args.out)
    save_binary(mask, out)
    if args.trace:
        doc = {"method": args.method}
        if trace is not None:
            doc.update(trace.to_dict())
        _write_text(out.with_suffix(".trace.json"), json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    pred = load_binary(args.pred)
    gt = load_binary(args.gt)
    if pred.shape != gt.shape:
        raise DimensionMismatch(f"prediction {pred.shape} vs ground truth {gt.shape}")
    scores = evaluate(pred, gt, CRITERIA)
    if args.format == "json":
        print(json.dumps({k: json_value(v) for k, v in scores.items()}, indent=2))
    else:
        print("fm,pfm,drd,psnr")
        print(",".join(fmt_value(scores[c]) for c in CRITERIA))
    return EXIT_OK


def _report_paths(report: Path):
    stem = report.with_suffix("")
    return stem.with_name(stem.name + ".images.csv"), report.with_suffix(".png")


def cmd_bench(args) -> int:
    methods = _methods(args.methods)
    cfg = load_config(args.config)
    manifest = find_pairs(args.dataset, args.gt_suffix)
    if not manifest.pairs:
        log.error("no (image, image%s) pairs found in %s", args.gt_suffix, args.dataset)
        return EXIT_IO
    result = run_bench(manifest, methods, cfg, threads_from_env(args.threads))
    if not result.images:
        log.error("every image failed")
        return EXIT_PARTIAL
    report = Path(args.report)
    _write_text(report, result.to_json() if report.suffix.lower() == ".json" else result.to_csv())
    per_image, figure = _report_paths(report)
    _write_text(per_image, result.report.to_csv())
    if not args.no_figure:
        from .plotting import plot_bench

        plot_bench(result, figure)
    return EXIT_PARTIAL if result.failures else EXIT_OK


def _parse_values(text: str):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(json.loads(tok))
        except json.JSONDecodeError:
            out.append(tok)
    if not out:
        raise UsageError("--values needs at least one value")
    return out


def cmd_sweep(args) -> int:
    try:
        resolve_key(args.param)
    except InvalidParams as exc:
        raise UsageError(str(exc)) from exc
    values = _parse_values(args.values)
    _methods(args.method)
    cfg = load_config(args.config)
    manifest = find_pairs(args.dataset, args.gt_suffix)
    if not manifest.pairs:
        log.error("no (image, image%s) pairs found in %s", args.gt_suffix, args.dataset)
        return EXIT_IO
    rows, failures = run_sweep(manifest, args.param, values, cfg, args.method, threads_from_env(args.threads))
    report = Path(args.report)
    if report.suffix.lower() == ".json":
        doc = [{"value": r.value, "fm": json_value(r.fm), "seconds": r.seconds} for r in rows]
        _write_text(report, json.dumps({"param": args.param, "rows": doc}, indent=2))
    else:
        _write_text(report, sweep_csv(args.param, rows))
    if not args.no_figure:
        from .plotting import plot_sweep

        plot_sweep(args.param, rows, report.with_suffix(".png"))
    return EXIT_PARTIAL if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="docbin", description="Document image binarization toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("binarize", help="binarize one image")
    b.add_argument("input")
    b.add_argument("--method", required=True, choices=METHODS)
    b.add_argument("--config")
    b.add_argument("--out", required=True)
    b.add_argument("--trace", action="store_true", help="also write <out>.trace.json")
    b.set_defaults(func=cmd_binarize)

    e = sub.add_parser("evaluate", help="score a prediction against ground truth")
    e.add_argument("pred")
    e.add_argument("gt")
    e.add_argument("--format", choices=("json", "csv"), default="json")
    e.set_defaults(func=cmd_evaluate)

    for name, func, helptext in (("bench", cmd_bench, "rank methods over a dataset"),
                                 ("sweep", cmd_sweep, "vary one config value over a dataset")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("dataset")
        s.add_argument("--gt-suffix", default="_GT")
        s.add_argument("--config")
        s.add_argument("--report", required=True, help=".csv or .json")
        s.add_argument("--threads", type=int, default=None)
        s.add_argument("--no-figure", action="store_true")
        s.set_defaults(func=func)
        if name == "bench":
            s.add_argument("--methods", default=DEFAULT_BENCH_METHODS, help="comma-separated")
        else:
            s.add_argument("--param", required=True)
            s.add_argument("--values", required=True, help="comma-separated, JSON literals")
            s.add_argument("--method", default="hybrid")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, InvalidParams) as exc:
        parser.print_usage(sys.stderr)
        print(f"docbin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (*_IO_ERRORS, DimensionMismatch) as exc:
        print(f"docbin: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DocbinError as exc:
        print(f"docbin: processing error: {exc}", file=sys.stderr)
        return EXIT_PROCESSING


if __name__ == "__main__":
    sys.exit(main())
