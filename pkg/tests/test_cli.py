import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import synthetic_page
from docbin.bench import find_pairs
from docbin.cli import main, threads_from_env
from docbin.metrics import nubn
from docbin.raster import load_gray, save_binary, save_gray


@pytest.fixture
def page_png(tmp_path):
    img, gt = synthetic_page(seed=7)
    p = tmp_path / "in.png"
    save_gray(img, p)
    return p, gt


@pytest.fixture
def dataset(tmp_path):
    d = tmp_path / "ds"
    d.mkdir()
    for i in range(2):
        img, gt = synthetic_page(seed=20 + i, shape=(140, 180))
        save_gray(img, d / f"p{i}.png")
        save_binary(gt, d / f"p{i}_GT.png")
    return d


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_binarize_otsu(page_png, tmp_path):
    src, _ = page_png
    out = tmp_path / "out.png"
    assert main(["binarize", str(src), "--method", "otsu", "--out", str(out)]) == 0
    vals = np.unique(load_gray(out))
    assert set(vals.tolist()) <= {0, 255}


@pytest.mark.parametrize("method", ["tsmo", "niblack", "sauvola", "nick", "bernsen"])
def test_binarize_every_method(page_png, tmp_path, method):
    src, _ = page_png
    out = tmp_path / f"{method}.pgm"
    assert main(["binarize", str(src), "--method", method, "--out", str(out)]) == 0
    assert load_gray(out).shape == (160, 240)


def test_binarize_hybrid_trace(page_png, tmp_path):
    src, _ = page_png
    out = tmp_path / "out.png"
    assert main(["binarize", str(src), "--method", "hybrid", "--out", str(out), "--trace"]) == 0
    trace = json.loads((tmp_path / "out.trace.json").read_text())
    assert trace["method"] == "hybrid"
    assert trace["category"] in {"low", "fuzzy", "medium", "high"}
    assert isinstance(trace["threshold"], int)


def test_binarize_bad_method(page_png, tmp_path, capsys):
    src, _ = page_png
    with pytest.raises(SystemExit) as exc:
        main(["binarize", str(src), "--method", "magic", "--out", str(tmp_path / "o.png")])
    assert exc.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_binarize_io_errors(tmp_path, page_png):
    assert main(["binarize", str(tmp_path / "nope.png"), "--method", "otsu",
                 "--out", str(tmp_path / "o.png")]) == 2
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n9 9\n255\n\x00")
    assert main(["binarize", str(bad), "--method", "otsu", "--out", str(tmp_path / "o.png")]) == 2
    src, _ = page_png
    assert main(["binarize", str(src), "--method", "otsu", "--out", str(tmp_path / "o.gif")]) == 2


def test_binarize_bad_config(page_png, tmp_path):
    src, _ = page_png
    cfg = tmp_path / "c.json"
    cfg.write_text('{"nick": {"window": 4}}')
    assert main(["binarize", str(src), "--method", "nick", "--config", str(cfg),
                 "--out", str(tmp_path / "o.png")]) == 1


def test_evaluate(tmp_path, capsys):
    gt = np.zeros((32, 32), bool)
    gt[4:12, 4:20] = True
    save_binary(gt, tmp_path / "gt.png")
    save_binary(gt, tmp_path / "same.png")
    assert main(["evaluate", str(tmp_path / "same.png"), str(tmp_path / "gt.png")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["fm"] == 100 and doc["drd"] == 0 and doc["psnr"] == "INF"

    save_binary(~gt, tmp_path / "inv.png")
    assert main(["evaluate", str(tmp_path / "inv.png"), str(tmp_path / "gt.png"), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "fm,pfm,drd,psnr" and float(lines[1].split(",")[0]) == 0

    flip = gt.copy()
    flip[25, 25] = True
    save_binary(flip, tmp_path / "flip.png")
    assert main(["evaluate", str(tmp_path / "flip.png"), str(tmp_path / "gt.png")]) == 0
    assert json.loads(capsys.readouterr().out)["drd"] == pytest.approx(1 / nubn(gt))

    save_binary(gt[:-1], tmp_path / "short.png")
    assert main(["evaluate", str(tmp_path / "short.png"), str(tmp_path / "gt.png")]) == 2


def test_find_pairs(tmp_path):
    for name in ("a.png", "a_GT.png", "B.pgm", "b_gt.PNG", "lonely.png", "notes.txt"):
        (tmp_path / name).write_bytes(b"")
    pairs = find_pairs(tmp_path).pairs
    assert [(a.name, b.name) for a, b in pairs] == [("B.pgm", "b_gt.PNG"), ("a.png", "a_GT.png")]
    assert find_pairs(tmp_path / "missing").pairs == []


def test_bench_two_methods(dataset, tmp_path):
    report = tmp_path / "out" / "report.csv"
    assert main(["bench", str(dataset), "--methods", "otsu,niblack", "--report", str(report)]) == 0
    text = report.read_bytes()
    assert b"\r\n" not in text
    assert text.decode().splitlines()[0] == "rank,score,method,fm,fmp,drd,psnr,seconds"
    rows = read_csv(report)
    assert sorted(r["method"] for r in rows) == ["niblack", "otsu"]
    assert {int(r["score"]) for r in rows} == {4, 8}
    assert [int(r["score"]) for r in rows] == sorted(int(r["score"]) for r in rows)
    assert (tmp_path / "out" / "report.images.csv").exists()
    assert (tmp_path / "out" / "report.png").stat().st_size > 0


def test_bench_json_and_repeatable(dataset, tmp_path):
    runs = []
    for i in range(2):
        report = tmp_path / f"r{i}.json"
        assert main(["bench", str(dataset), "--methods", "otsu,sauvola,hybrid",
                     "--report", str(report), "--no-figure", "--threads", "2"]) == 0
        doc = json.loads(report.read_text())
        runs.append([{k: m[k] for k in ("method", "rank", "score", "fm", "fmp", "drd", "psnr")}
                     for m in doc["methods"]])
        assert sorted(m["rank"] for m in doc["methods"])[0] == 1
    assert runs[0] == runs[1]


def test_bench_errors(tmp_path, dataset):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["bench", str(empty), "--report", str(tmp_path / "r.csv")]) == 2
    assert main(["bench", str(dataset), "--methods", "otsu,zzz", "--report", str(tmp_path / "r.csv")]) == 1
    (dataset / "broken.png").write_bytes(b"junk")
    (dataset / "broken_GT.png").write_bytes(b"junk")
    report = tmp_path / "r.csv"
    assert main(["bench", str(dataset), "--methods", "otsu", "--report", str(report), "--no-figure"]) == 4
    assert len(read_csv(report)) == 1


def test_bench_dimension_mismatch_excluded(tmp_path, dataset):
    save_binary(np.zeros((10, 10), bool), dataset / "p1_GT.png")
    report = tmp_path / "r.csv"
    assert main(["bench", str(dataset), "--methods", "otsu", "--report", str(report), "--no-figure"]) == 4


def test_sweep(dataset, tmp_path):
    report = tmp_path / "sweep.csv"
    assert main(["sweep", str(dataset), "--param", "k_smear", "--values", "2,4,8,16",
                 "--report", str(report)]) == 0
    rows = read_csv(report)
    assert [float(r["k_smear"]) for r in rows] == [2, 4, 8, 16]
    assert (tmp_path / "sweep.png").exists()
    assert main(["sweep", str(dataset), "--param", "nonsense", "--values", "1",
                 "--report", str(report)]) == 1


def test_sweep_window_runtime_grows(dataset, tmp_path):
    cfg = tmp_path / "naive.json"
    cfg.write_text('{"local_stats": "naive"}')
    report = tmp_path / "w.json"
    assert main(["sweep", str(dataset), "--param", "nick.window", "--values", "15,25,35,45",
                 "--method", "nick", "--config", str(cfg), "--report", str(report), "--no-figure"]) == 0
    secs = [r["seconds"] for r in json.loads(report.read_text())["rows"]]
    assert all(a < b for a, b in zip(secs, secs[1:]))


def test_threads_from_env(monkeypatch):
    monkeypatch.setenv("BINARIZE_THREADS", "3")
    assert threads_from_env() == 3
    assert threads_from_env(5) == 5
    monkeypatch.setenv("BINARIZE_THREADS", "0")
    assert threads_from_env() >= 1
    monkeypatch.setenv("BINARIZE_THREADS", "many")
    assert threads_from_env() >= 1


def test_module_entry_point(page_png, tmp_path):
    src, _ = page_png
    res = subprocess.run([sys.executable, "-m", "docbin", "binarize", str(src), "--method", "otsu",
                          "--out", str(tmp_path / "m.png")], capture_output=True)
    assert res.returncode == 0
    res = subprocess.run([sys.executable, "-m", "docbin"], capture_output=True, text=True)
    assert res.returncode == 1 and "usage" in res.stderr
