import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("docbin", deadline=None, max_examples=60)
settings.load_profile("docbin")


def synthetic_page(seed=0, shape=(160, 240), ink=50, paper=205, noise=8.0, strokes=40,
                   smear=None, gradient=0.0):
    """Gray page with random stroke segments and its ink mask.

    ``smear`` is an optional ``(top, left, size)`` dark square that is not
    part of the ground truth.
    """
    rng = np.random.default_rng(seed)
    h, w = shape
    gt = np.zeros(shape, dtype=bool)
    for _ in range(strokes):
        y, x = rng.integers(4, h - 4), rng.integers(4, w - 4)
        if rng.random() < 0.5:
            length = rng.integers(6, 30)
            gt[y:y + 2 + rng.integers(0, 2), x:x + length] = True
        else:
            length = rng.integers(6, 20)
            gt[y:y + length, x:x + 2 + rng.integers(0, 2)] = True
    base = np.full(shape, float(paper))
    if gradient:
        base += gradient * np.linspace(-1, 1, w)[None, :]
    base[gt] = ink
    if smear is not None:
        t, l, s = smear
        base[t:t + s, l:l + s] = ink - 10
    img = np.clip(np.rint(base + rng.normal(0, noise, shape)), 0, 255).astype(np.uint8)
    return img, gt


@pytest.fixture
def page():
    return synthetic_page()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_VERDICTS = {}


def record_verdict(cid, ok, detail):
    """Store an acceptance verdict; ``ok`` is True, False, None (skipped) or "info"."""
    _VERDICTS[cid] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_VERDICTS):
        ok, detail = _VERDICTS[cid]
        status = {None: "SKIP", "info": "INFO", True: "PASS", False: "FAIL"}[ok]
        terminalreporter.write_line(f"{cid} {status}: {detail}")
