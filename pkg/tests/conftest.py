"""Shared oracles and generators. Every oracle here is implemented
independently of the package internals (plain scans, brute-force geometry)
so tests cross-check rather than mirror the implementation."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.spatial.distance import cdist


def brute_dilate(bits: np.ndarray, size: int) -> np.ndarray:
    """Set iff any set pixel inside the in-raster window (outside counts unset)."""
    r = (size - 1) // 2
    h, w = bits.shape
    out = np.zeros_like(bits)
    for y in range(h):
        for x in range(w):
            y0, y1 = max(0, y - r), min(h, y + r + 1)
            x0, x1 = max(0, x - r), min(w, x + r + 1)
            out[y, x] = bits[y0:y1, x0:x1].any()
    return out


def brute_erode(bits: np.ndarray, size: int) -> np.ndarray:
    """Set iff every in-raster pixel inside the window is set."""
    r = (size - 1) // 2
    h, w = bits.shape
    out = np.zeros_like(bits)
    for y in range(h):
        for x in range(w):
            y0, y1 = max(0, y - r), min(h, y + r + 1)
            x0, x1 = max(0, x - r), min(w, x + r + 1)
            out[y, x] = bits[y0:y1, x0:x1].all()
    return out


def fast_brute_dilate(bits: np.ndarray, size: int) -> np.ndarray:
    """Shift-and-OR window scan; independent of any morphology library."""
    r = (size - 1) // 2
    h, w = bits.shape
    out = np.zeros_like(bits)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            ys = slice(max(0, dy), min(h, h + dy))
            yt = slice(max(0, -dy), min(h, h - dy))
            xs = slice(max(0, dx), min(w, w + dx))
            xt = slice(max(0, -dx), min(w, w - dx))
            out[yt, xt] |= bits[ys, xs]
    return out


def fast_brute_erode(bits: np.ndarray, size: int) -> np.ndarray:
    """Shift-and-AND over in-raster offsets only (outside ignored)."""
    r = (size - 1) // 2
    h, w = bits.shape
    out = np.ones_like(bits)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            shifted = np.ones_like(bits)
            ys = slice(max(0, dy), min(h, h + dy))
            yt = slice(max(0, -dy), min(h, h - dy))
            xs = slice(max(0, dx), min(w, w + dx))
            xt = slice(max(0, -dx), min(w, w - dx))
            shifted[yt, xt] = bits[ys, xs]
            out &= shifted
    return out


def exact_edt(bits: np.ndarray) -> np.ndarray:
    """Brute-force exact Euclidean distance of set pixels to the nearest
    in-raster unset pixel."""
    if not bits.any():
        return np.zeros(bits.shape)
    if bits.all():
        raise ValueError("exact_edt needs at least one unset pixel")
    ys, xs = np.nonzero(bits)
    bys, bxs = np.nonzero(~bits)
    dist = cdist(np.c_[ys, xs], np.c_[bys, bxs]).min(axis=1)
    out = np.zeros(bits.shape)
    out[ys, xs] = dist
    return out


def random_blob_mask(rng: np.random.Generator, h: int, w: int, smooth: float = 3.0) -> np.ndarray:
    from scipy.ndimage import gaussian_filter

    return gaussian_filter(rng.standard_normal((h, w)), smooth) > 0


def random_mask(rng: np.random.Generator, h: int, w: int, kind: str | None = None) -> np.ndarray:
    kinds = ("bernoulli", "rect", "disc", "blob", "halfplane", "triangle", "full", "empty")
    kind = kind or kinds[rng.integers(0, 6)]
    if kind == "bernoulli":
        return rng.random((h, w)) < rng.uniform(0.2, 0.9)
    if kind == "rect":
        m = np.zeros((h, w), bool)
        y0, y1 = sorted(rng.integers(0, h, 2))
        x0, x1 = sorted(rng.integers(0, w, 2))
        m[y0 : y1 + 1, x0 : x1 + 1] = True
        return m
    if kind == "disc":
        yy, xx = np.mgrid[0:h, 0:w]
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        r = rng.uniform(1, max(max(h, w) / 2, 1.5))
        return (yy - cy) ** 2 + (xx - cx) ** 2 < r * r
    if kind == "blob":
        return random_blob_mask(rng, h, w)
    if kind == "halfplane":
        m = np.zeros((h, w), bool)
        m[rng.integers(1, h) :, :] = True
        return m
    if kind == "triangle":
        yy, xx = np.mgrid[0:h, 0:w]
        return (yy + xx) < rng.integers(2, h + w - 1)
    if kind == "full":
        return np.ones((h, w), bool)
    return np.zeros((h, w), bool)


@pytest.fixture
def rng():
    return np.random.default_rng(20240612)


# One line per acceptance criterion, echoed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    line = f"[{status}] {name}" + (f" — {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
