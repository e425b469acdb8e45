"""Deterministic image description: a fixed statistics embedding.

Stands in for a caption+sentence-embedding stack: luminance and per-channel
histograms plus a coarse spatial mean-pool, L2-normalized. Same image in,
same vector out, on every platform.
"""

from __future__ import annotations

import base64
import io

import numpy as np
from PIL import Image

from .wire import WireError

EMBED_DIM = 64 + 3 * 16 + 64


def decode_png(image_png: str) -> np.ndarray:
    try:
        raw = base64.b64decode(image_png)
        with Image.open(io.BytesIO(raw)) as im:
            rgb = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
    except Exception as exc:
        raise WireError("BackendShapeMismatch", f"undecodable PNG payload: {exc}") from exc
    return rgb


def embed(rgb: np.ndarray) -> np.ndarray:
    lum = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    parts = [np.histogram(lum, bins=64, range=(0.0, 1.0))[0] / lum.size]
    for c in range(3):
        parts.append(np.histogram(rgb[:, :, c], bins=16, range=(0.0, 1.0))[0] / lum.size)
    h, w = lum.shape
    ys = np.linspace(0, h, 9).astype(int)
    xs = np.linspace(0, w, 9).astype(int)
    pool = np.empty((8, 8))
    for i in range(8):
        for j in range(8):
            block = lum[ys[i] : max(ys[i + 1], ys[i] + 1), xs[j] : max(xs[j + 1], xs[j] + 1)]
            pool[i, j] = block.mean()
    v = np.concatenate(parts + [pool.ravel()])
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise WireError("BackendShapeMismatch", "embedding collapsed to the zero vector")
    return (v / norm).astype(np.float64)
