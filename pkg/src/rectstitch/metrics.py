"""Content Consistency Score: caption-embedding cosine agreement between the
stitched result, the fusion image, and the original inputs.

The embedding provider is pluggable. The builtin provider is a deterministic
image-statistics fingerprint (64-bin luminance histogram plus an 8x8
mean-pool, L2-normalized) so every metric property is testable offline; a
neural captioner can be reached over the sidecar wire protocol instead.
"""

from __future__ import annotations

import base64
import io
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import BackendUnavailable, TileTooSmall, ZeroVector
from .model import ImageBuffer

MIN_TILE_SIDE = 32


@dataclass(frozen=True)
class Embedding:
    values: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.values, dtype=np.float64).ravel()
        if a.size == 0 or not np.isfinite(a).all():
            raise ValueError("embedding must be a non-empty finite vector")
        object.__setattr__(self, "values", a)

    @property
    def dim(self) -> int:
        return self.values.size


class ContentProvider(ABC):
    """Maps an image to a deterministic embedding."""

    @abstractmethod
    def describe(self, img: ImageBuffer) -> Embedding: ...


def _luminance(img: ImageBuffer) -> np.ndarray:
    a = img.to_rgb().data
    return 0.299 * a[:, :, 0] + 0.587 * a[:, :, 1] + 0.114 * a[:, :, 2]


def _mean_pool(a: np.ndarray, grid: int = 8) -> np.ndarray:
    h, w = a.shape
    ys = np.linspace(0, h, grid + 1).astype(int)
    xs = np.linspace(0, w, grid + 1).astype(int)
    out = np.empty((grid, grid))
    for i in range(grid):
        for j in range(grid):
            block = a[ys[i] : max(ys[i + 1], ys[i] + 1), xs[j] : max(xs[j + 1], xs[j] + 1)]
            out[i, j] = block.mean()
    return out


class FingerprintProvider(ContentProvider):
    """Deterministic offline stand-in for a caption+embedding model."""

    def describe(self, img: ImageBuffer) -> Embedding:
        lum = _luminance(img)
        hist, _ = np.histogram(lum, bins=64, range=(0.0, 1.0))
        hist = hist / max(lum.size, 1)
        pooled = _mean_pool(lum).ravel()
        v = np.concatenate([hist, pooled])
        norm = np.linalg.norm(v)
        if norm == 0.0:
            # All-black histogram still carries mass in bin 0; unreachable,
            # kept as a hard failure rather than a silent zero vector.
            raise ZeroVector("fingerprint collapsed to the zero vector")
        return Embedding(v / norm)


class RemoteProvider(ContentProvider):
    """Embeddings served by the sidecar's /v1/describe endpoint."""

    def __init__(self, base_url: str, http=None, timeout: float = 120.0, seed: int = 0):
        import requests

        self.base_url = base_url.rstrip("/")
        self.http = http if http is not None else requests.Session()
        self.timeout = timeout
        self.seed = seed

    def describe(self, img: ImageBuffer) -> Embedding:
        import requests

        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(img.to_rgb().to_uint8()).save(buf, format="PNG")
        payload = {
            "session_id": "describe",
            "seed": self.seed,
            "image_png": base64.b64encode(buf.getvalue()).decode("ascii"),
        }
        try:
            resp = self.http.post(
                f"{self.base_url}/v1/describe", json=payload, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise BackendUnavailable(f"/v1/describe: {exc}") from exc
        if resp.status_code != 200:
            raise BackendUnavailable(f"/v1/describe: HTTP {resp.status_code}")
        body = resp.json()
        return Embedding(np.asarray(body["values"], dtype=np.float64))


def grid_split(img: ImageBuffer, n: int = 4) -> list[ImageBuffer]:
    """Split into a sqrt(n) x sqrt(n) grid of equal tiles; remainder pixels go
    to the last row/column. Refuses tiles smaller than 32 px on a side."""
    side = int(round(n**0.5))
    if side * side != n or n < 1:
        raise ValueError(f"n must be a perfect square, got {n}")
    h, w = img.height, img.width
    th, tw = h // side, w // side
    if th < MIN_TILE_SIDE or tw < MIN_TILE_SIDE:
        raise TileTooSmall(f"tiles would be {th}x{tw}, below {MIN_TILE_SIDE} px")
    tiles = []
    for i in range(side):
        for j in range(side):
            y1 = (i + 1) * th if i < side - 1 else h
            x1 = (j + 1) * tw if j < side - 1 else w
            tiles.append(ImageBuffer(img.data[i * th : y1, j * tw : x1]))
    return tiles


def cosine(a: Embedding, b: Embedding) -> float:
    if a.dim != b.dim:
        raise ValueError(f"embedding dims differ: {a.dim} vs {b.dim}")
    na = np.linalg.norm(a.values)
    nb = np.linalg.norm(b.values)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine undefined for zero-norm embeddings")
    return float(np.dot(a.values, b.values) / (na * nb))


def _concat_side_by_side(left: ImageBuffer, right: ImageBuffer) -> ImageBuffer:
    l, r = left.to_rgb().data, right.to_rgb().data
    h = max(l.shape[0], r.shape[0])
    out = np.zeros((h, l.shape[1] + r.shape[1], 3), dtype=np.float32)
    out[: l.shape[0], : l.shape[1]] = l
    out[: r.shape[0], l.shape[1] :] = r
    return ImageBuffer(out)


def _pair_embedding(
    left: ImageBuffer, right: ImageBuffer, provider: ContentProvider, mode: str
) -> Embedding:
    """Embedding of the input pair for the global consistency leg.

    "mean" averages the two embeddings, which makes a quadruple of identical
    images score exactly 1. "concat" embeds the side-by-side montage as one
    image; montage pooling is not duplication-invariant, so identical
    quadruples score slightly below 1 there.
    """
    if mode == "mean":
        vl = provider.describe(left).values
        vr = provider.describe(right).values
        if vl.size != vr.size:
            raise ValueError("provider returned embeddings of different sizes")
        return Embedding((vl + vr) / 2.0)
    if mode == "concat":
        return provider.describe(_concat_side_by_side(left, right))
    raise ValueError(f"unknown pair_mode {mode!r}")


def _tile_embedding(img: ImageBuffer, provider: ContentProvider, n: int) -> Embedding:
    tiles = grid_split(img, n)
    return Embedding(np.concatenate([provider.describe(t).values for t in tiles]))


def ccs_components(
    stitched: ImageBuffer,
    fusion: ImageBuffer,
    left: ImageBuffer,
    right: ImageBuffer,
    provider: ContentProvider,
    n: int = 4,
    tile_mode: str = "concat",
    pair_mode: str = "mean",
) -> tuple[float, float, float]:
    """(score, local component, global component).

    Local: cosine between per-tile embeddings of the stitched and fusion
    images, tiles concatenated into one vector ("concat", default) or cosines
    averaged per tile ("mean"). Global: cosine between the stitched embedding
    and the pair embedding of the two inputs (see _pair_embedding).
    """
    if tile_mode == "concat":
        ccs_n = cosine(
            _tile_embedding(stitched, provider, n), _tile_embedding(fusion, provider, n)
        )
    elif tile_mode == "mean":
        pairs = zip(grid_split(stitched, n), grid_split(fusion, n))
        ccs_n = float(
            np.mean([cosine(provider.describe(a), provider.describe(b)) for a, b in pairs])
        )
    else:
        raise ValueError(f"unknown tile_mode {tile_mode!r}")
    ccs_g = cosine(
        provider.describe(stitched), _pair_embedding(left, right, provider, pair_mode)
    )
    return (ccs_n + ccs_g) / 2.0, ccs_n, ccs_g


def ccs(
    stitched: ImageBuffer,
    fusion: ImageBuffer,
    left: ImageBuffer,
    right: ImageBuffer,
    provider: ContentProvider,
    n: int = 4,
    tile_mode: str = "concat",
    pair_mode: str = "mean",
) -> float:
    return ccs_components(stitched, fusion, left, right, provider, n, tile_mode, pair_mode)[0]
