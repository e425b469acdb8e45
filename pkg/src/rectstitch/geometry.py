"""Stitching-domain computation and projective warping.

The homography is consumed, never estimated: the left image is carried by the
identity transform, the right image by the given matrix, and both land in a
common raster just large enough to hold every mapped corner.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .errors import DegenerateHomography, NoOverlap
from .model import BinaryMask, Homography, ImageBuffer


@dataclass(frozen=True)
class StitchDomain:
    """Output raster size plus the translation that makes all warped
    coordinates non-negative."""

    w_star: int
    h_star: int
    offset_x: int
    offset_y: int


@dataclass(frozen=True)
class WarpedPair:
    """Both inputs and their coverage masks mapped into the stitching domain."""

    i_wl: ImageBuffer
    i_wr: ImageBuffer
    m_wl: BinaryMask
    m_wr: BinaryMask
    domain: StitchDomain


def _corners(width: int, height: int) -> np.ndarray:
    return np.array(
        [[0.0, 0.0], [width, 0.0], [0.0, height], [width, height]], dtype=np.float64
    )


def compute_domain(
    left_size: tuple[int, int], right_size: tuple[int, int], h: Homography
) -> StitchDomain:
    """Min/max over the union of identity-mapped left corners and
    homography-mapped right corners, with offsets ceil-rounded to integers.

    ``left_size``/``right_size`` are (width, height).
    """
    lw, lh = left_size
    rw, rh = right_size
    pts = np.vstack([_corners(lw, lh), h.apply(_corners(rw, rh))])
    min_x, min_y = pts.min(axis=0)
    max_x, max_y = pts.max(axis=0)
    offset_x = ceil(-min_x) if min_x < 0 else 0
    offset_y = ceil(-min_y) if min_y < 0 else 0
    w_star = ceil(max_x + offset_x)
    h_star = ceil(max_y + offset_y)
    if w_star <= 0 or h_star <= 0:
        raise DegenerateHomography("stitching domain collapsed to an empty raster")
    return StitchDomain(w_star=w_star, h_star=h_star, offset_x=offset_x, offset_y=offset_y)


def _source_coords(h: Homography, domain: StitchDomain) -> tuple[np.ndarray, np.ndarray]:
    """Inverse-map every output pixel of the domain to source coordinates."""
    hinv = np.linalg.inv(h.m)
    ys, xs = np.mgrid[0 : domain.h_star, 0 : domain.w_star]
    x_world = xs.astype(np.float64) - domain.offset_x
    y_world = ys.astype(np.float64) - domain.offset_y
    denom = hinv[2, 0] * x_world + hinv[2, 1] * y_world + hinv[2, 2]
    # Pixels whose inverse map blows up are simply outside the source.
    safe = np.abs(denom) >= 1e-9
    denom = np.where(safe, denom, 1.0)
    u = (hinv[0, 0] * x_world + hinv[0, 1] * y_world + hinv[0, 2]) / denom
    v = (hinv[1, 0] * x_world + hinv[1, 1] * y_world + hinv[1, 2]) / denom
    u = np.where(safe, u, -1e9)
    v = np.where(safe, v, -1e9)
    return u, v


def _warp_array(
    src: np.ndarray, h: Homography, domain: StitchDomain, interp: str
) -> np.ndarray:
    sh, sw = src.shape[:2]
    u, v = _source_coords(h, domain)
    out = np.zeros((domain.h_star, domain.w_star, src.shape[2]), dtype=src.dtype)
    if interp == "nearest":
        ui = np.round(u).astype(np.int64)
        vi = np.round(v).astype(np.int64)
        valid = (ui >= 0) & (ui < sw) & (vi >= 0) & (vi < sh)
        out[valid] = src[vi[valid], ui[valid]]
        return out
    if interp != "bilinear":
        raise ValueError(f"unknown interpolation {interp!r}")
    x0 = np.floor(u).astype(np.int64)
    y0 = np.floor(v).astype(np.int64)
    fx = (u - x0).astype(src.dtype)
    fy = (v - y0).astype(src.dtype)
    acc = np.zeros_like(out)
    for dy in (0, 1):
        for dx in (0, 1):
            xi = x0 + dx
            yi = y0 + dy
            valid = (xi >= 0) & (xi < sw) & (yi >= 0) & (yi < sh)
            w = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            vals = np.zeros_like(out)
            vals[valid] = src[yi[valid], xi[valid]]
            acc += vals * np.where(valid, w, 0.0)[:, :, None]
    return acc


def warp(
    img: ImageBuffer, h: Homography, domain: StitchDomain, interp: str = "bilinear"
) -> ImageBuffer:
    """Inverse-map ``img`` through ``h`` into the domain raster.

    Out-of-source pixels are 0. Nearest keeps exact source values (use it for
    masks); bilinear fades at the source border.
    """
    return ImageBuffer(np.clip(_warp_array(img.data, h, domain, interp), 0.0, 1.0))


def warp_coverage(size: tuple[int, int], h: Homography, domain: StitchDomain) -> BinaryMask:
    """Nearest-warp of an all-ones raster: the coverage mask of a source."""
    w, hgt = size
    ones = np.ones((hgt, w, 1), dtype=np.float32)
    return BinaryMask(_warp_array(ones, h, domain, "nearest")[:, :, 0] > 0.5)


def align_pair(
    i_l: ImageBuffer, i_r: ImageBuffer, h: Homography, image_interp: str = "bilinear"
) -> WarpedPair:
    """Warp the pair into a common domain: identity for the left image, ``h``
    for the right; bilinear for images, nearest for coverage masks."""
    if i_l.width == 0 or i_r.width == 0:
        raise ValueError("empty input image")
    ident = Homography.identity()
    domain = compute_domain((i_l.width, i_l.height), (i_r.width, i_r.height), h)
    # Mapped corners must stay finite; Homography.apply raised otherwise.
    i_wl = warp(i_l.to_rgb(), ident, domain, image_interp)
    i_wr = warp(i_r.to_rgb(), h, domain, image_interp)
    m_wl = warp_coverage((i_l.width, i_l.height), ident, domain)
    m_wr = warp_coverage((i_r.width, i_r.height), h, domain)
    if not (m_wl & m_wr).any():
        raise NoOverlap("warped coverage masks do not intersect")
    return WarpedPair(i_wl=i_wl, i_wr=i_wr, m_wl=m_wl, m_wr=m_wr, domain=domain)
