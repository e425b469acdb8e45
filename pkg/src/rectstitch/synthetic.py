"""Seeded synthetic photo pairs for demos and dataset-free evaluation."""

from __future__ import annotations

import numpy as np

from .geometry import WarpedPair, align_pair
from .model import BinaryMask, Homography, ImageBuffer


def synth_scene(width: int, height: int, seed: int = 0, brightness: float = 0.55) -> ImageBuffer:
    """Natural-ish RGB test scene: smooth gratings, soft blobs, mild texture."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    yy /= max(height, 1)
    xx /= max(width, 1)
    img = np.zeros((height, width, 3))
    for c in range(3):
        band = np.zeros((height, width))
        for _ in range(4):
            fx, fy = rng.uniform(0.5, 4.0, 2)
            phase = rng.uniform(0, 2 * np.pi)
            band += rng.uniform(0.2, 1.0) * np.cos(2 * np.pi * (fx * xx + fy * yy) + phase)
        img[:, :, c] = band
    for _ in range(6):
        cy, cx = rng.uniform(0, 1, 2)
        r = rng.uniform(0.05, 0.25)
        blob = np.exp(-(((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * r * r)))
        img += blob[:, :, None] * rng.uniform(-0.8, 0.8, 3)
    img += rng.normal(0, 0.02, img.shape)
    img -= img.min()
    img /= max(img.max(), 1e-9)
    img = np.clip(img * 0.8 + (brightness - 0.4), 0.0, 1.0)
    return ImageBuffer(img.astype(np.float32))


def synth_pair(
    width: int = 320,
    height: int = 240,
    overlap: float = 0.45,
    tilt: float = 0.08,
    seed: int = 0,
) -> tuple[ImageBuffer, ImageBuffer, Homography]:
    """Two overlapping views of one scene plus the homography aligning them.

    The right view is shifted past the `overlap` fraction and mildly rotated/
    scaled, which leaves corner gaps in the stitching domain (the rectangling
    workload).
    """
    scene_w = int(width * (2 - overlap))
    scene = synth_scene(scene_w + 40, height + 40, seed=seed)
    left = ImageBuffer(scene.data[20 : 20 + height, 20 : 20 + width])

    shift = int(width * (1 - overlap))
    angle = tilt * 0.5
    s = 1.0 + tilt * 0.25
    ca, sa = np.cos(angle), np.sin(angle)
    # source-scene coordinates of the right view: rotate/scale about its center
    cx, cy = width / 2, height / 2
    rot = np.array(
        [
            [s * ca, -s * sa, 20 + shift + cx - s * (ca * cx - sa * cy)],
            [s * sa, s * ca, 20 + cy - s * (sa * cx + ca * cy)],
            [0, 0, 1],
        ]
    )
    right_data = _sample_scene(scene.data, rot, width, height)
    right = ImageBuffer(right_data)
    # The right view maps back into left-view coordinates through the same
    # transform shifted by the left crop origin.
    to_left = np.array([[1, 0, -20], [0, 1, -20], [0, 0, 1]]) @ rot
    return left, right, Homography(to_left)


def _sample_scene(scene: np.ndarray, transform: np.ndarray, width: int, height: int) -> np.ndarray:
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    pts = np.stack([xs.ravel(), ys.ravel(), np.ones(xs.size)])
    src = transform @ pts
    u = src[0] / src[2]
    v = src[1] / src[2]
    sh, sw = scene.shape[:2]
    x0 = np.clip(np.floor(u).astype(int), 0, sw - 2)
    y0 = np.clip(np.floor(v).astype(int), 0, sh - 2)
    fx = np.clip(u - x0, 0, 1)[:, None]
    fy = np.clip(v - y0, 0, 1)[:, None]
    out = (
        scene[y0, x0] * (1 - fx) * (1 - fy)
        + scene[y0, x0 + 1] * fx * (1 - fy)
        + scene[y0 + 1, x0] * (1 - fx) * fy
        + scene[y0 + 1, x0 + 1] * fx * fy
    )
    return np.clip(out.reshape(height, width, 3), 0.0, 1.0).astype(np.float32)


def synth_warped_pair(width: int = 320, height: int = 240, seed: int = 0, **kw) -> WarpedPair:
    left, right, h = synth_pair(width, height, seed=seed, **kw)
    return align_pair(left, right, h)


def corner_hole_pair(
    width: int = 256, height: int = 192, leg: int = 48, band: float = 0.55, seed: int = 0
) -> WarpedPair:
    """Pre-aligned pair covering the full raster except four corner triangles,
    with a vertical seam; a compact rectangling + fusion workload."""
    scene = synth_scene(width, height, seed=seed)
    yy, xx = np.mgrid[0:height, 0:width]
    tri = (
        (yy + xx < leg)
        | (yy + (width - 1 - xx) < leg)
        | ((height - 1 - yy) + xx < leg)
        | ((height - 1 - yy) + (width - 1 - xx) < leg)
    )
    cover = ~tri
    split = int(width * band)
    m_wl = BinaryMask(cover & (xx < split))
    m_wr = BinaryMask(cover)
    data = scene.data.copy()
    data[tri] = 0.0
    img = ImageBuffer(data)
    left = ImageBuffer(np.where(m_wl.bits[:, :, None], img.data, 0.0))
    right = ImageBuffer(np.where(m_wr.bits[:, :, None], img.data, 0.0))
    from .pipeline import prealigned_pair

    return prealigned_pair(left, right, m_wl, m_wr)
