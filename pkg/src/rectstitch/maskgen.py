"""Builds every pipeline mask: the seam band, the missing-region mask, the
unified inpaint mask, the weighted retention/intensity maps, and the
per-step threshold sub-masks that drive the reverse process.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .geometry import StitchDomain
from .model import BinaryMask, StitchConfig, WeightMask
from .morphology import Kernel, dilate, distance_transform, erode


@dataclass(frozen=True)
class MaskSet:
    """All masks derived from one warped pair, at stitching-domain size.

    ``m_rect`` is the missing region (complement of coverage), ``w_inpaint``
    is 1 exactly on it and ramps across the seam band, and ``w_init`` is 1
    outside both treated regions.
    """

    m_seam: BinaryMask
    m_rect: BinaryMask
    m_union_content: BinaryMask
    m_inpaint: BinaryMask
    w_init: WeightMask
    w_inpaint: WeightMask
    k_s: int


def seam_band_width(domain: StitchDomain, cfg: StitchConfig) -> int:
    """ceil(W*/divisor) * multiplier, coerced to the next odd integer so it
    can be used directly as a kernel size."""
    width = ceil(domain.w_star / cfg.band_divisor) * cfg.band_multiplier
    return width if width % 2 == 1 else width + 1


def build_seam_mask(m_wl: BinaryMask, m_wr: BinaryMask, k_s: Kernel) -> BinaryMask:
    """Band around the boundary of the identity-warped coverage: the outer
    dilation ring, unioned with the inner erosion ring restricted to the
    other image's coverage."""
    outer = dilate(m_wl, k_s) ^ m_wl
    inner = (erode(m_wl, k_s) ^ m_wl) & m_wr
    return outer | inner


def build_rect_mask(m_wl: BinaryMask, m_wr: BinaryMask) -> tuple[BinaryMask, BinaryMask]:
    """(missing-region mask, coverage union)."""
    union = m_wl | m_wr
    return ~union, union


def _ramp(region: BinaryMask, k: Kernel) -> np.ndarray:
    """Distance transform of a region normalized to peak at 1; an empty
    region yields a zero ramp."""
    dist = distance_transform(region, k)
    peak = dist.max()
    if peak <= 0.0:
        return np.zeros(dist.shape, dtype=np.float32)
    return dist / peak


def build_weighted_masks(
    m_seam: BinaryMask, m_rect: BinaryMask, cfg: StitchConfig
) -> tuple[WeightMask, WeightMask]:
    """Retention map and inpainting-intensity map.

    The retention map is 1 (keep everything) away from both regions and dips
    by seam_strength/255 toward the seam-band center and by fill_strength/255
    toward the deepest interior of the missing region. The intensity map is 1
    on the whole missing region and follows the seam ramp inside the band, so
    the strongest inpainting lands closest to the seam and on the fill area.
    """
    k = Kernel(cfg.dt_kernel)
    ramp_seam = _ramp(m_seam, k)
    ramp_rect = _ramp(m_rect, k)
    e1 = np.float32(cfg.seam_strength / 255.0)
    e2 = np.float32(cfg.fill_strength / 255.0)
    w_init = np.clip(1.0 - e1 * ramp_seam - e2 * ramp_rect, 0.0, 1.0).astype(np.float32)
    w_inpaint = np.where(
        m_rect.bits, np.float32(1.0), np.where(m_seam.bits, ramp_seam, np.float32(0.0))
    ).astype(np.float32)
    return WeightMask(w_init), WeightMask(w_inpaint)


def step_mask(w_inpaint: WeightMask, t: int, n: int) -> BinaryMask:
    """Pixels still open for inpainting at step ``t`` of ``n``.

    A pixel is retained once its weight drops strictly below (n - t)/n, so a
    weight of exactly 1 stays inpaintable at every step including t = 0 and a
    weight of 0 is never inpaintable.
    """
    if not (0 <= t <= n):
        raise ValueError(f"step {t} outside [0, {n}]")
    # Compare at the weights' own precision so a stored 0.02 meets the
    # threshold 1/50 exactly, as it would in exact arithmetic.
    threshold = np.float32((n - t) / n)
    return BinaryMask(w_inpaint.weights >= threshold)


def build_masks(
    m_wl: BinaryMask, m_wr: BinaryMask, domain: StitchDomain, cfg: StitchConfig
) -> MaskSet:
    """Run the whole mask calculus for one aligned pair."""
    k_s = seam_band_width(domain, cfg)
    m_seam = build_seam_mask(m_wl, m_wr, Kernel(k_s))
    m_rect, m_union = build_rect_mask(m_wl, m_wr)
    w_init, w_inpaint = build_weighted_masks(m_seam, m_rect, cfg)
    return MaskSet(
        m_seam=m_seam,
        m_rect=m_rect,
        m_union_content=m_union,
        m_inpaint=m_seam | m_rect,
        w_init=w_init,
        w_inpaint=w_inpaint,
        k_s=k_s,
    )
