"""Full stitching flow: coarse fusion, mask calculus, fast-marching coarse
rectangling, and the weighted-mask-guided reverse process."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import InpaintBackend, Latent
from .errors import BackendShapeMismatch, NonFiniteLatent
from .geometry import StitchDomain, WarpedPair, align_pair
from .maskgen import MaskSet, build_masks, step_mask
from .model import BinaryMask, Homography, ImageBuffer, StitchConfig, WeightMask, validate_config
from .morphology import telea_inpaint


@dataclass(frozen=True)
class PipelineArtifacts:
    """Every intermediate of one stitch job, all at stitching-domain size."""

    coarse_fusion: ImageBuffer
    coarse_rectangling: ImageBuffer
    masks: MaskSet
    stitched: ImageBuffer
    per_step_masks: list[BinaryMask] | None = None


def coarse_fuse(pair: WarpedPair) -> ImageBuffer:
    """Overlay the identity-warped image over the other: overlap pixels come
    from the left warp, right-only pixels from the right warp, uncovered
    pixels are 0.

    Each source is gated by its own coverage mask, so stray nonzero pixels
    outside a pre-aligned input's support cannot bleed into the fusion.
    """
    wl = pair.m_wl.bits[:, :, None]
    right_only = (pair.m_wr & ~pair.m_wl).bits[:, :, None]
    fused = pair.i_wl.data * wl + pair.i_wr.data * right_only
    return ImageBuffer(np.clip(fused, 0.0, 1.0))


def coarse_rectangle(i_cf: ImageBuffer, m_rect: BinaryMask, cfg: StitchConfig) -> ImageBuffer:
    """Weak-prior fill of the missing region via fast-marching inpainting;
    the ablation switch returns the fusion image untouched."""
    if cfg.ablation.disable_coarse_rectangling:
        return ImageBuffer(i_cf.data.copy())
    return telea_inpaint(i_cf, m_rect, cfg.telea_radius)


def _pad_to_multiple(a: np.ndarray, scale: int) -> np.ndarray:
    h, w = a.shape[:2]
    ph = (-h) % scale
    pw = (-w) % scale
    if ph == 0 and pw == 0:
        return a
    pad = ((0, ph), (0, pw)) + ((0, 0),) * (a.ndim - 2)
    return np.pad(a, pad, mode="edge")


def _area_mean(a: np.ndarray, scale: int) -> np.ndarray:
    if scale == 1:
        return a
    h, w = a.shape
    return a.reshape(h // scale, scale, w // scale, scale).mean(axis=(1, 3), dtype=np.float64).astype(np.float32)


def run_guided_reverse(
    i_cfr: ImageBuffer,
    masks: MaskSet,
    cfg: StitchConfig,
    backend: InpaintBackend,
    capture_steps: bool = False,
) -> tuple[ImageBuffer, list[BinaryMask] | None]:
    """Reverse process guided by per-step thresholded weighted masks.

    The conditioning latent encodes the coarse rectangling image attenuated by
    the retention map. The intensity map is area-mean downsampled to latent
    resolution once; at each step t = N..0 the schedule threshold (N - t)/N
    re-binarizes it, the previous estimate is re-noised to level t, and the
    backend performs one conditioned solver step. After decoding, retained
    pixels are pasted back from the coarse rectangling image so everything
    outside the unified inpaint mask is bit-exact.
    """
    caps = backend.capabilities()
    h, w = i_cfr.height, i_cfr.width
    if max(h, w) > caps.max_side:
        raise BackendShapeMismatch(
            f"image side {max(h, w)} exceeds backend max_side {caps.max_side}"
        )
    scale = caps.latent_scale
    backend.begin_session(cfg.seed, cfg.steps)

    img = _pad_to_multiple(i_cfr.to_rgb().data, scale)
    if cfg.ablation.disable_weighted_init:
        retention = masks.m_union_content.bits.astype(np.float32)
    else:
        retention = masks.w_init.weights
    retention = _pad_to_multiple(retention, scale)

    if cfg.ablation.disable_weighted_inpaint:
        intensity = masks.m_inpaint.bits.astype(np.float32)
    else:
        intensity = masks.w_inpaint.weights
    w_small = _area_mean(_pad_to_multiple(intensity, scale), scale)
    w_small_mask = WeightMask(np.clip(w_small, 0.0, 1.0))

    x_hat = _checked(backend.encode(ImageBuffer(img)), caps, img.shape, "encode")
    x_cond = backend.encode(ImageBuffer(np.clip(img * retention[:, :, None], 0.0, 1.0)))

    n = cfg.steps
    captured: list[BinaryMask] | None = [] if capture_steps else None
    for t in range(n, -1, -1):
        x_noised = backend.add_noise(x_hat, t, cfg.seed)
        if cfg.ablation.disable_weighted_inpaint:
            mask_t = BinaryMask(w_small_mask.weights > 0.0)
        else:
            mask_t = step_mask(w_small_mask, t, n)
        x_hat = backend.denoise_step(
            x_noised,
            WeightMask(mask_t.bits.astype(np.float32)),
            x_cond,
            cfg.prompt,
            t,
            cfg.guidance_scale,
        )
        _checked(x_hat, caps, img.shape, "denoise_step")
        if captured is not None:
            up = np.repeat(np.repeat(mask_t.bits, scale, axis=0), scale, axis=1)
            captured.append(BinaryMask(up[:h, :w]))

    decoded = backend.decode(x_hat)
    dec = decoded.data[:h, :w, :]
    if dec.shape[:2] != (h, w):
        raise BackendShapeMismatch("decoded image smaller than the padded input")
    src = i_cfr.to_rgb().data
    stitched = np.where(masks.m_inpaint.bits[:, :, None], dec, src)
    return ImageBuffer(stitched), captured


def _checked(x: Latent, caps, padded_shape, stage: str) -> Latent:
    ph, pw = padded_shape[:2]
    expect = (caps.latent_channels, ph // caps.latent_scale, pw // caps.latent_scale)
    if x.data.shape != expect:
        raise BackendShapeMismatch(
            f"{stage}: latent shape {x.data.shape} does not match declared {expect}"
        )
    if not np.isfinite(x.data).all():
        raise NonFiniteLatent(f"{stage} returned non-finite values")
    return x


def stitch_pair(
    pair: WarpedPair,
    cfg: StitchConfig,
    backend: InpaintBackend,
    capture_steps: bool = False,
) -> PipelineArtifacts:
    """Pipeline body shared by homography and pre-aligned modes."""
    validate_config(cfg)
    i_cf = coarse_fuse(pair)
    masks = build_masks(pair.m_wl, pair.m_wr, pair.domain, cfg)
    i_cfr = coarse_rectangle(i_cf, masks.m_rect, cfg)
    stitched, steps = run_guided_reverse(i_cfr, masks, cfg, backend, capture_steps=capture_steps)
    return PipelineArtifacts(
        coarse_fusion=i_cf,
        coarse_rectangling=i_cfr,
        masks=masks,
        stitched=stitched,
        per_step_masks=steps,
    )


def stitch(
    i_l: ImageBuffer,
    i_r: ImageBuffer,
    h: Homography,
    cfg: StitchConfig,
    backend: InpaintBackend,
    capture_steps: bool = False,
    image_interp: str = "bilinear",
) -> PipelineArtifacts:
    """Align, fuse, build masks, coarse-rectangle, then run the reverse
    process; deterministic for fixed (inputs, config, backend)."""
    validate_config(cfg)
    pair = align_pair(i_l, i_r, h, image_interp=image_interp)
    return stitch_pair(pair, cfg, backend, capture_steps=capture_steps)


def prealigned_pair(
    i_wl: ImageBuffer, i_wr: ImageBuffer, m_wl: BinaryMask, m_wr: BinaryMask
) -> WarpedPair:
    """Wrap already-aligned rasters (and their coverage masks) as a pair."""
    shapes = {
        (i_wl.height, i_wl.width),
        (i_wr.height, i_wr.width),
        (m_wl.height, m_wl.width),
        (m_wr.height, m_wr.width),
    }
    if len(shapes) != 1:
        raise ValueError(f"pre-aligned rasters disagree on size: {sorted(shapes)}")
    from .errors import NoOverlap

    if not (m_wl & m_wr).any():
        raise NoOverlap("pre-aligned coverage masks do not intersect")
    h, w = i_wl.height, i_wl.width
    domain = StitchDomain(w_star=w, h_star=h, offset_x=0, offset_y=0)
    return WarpedPair(
        i_wl=i_wl.to_rgb(), i_wr=i_wr.to_rgb(), m_wl=m_wl, m_wr=m_wr, domain=domain
    )
