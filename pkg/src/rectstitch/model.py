"""Core value types: rasters, homographies, and the pipeline configuration.

Images are 8-bit at the file boundary and real-valued in [0, 1] everywhere
inside the pipeline; weighted-mask multiplication and latent arithmetic need
sub-8-bit precision. All types are immutable after construction and safe to
share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InvalidConfig


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ImageBuffer:
    """H x W x C raster with C in {1, 3}, float32 values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float32)
        if a.ndim == 2:
            a = a[:, :, None]
        if a.ndim != 3 or a.shape[2] not in (1, 3):
            raise ValueError(f"expected HxWxC raster with 1 or 3 channels, got shape {a.shape}")
        if not np.isfinite(a).all():
            raise ValueError("image contains non-finite values")
        if a.min() < 0.0 or a.max() > 1.0:
            raise ValueError("image values outside [0, 1]")
        object.__setattr__(self, "data", _freeze(np.ascontiguousarray(a)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @classmethod
    def from_uint8(cls, a: np.ndarray) -> "ImageBuffer":
        return cls(np.asarray(a, dtype=np.float32) / 255.0)

    def to_uint8(self) -> np.ndarray:
        return np.round(np.clip(self.data, 0.0, 1.0) * 255.0).astype(np.uint8)

    def to_rgb(self) -> "ImageBuffer":
        if self.channels == 3:
            return self
        return ImageBuffer(np.repeat(self.data, 3, axis=2))

    def __eq__(self, other) -> bool:
        return isinstance(other, ImageBuffer) and np.array_equal(self.data, other.data)


@dataclass(frozen=True)
class BinaryMask:
    """H x W boolean raster; the subject of all morphological calculus."""

    bits: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.bits)
        if a.dtype != np.bool_:
            if not np.isin(a, (0, 1)).all():
                raise ValueError("mask values must be 0/1")
            a = a.astype(bool)
        if a.ndim != 2:
            raise ValueError(f"expected HxW mask, got shape {a.shape}")
        object.__setattr__(self, "bits", _freeze(np.ascontiguousarray(a)))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def popcount(self) -> int:
        return int(self.bits.sum())

    def any(self) -> bool:
        return bool(self.bits.any())

    def all(self) -> bool:
        return bool(self.bits.all())

    def __and__(self, other: "BinaryMask") -> "BinaryMask":
        return BinaryMask(self.bits & other.bits)

    def __or__(self, other: "BinaryMask") -> "BinaryMask":
        return BinaryMask(self.bits | other.bits)

    def __xor__(self, other: "BinaryMask") -> "BinaryMask":
        return BinaryMask(self.bits ^ other.bits)

    def __invert__(self) -> "BinaryMask":
        return BinaryMask(~self.bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, BinaryMask) and np.array_equal(self.bits, other.bits)


@dataclass(frozen=True)
class WeightMask:
    """H x W real-valued raster in [0, 1]; carries retention/inpaint ramps."""

    weights: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.weights, dtype=np.float32)
        if a.ndim != 2:
            raise ValueError(f"expected HxW weights, got shape {a.shape}")
        if not np.isfinite(a).all():
            raise ValueError("weights contain non-finite values")
        if a.min() < 0.0 or a.max() > 1.0:
            raise ValueError("weights outside [0, 1]")
        object.__setattr__(self, "weights", _freeze(np.ascontiguousarray(a)))

    @property
    def height(self) -> int:
        return self.weights.shape[0]

    @property
    def width(self) -> int:
        return self.weights.shape[1]

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightMask) and np.array_equal(self.weights, other.weights)


@dataclass(frozen=True)
class Homography:
    """3x3 projective transform acting on homogeneous pixel coordinates.

    Normalized so m[2, 2] == 1 whenever that entry is nonzero; must be
    invertible (|det| > 1e-12).
    """

    m: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.m, dtype=np.float64)
        if a.shape != (3, 3):
            raise ValueError(f"expected 3x3 matrix, got shape {a.shape}")
        if abs(np.linalg.det(a)) <= 1e-12:
            from .errors import DegenerateHomography

            raise DegenerateHomography(f"matrix is singular (|det|={abs(np.linalg.det(a)):.3e})")
        if a[2, 2] != 0.0:
            a = a / a[2, 2]
        object.__setattr__(self, "m", _freeze(np.ascontiguousarray(a)))

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    @classmethod
    def translation(cls, tx: float, ty: float) -> "Homography":
        m = np.eye(3)
        m[0, 2] = tx
        m[1, 2] = ty
        return cls(m)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))

    def apply(self, pts: np.ndarray) -> np.ndarray:
        """Map an (N, 2) array of (x, y) points; raises on points at infinity."""
        from .errors import DegenerateHomography

        pts = np.asarray(pts, dtype=np.float64)
        hom = np.c_[pts, np.ones(len(pts))] @ self.m.T
        w = hom[:, 2]
        if np.abs(w).min() < 1e-9:
            raise DegenerateHomography("point maps to the plane at infinity")
        return hom[:, :2] / w[:, None]


@dataclass(frozen=True)
class AblationFlags:
    """Runtime switches that remove one design element at a time."""

    disable_coarse_rectangling: bool = False
    disable_weighted_init: bool = False
    disable_weighted_inpaint: bool = False


@dataclass(frozen=True)
class StitchConfig:
    """Every pipeline hyper-parameter plus the ablation switches.

    ``seam_strength`` and ``fill_strength`` are declared on the 0-255 scale
    (matching the CLI) and divided by 255 where the weighted masks are built.
    """

    band_divisor: float = 200.0      # CLI --lambda: seam-band divisor
    band_multiplier: int = 10        # CLI --delta: seam-band multiplier
    dt_kernel: int = 3               # CLI --kg: distance-transform chamfer mask (3 or 5)
    telea_radius: int = 20           # CLI --radius: fast-marching neighborhood radius
    seam_strength: int = 128         # CLI --eps1: seam-area inpainting strength, 0-255
    fill_strength: int = 128         # CLI --eps2: rectangling-area inpainting strength, 0-255
    steps: int = 50                  # CLI --steps: reverse-process iterations
    guidance_scale: float = 7.5      # CLI --guidance
    seed: int = 0                    # CLI --seed
    prompt: str = ""                 # CLI --prompt; empty by design
    ablation: AblationFlags = field(default_factory=AblationFlags)

    def with_overrides(self, **kw) -> "StitchConfig":
        ablation_kw = {k: kw.pop(k) for k in list(kw) if hasattr(AblationFlags(), k)}
        cfg = replace(self, **kw)
        if ablation_kw:
            cfg = replace(cfg, ablation=replace(cfg.ablation, **ablation_kw))
        return cfg


# External (CLI flag / config file) key -> StitchConfig field.
CONFIG_KEYS = {
    "lambda": "band_divisor",
    "delta": "band_multiplier",
    "kg": "dt_kernel",
    "radius": "telea_radius",
    "eps1": "seam_strength",
    "eps2": "fill_strength",
    "steps": "steps",
    "guidance": "guidance_scale",
    "seed": "seed",
    "prompt": "prompt",
    "disable_coarse_rectangling": "disable_coarse_rectangling",
    "disable_weighted_init": "disable_weighted_init",
    "disable_weighted_inpaint": "disable_weighted_inpaint",
}

_FIELD_TO_KEY = {
    "band_divisor": "lambda",
    "band_multiplier": "delta",
    "dt_kernel": "kg",
    "telea_radius": "radius",
    "seam_strength": "eps1",
    "fill_strength": "eps2",
    "steps": "steps",
    "guidance_scale": "guidance",
    "seed": "seed",
}


def validate_config(cfg: StitchConfig) -> None:
    """Raise InvalidConfig naming the external key of the first violated field."""
    if not (cfg.band_divisor > 0):
        raise InvalidConfig("lambda", "must be > 0")
    if cfg.band_multiplier < 1:
        raise InvalidConfig("delta", "must be >= 1")
    if cfg.dt_kernel not in (3, 5):
        raise InvalidConfig("kg", "must be 3 or 5")
    if cfg.telea_radius < 1:
        raise InvalidConfig("radius", "must be >= 1")
    if not (0 <= cfg.seam_strength <= 255):
        raise InvalidConfig("eps1", "must be in [0, 255]")
    if not (0 <= cfg.fill_strength <= 255):
        raise InvalidConfig("eps2", "must be in [0, 255]")
    if cfg.steps < 1:
        raise InvalidConfig("steps", "must be >= 1")
    if cfg.seed < 0:
        raise InvalidConfig("seed", "must be a non-negative integer")


_BOOL_KEYS = {"disable_coarse_rectangling", "disable_weighted_init", "disable_weighted_inpaint"}
_INT_KEYS = {"delta", "kg", "radius", "eps1", "eps2", "steps", "seed"}
_FLOAT_KEYS = {"lambda", "guidance"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _BOOL_KEYS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise InvalidConfig(key, f"expected a boolean, got {raw!r}")
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise InvalidConfig(key, f"could not parse {raw!r}") from None
    return raw


def load_config_file(path: str | Path) -> dict:
    """Parse a flat `key = value` config file into StitchConfig field overrides."""
    overrides = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidConfig("config", f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise InvalidConfig(key, f"unknown config key on line {lineno}")
        overrides[CONFIG_KEYS[key]] = _parse_value(key, raw)
    return overrides


def build_config(file_path: str | Path | None = None, cli_overrides: dict | None = None) -> StitchConfig:
    """Defaults, overridden by the config file, overridden by CLI flags."""
    cfg = StitchConfig()
    if file_path is not None:
        cfg = cfg.with_overrides(**load_config_file(file_path))
    if cli_overrides:
        cfg = cfg.with_overrides(**cli_overrides)
    validate_config(cfg)
    return cfg
