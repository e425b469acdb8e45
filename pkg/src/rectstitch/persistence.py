"""Image I/O at the 8-bit boundary, artifact-directory layout, and run
manifests for reproducibility."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import __version__
from .errors import CorruptFile, UnsupportedFormat
from .model import BinaryMask, ImageBuffer, WeightMask

_EXTENSIONS = {".png", ".jpg", ".jpeg"}


def _check_extension(path: Path) -> None:
    if path.suffix.lower() not in _EXTENSIONS:
        raise UnsupportedFormat(f"{path}: only PNG and 8-bit JPEG are supported")


def read_image(path: str | Path) -> ImageBuffer:
    path = Path(path)
    _check_extension(path)
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode not in ("L", "RGB"):
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    return ImageBuffer.from_uint8(arr)


def write_image(path: str | Path, img: ImageBuffer) -> None:
    path = Path(path)
    _check_extension(path)
    arr = img.to_uint8()
    if arr.shape[2] == 1:
        arr = arr[:, :, 0]
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path)


def write_mask(path: str | Path, mask: BinaryMask) -> None:
    write_image(path, ImageBuffer(mask.bits.astype(np.float32)[:, :, None]))


def write_weights(path: str | Path, weights: WeightMask) -> None:
    write_image(path, ImageBuffer(weights.weights[:, :, None]))


def read_mask(path: str | Path) -> BinaryMask:
    img = read_image(path)
    lum = img.data.mean(axis=2)
    return BinaryMask(lum > 0.5)


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Reproducibility record: two runs whose manifests agree (timings aside)
    must produce byte-identical outputs."""

    config: dict
    input_hashes: dict[str, str]
    backend_capabilities: dict
    tool_version: str = __version__
    stage_seconds: dict[str, float] = field(default_factory=dict)

    def equivalent(self, other: "RunManifest") -> bool:
        return (
            self.config == other.config
            and self.input_hashes == other.input_hashes
            and self.backend_capabilities == other.backend_capabilities
            and self.tool_version == other.tool_version
        )


def write_manifest(out_dir: str | Path, manifest: RunManifest) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(out_dir: str | Path) -> RunManifest:
    path = Path(out_dir) / "manifest.json"
    data = json.loads(path.read_text())
    return RunManifest(**data)


def dump_artifacts(out_dir: str | Path, artifacts, dump_step_masks: bool = False) -> None:
    """Write the standard artifact layout for one stitch job."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_image(out / "coarse_fusion.png", artifacts.coarse_fusion)
    write_image(out / "coarse_rectangling.png", artifacts.coarse_rectangling)
    m = artifacts.masks
    write_mask(out / "mask_seam.png", m.m_seam)
    write_mask(out / "mask_rect.png", m.m_rect)
    write_mask(out / "mask_inpaint.png", m.m_inpaint)
    write_weights(out / "w_init.png", m.w_init)
    write_weights(out / "w_inpaint.png", m.w_inpaint)
    if dump_step_masks and artifacts.per_step_masks:
        step_dir = out / "step_masks"
        step_dir.mkdir(exist_ok=True)
        n = len(artifacts.per_step_masks)
        for i, sm in enumerate(artifacts.per_step_masks):
            write_mask(step_dir / f"t{n - 1 - i:04d}.png", sm)
