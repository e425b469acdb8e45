import numpy as np
import pytest

from rectstitch.errors import CorruptFile, UnsupportedFormat
from rectstitch.model import BinaryMask, ImageBuffer
from rectstitch.persistence import (
    RunManifest,
    read_image,
    read_manifest,
    read_mask,
    sha256_file,
    write_image,
    write_manifest,
    write_mask,
)
from rectstitch.synthetic import synth_scene


class TestImageIO:
    def test_png_round_trip_bit_exact(self, tmp_path, rng):
        img = ImageBuffer.from_uint8(rng.integers(0, 256, (20, 30, 3), dtype=np.uint8))
        path = tmp_path / "img.png"
        write_image(path, img)
        assert read_image(path) == img

    def test_grayscale_round_trip(self, tmp_path, rng):
        img = ImageBuffer.from_uint8(rng.integers(0, 256, (16, 16, 1), dtype=np.uint8))
        path = tmp_path / "gray.png"
        write_image(path, img)
        back = read_image(path)
        assert np.array_equal(back.data[:, :, 0], img.data[:, :, 0])

    def test_jpeg_read_differs_only_by_codec_loss(self, tmp_path):
        img = synth_scene(64, 48, seed=1)
        jpg = tmp_path / "img.jpg"
        write_image(jpg, img)
        back = read_image(jpg)
        assert back.data.shape == img.data.shape
        assert np.abs(back.data - img.data).mean() < 0.05

    def test_unsupported_extension(self, tmp_path):
        with pytest.raises(UnsupportedFormat):
            read_image(tmp_path / "img.tiff")

    def test_truncated_file_is_corrupt(self, tmp_path):
        img = synth_scene(32, 32, seed=2)
        path = tmp_path / "img.png"
        write_image(path, img)
        path.write_bytes(path.read_bytes()[:40])
        with pytest.raises(CorruptFile):
            read_image(path)

    def test_mask_round_trip(self, tmp_path, rng):
        mask = BinaryMask(rng.random((12, 18)) < 0.5)
        path = tmp_path / "mask.png"
        write_mask(path, mask)
        assert read_mask(path) == mask


class TestManifest:
    def _manifest(self):
        return RunManifest(
            config={"steps": 50, "seed": 0},
            input_hashes={"left": "ab" * 32, "right": "cd" * 32},
            backend_capabilities={"latent_scale": 1},
            stage_seconds={"stitch": 1.25},
        )

    def test_round_trip_equality(self, tmp_path):
        manifest = self._manifest()
        write_manifest(tmp_path, manifest)
        assert read_manifest(tmp_path) == manifest

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_manifest(tmp_path)

    def test_equivalence_ignores_timings(self, tmp_path):
        a = self._manifest()
        b = RunManifest(
            config=a.config,
            input_hashes=a.input_hashes,
            backend_capabilities=a.backend_capabilities,
            stage_seconds={"stitch": 99.0},
        )
        assert a != b
        assert a.equivalent(b)

    def test_hash_tracks_content(self, tmp_path):
        path = tmp_path / "input.bin"
        path.write_bytes(b"before")
        h1 = sha256_file(path)
        path.write_bytes(b"after")
        assert sha256_file(path) != h1
