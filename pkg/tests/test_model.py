import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rectstitch.errors import DegenerateHomography, InvalidConfig
from rectstitch.model import (
    BinaryMask,
    Homography,
    ImageBuffer,
    StitchConfig,
    build_config,
    load_config_file,
    validate_config,
)


class TestStitchConfig:
    def test_defaults_are_valid(self):
        cfg = StitchConfig()
        validate_config(cfg)
        assert cfg.band_divisor == 200.0
        assert cfg.band_multiplier == 10
        assert cfg.dt_kernel == 3
        assert cfg.telea_radius == 20
        assert cfg.seam_strength == 128
        assert cfg.fill_strength == 128
        assert cfg.steps == 50
        assert cfg.guidance_scale == 7.5
        assert cfg.seed == 0
        assert cfg.prompt == ""

    def test_zero_divisor_rejected(self):
        with pytest.raises(InvalidConfig) as exc:
            validate_config(StitchConfig(band_divisor=0.0))
        assert exc.value.field == "lambda"

    def test_out_of_range_strength_rejected(self):
        with pytest.raises(InvalidConfig) as exc:
            validate_config(StitchConfig(seam_strength=300))
        assert exc.value.field == "eps1"

    @pytest.mark.parametrize(
        "kw,field",
        [
            (dict(band_multiplier=0), "delta"),
            (dict(dt_kernel=4), "kg"),
            (dict(telea_radius=0), "radius"),
            (dict(fill_strength=-1), "eps2"),
            (dict(steps=0), "steps"),
        ],
    )
    def test_each_bound_is_named(self, kw, field):
        with pytest.raises(InvalidConfig) as exc:
            validate_config(StitchConfig(**kw))
        assert exc.value.field == field

    def test_config_file_and_cli_precedence(self, tmp_path):
        path = tmp_path / "stitch.cfg"
        path.write_text("# comment\nlambda = 100\nsteps = 25\nprompt = hello\n")
        file_only = build_config(path)
        assert file_only.band_divisor == 100.0
        assert file_only.steps == 25
        assert file_only.prompt == "hello"
        merged = build_config(path, {"steps": 7})
        assert merged.steps == 7
        assert merged.band_divisor == 100.0

    def test_config_file_rejects_unknown_key(self, tmp_path):
        path = tmp_path / "stitch.cfg"
        path.write_text("bogus = 1\n")
        with pytest.raises(InvalidConfig):
            load_config_file(path)

    def test_ablation_override(self):
        cfg = StitchConfig().with_overrides(disable_weighted_init=True, steps=3)
        assert cfg.ablation.disable_weighted_init
        assert not cfg.ablation.disable_coarse_rectangling
        assert cfg.steps == 3


class TestImageBuffer:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            ImageBuffer(np.full((4, 4, 3), 1.5, dtype=np.float32))

    def test_rejects_nan(self):
        a = np.zeros((4, 4, 3), dtype=np.float32)
        a[0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            ImageBuffer(a)

    def test_immutable(self):
        img = ImageBuffer(np.zeros((2, 2, 3), dtype=np.float32))
        with pytest.raises(ValueError):
            img.data[0, 0, 0] = 1.0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_eight_bit_round_trip_within_half_step(self, seed):
        rng = np.random.default_rng(seed)
        img = ImageBuffer(rng.random((6, 5, 3), dtype=np.float32))
        back = ImageBuffer.from_uint8(img.to_uint8())
        assert np.abs(back.data - img.data).max() <= 1.0 / 255.0

    def test_grid_values_round_trip_exactly(self):
        levels = np.arange(256, dtype=np.uint8).reshape(16, 16, 1)
        img = ImageBuffer.from_uint8(levels)
        assert np.array_equal(img.to_uint8(), levels)


class TestBinaryMaskAlgebra:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_boolean_identities(self, seed):
        rng = np.random.default_rng(seed)
        h, w = rng.integers(1, 24, 2)
        a = BinaryMask(rng.random((h, w)) < 0.5)
        b = BinaryMask(rng.random((h, w)) < 0.5)
        c = BinaryMask(rng.random((h, w)) < 0.5)
        assert ~(~a) == a
        assert (a & b) == (b & a)
        assert (a | b) == (b | a)
        assert (a ^ b) == ((a | b) & ~(a & b))
        assert ~(a & b) == (~a | ~b)
        assert ~(a | b) == (~a & ~b)
        assert (a & (b | c)) == ((a & b) | (a & c))
        assert (a ^ a).popcount == 0
        assert (a | ~a).all()


class TestHomography:
    def test_normalizes_bottom_right(self):
        h = Homography(2.0 * np.eye(3))
        assert h.m[2, 2] == 1.0

    def test_rejects_singular(self):
        with pytest.raises(DegenerateHomography):
            Homography(np.zeros((3, 3)))

    def test_apply_translation(self):
        h = Homography.translation(3.0, -2.0)
        out = h.apply(np.array([[1.0, 1.0]]))
        assert np.allclose(out, [[4.0, -1.0]])

    def test_inverse_round_trips(self):
        h = Homography(np.array([[1.1, 0.02, 5.0], [-0.03, 0.97, -2.0], [1e-4, -2e-4, 1.0]]))
        pts = np.array([[0.0, 0.0], [10.0, 3.0], [-4.0, 7.5]])
        assert np.allclose(h.inverse().apply(h.apply(pts)), pts, atol=1e-9)
