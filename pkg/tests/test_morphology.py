import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_dilate, brute_erode, exact_edt, random_mask
from rectstitch.model import BinaryMask, ImageBuffer
from rectstitch.morphology import Kernel, dilate, distance_transform, erode, telea_inpaint


class TestKernel:
    def test_even_size_rounds_up(self):
        assert Kernel(4).size == 5

    def test_radius(self):
        assert Kernel(3).radius == 1
        assert Kernel(1).radius == 0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Kernel(0)


class TestDilateErode:
    def test_dilate_empty_and_full(self):
        empty = BinaryMask(np.zeros((8, 8), bool))
        full = BinaryMask(np.ones((8, 8), bool))
        assert dilate(empty, Kernel(5)) == empty
        assert dilate(full, Kernel(5)) == full

    def test_dilate_single_pixel_makes_block(self):
        bits = np.zeros((9, 9), bool)
        bits[4, 4] = True
        out = dilate(BinaryMask(bits), Kernel(3))
        expect = np.zeros((9, 9), bool)
        expect[3:6, 3:6] = True
        assert np.array_equal(out.bits, expect)
        assert np.array_equal(out.bits, brute_dilate(bits, 3))

    def test_erode_empty(self):
        empty = BinaryMask(np.zeros((6, 6), bool))
        assert erode(empty, Kernel(3)) == empty

    def test_erode_full_keeps_border(self):
        # Outside-of-raster is ignored by erosion, so a full mask is a fixed
        # point; this is what keeps the seam band empty when coverage fills
        # the whole domain.
        full = BinaryMask(np.ones((7, 9), bool))
        assert erode(full, Kernel(3)) == full

    def test_closing_contains_original(self, rng):
        bits = random_mask(rng, 16, 16, "blob")
        closed = erode(dilate(BinaryMask(bits), Kernel(3)), Kernel(3))
        assert (closed.bits | ~bits).all()

    @given(st.integers(0, 2**32 - 1), st.sampled_from([3, 5, 7]))
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force_scan(self, seed, size):
        rng = np.random.default_rng(seed)
        h, w = rng.integers(2, 20, 2)
        bits = random_mask(rng, h, w)
        m = BinaryMask(bits)
        assert np.array_equal(dilate(m, Kernel(size)).bits, brute_dilate(bits, size))
        assert np.array_equal(erode(m, Kernel(size)).bits, brute_erode(bits, size))

    @given(st.integers(0, 2**32 - 1), st.sampled_from([3, 5]))
    @settings(max_examples=60, deadline=None)
    def test_duality_exact_everywhere(self, seed, size):
        rng = np.random.default_rng(seed)
        h, w = rng.integers(2, 24, 2)
        m = BinaryMask(random_mask(rng, h, w))
        k = Kernel(size)
        assert erode(m, k) == ~dilate(~m, k)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_dilation_monotone(self, seed):
        rng = np.random.default_rng(seed)
        h, w = rng.integers(2, 24, 2)
        small = random_mask(rng, h, w)
        grown = small | random_mask(rng, h, w)
        d_small = dilate(BinaryMask(small), Kernel(3)).bits
        d_grown = dilate(BinaryMask(grown), Kernel(3)).bits
        assert (d_grown | ~d_small).all()


class TestDistanceTransform:
    def test_all_unset_is_zero(self):
        out = distance_transform(BinaryMask(np.zeros((5, 7), bool)), Kernel(3))
        assert np.array_equal(out, np.zeros((5, 7), dtype=np.float32))

    def test_single_pixel_matches_edt_loosely(self):
        bits = np.zeros((9, 9), bool)
        bits[4, 4] = True
        out = distance_transform(BinaryMask(bits), Kernel(3))
        oracle = exact_edt(bits)
        assert abs(out[4, 4] - oracle[4, 4]) <= 0.05
        assert out[4, 4] == pytest.approx(0.955)
        assert np.count_nonzero(out) == 1

    def test_half_plane_grows_linearly(self):
        bits = np.zeros((64, 64), bool)
        bits[32:, :] = True
        out = distance_transform(BinaryMask(bits), Kernel(3))
        oracle = exact_edt(bits)
        # The chamfer and exact ramps agree after normalizing each by its
        # peak; raw 3x3 chamfer carries the intrinsic 4.5% axial deficit.
        norm_err = np.abs(out / out.max() - oracle / oracle.max()).max()
        assert norm_err <= 0.025
        rows = out[:, 10]
        diffs = np.diff(rows[32:])
        assert np.allclose(diffs, diffs[0])

    def test_all_set_measures_to_border(self):
        out = distance_transform(BinaryMask(np.ones((9, 9), bool)), Kernel(3))
        assert out[0, 0] == pytest.approx(0.955)
        assert out[4, 4] == pytest.approx(0.955 * 5)
        assert out.max() == out[4, 4]

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_three_by_three_within_intrinsic_bound(self, seed):
        # 0.955/1.3693 chamfer: worst-case per-unit error is 4.5% (axial).
        rng = np.random.default_rng(seed)
        h, w = rng.integers(4, 64, 2)
        bits = random_mask(rng, h, w)
        if not bits.any() or bits.all():
            return
        out = distance_transform(BinaryMask(bits), Kernel(3))
        oracle = exact_edt(bits)
        sel = bits
        assert (np.abs(out - oracle)[sel] / oracle[sel]).max() <= 0.046

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_five_by_five_within_quarter_percent_of_exact(self, seed):
        rng = np.random.default_rng(seed)
        h, w = rng.integers(4, 64, 2)
        bits = random_mask(rng, h, w)
        if not bits.any() or bits.all():
            return
        out = distance_transform(BinaryMask(bits), Kernel(5))
        oracle = exact_edt(bits)
        sel = bits
        assert (np.abs(out - oracle)[sel] / oracle[sel]).max() <= 0.025


def make_gradient_image(h, w, slope=(0.5, 0.3), base=0.2):
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float32)
    plane = base + slope[0] * yy / h + slope[1] * xx / w
    return ImageBuffer(np.clip(np.repeat(plane[:, :, None], 3, axis=2), 0, 1))


class TestTeleaInpaint:
    def test_empty_hole_returns_copy(self, rng):
        img = ImageBuffer(rng.random((10, 10, 3), dtype=np.float32))
        out = telea_inpaint(img, BinaryMask(np.zeros((10, 10), bool)), 5)
        assert out == img

    def test_constant_image_filled_exactly(self):
        img = ImageBuffer(np.full((16, 16, 3), 0.25, dtype=np.float32))
        hole = np.zeros((16, 16), bool)
        hole[4:11, 5:12] = True
        out = telea_inpaint(img, BinaryMask(hole), 6)
        assert np.allclose(out.data, 0.25, atol=1e-6)

    def test_linear_gradient_small_hole(self):
        img = make_gradient_image(40, 40)
        hole = np.zeros((40, 40), bool)
        hole[18:23, 17:22] = True
        out = telea_inpaint(img, BinaryMask(hole), 20)
        assert np.abs(out.data - img.data).max() <= 3.0 / 255.0

    def test_single_pixel_hole_is_neighbor_average(self):
        img = make_gradient_image(21, 21)
        hole = np.zeros((21, 21), bool)
        hole[10, 10] = True
        out = telea_inpaint(img, BinaryMask(hole), 20)
        neighbors = np.stack(
            [img.data[9, 10], img.data[11, 10], img.data[10, 9], img.data[10, 11]]
        )
        assert np.abs(out.data[10, 10] - neighbors.mean(axis=0)).max() <= 1.0 / 255.0

    def test_all_hole_fills_zero_with_warning(self, caplog):
        img = ImageBuffer(np.full((6, 6, 3), 0.7, dtype=np.float32))
        with caplog.at_level("WARNING"):
            out = telea_inpaint(img, BinaryMask(np.ones((6, 6), bool)), 4)
        assert np.array_equal(out.data, np.zeros_like(img.data))
        assert any("whole image" in r.message for r in caplog.records)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_non_hole_pixels_bit_exact(self, seed):
        rng = np.random.default_rng(seed)
        img = ImageBuffer(rng.random((18, 15, 3), dtype=np.float32))
        hole = random_mask(rng, 18, 15, "blob")
        if hole.all():
            hole[0, 0] = False
        out = telea_inpaint(img, BinaryMask(hole), int(rng.integers(2, 12)))
        keep = ~hole
        assert np.array_equal(out.data[keep], img.data[keep])

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_no_overshoot_beyond_known_range(self, seed):
        rng = np.random.default_rng(seed)
        img = ImageBuffer(rng.random((16, 16, 3), dtype=np.float32))
        hole = random_mask(rng, 16, 16, "disc")
        if hole.all():
            hole[0, 0] = False
        if not hole.any():
            return
        out = telea_inpaint(img, BinaryMask(hole), 8)
        known = img.data[~hole]
        assert out.data.min() >= known.min() - 1e-6
        assert out.data.max() <= known.max() + 1e-6
