import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import hexcone_hsv
from wildfire_aug.imgcore import (FIRE, SamplePair, clip_u8, hsv_to_rgb, min_prescale, read_image,
                                  read_mask, resize, rgb_to_hsv, rotate_prescaled, write_image,
                                  write_mask)


class TestHSV:
    def test_pure_red(self):
        np.testing.assert_allclose(rgb_to_hsv((255, 0, 0)), (0.0, 1.0, 255))

    def test_gray_has_no_saturation(self):
        np.testing.assert_allclose(rgb_to_hsv((128, 128, 128)), (0.0, 0.0, 128))

    def test_azure_matches_hand_value(self):
        # blue is max: h = 60 * ((r - g) / d + 4) = 240 - 60 * 128 / 255
        h, s, v = rgb_to_hsv((0, 128, 255))
        assert h == pytest.approx(209.88235294117646)
        assert s == pytest.approx(1.0)
        assert v == 255

    def test_gray_back(self):
        assert tuple(hsv_to_rgb((0.0, 0.0, 200))) == (200, 200, 200)

    def test_pure_green(self):
        assert tuple(hsv_to_rgb((120.0, 1.0, 255))) == (0, 255, 0)

    def test_roundtrip_sample(self):
        assert tuple(hsv_to_rgb(rgb_to_hsv((10, 200, 30)))) == (10, 200, 30)

    def test_matches_textbook_formula_on_grid(self):
        vals = np.arange(0, 256, 15)
        rgb = np.stack(np.meshgrid(vals, vals, vals, indexing="ij"), axis=-1).reshape(-1, 3)
        got = rgb_to_hsv(rgb)
        want = np.array([hexcone_hsv(*map(int, t)) for t in rgb])
        np.testing.assert_allclose(got, want, atol=1e-9)

    def test_roundtrip_error_at_most_one(self):
        vals = np.arange(0, 256, 5)
        rgb = np.stack(np.meshgrid(vals, vals, vals, indexing="ij"), axis=-1).reshape(-1, 3)
        back = hsv_to_rgb(rgb_to_hsv(rgb)).astype(int)
        assert np.abs(back - rgb).max() <= 1

    def test_hue_range(self):
        rgb = np.random.default_rng(0).integers(0, 256, size=(5000, 3))
        h = rgb_to_hsv(rgb)[:, 0]
        assert h.min() >= 0 and h.max() < 360


@pytest.mark.parametrize("x, want", [(270.3, 255), (-4, 0), (128.4, 128)])
def test_clip_u8(x, want):
    assert clip_u8(x) == want


class TestResize:
    def test_downscale_4000x3000_to_256(self):
        img = np.zeros((3000, 4000, 3), dtype=np.uint8)
        assert resize(img, 256, 256).shape == (256, 256, 3)

    def test_identity(self):
        img = np.random.default_rng(1).integers(0, 256, (256, 256, 3), dtype=np.uint8)
        out = resize(img, 256, 256)
        assert np.array_equal(out, img) and out is not img

    def test_mask_nearest_replication(self):
        m = np.array([[3, 3], [0, 0]], dtype=np.uint8)
        out = resize(m, 4, 4)
        assert (out[:2] == 3).all() and (out[2:] == 0).all()

    def test_zero_size_rejected(self):
        with pytest.raises(ValueError):
            resize(np.zeros((4, 4), dtype=np.uint8), 0, 4)

    @given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_mask_labels_subset(self, w, h, seed):
        m = np.random.default_rng(seed).choice([0, 2], size=(17, 23)).astype(np.uint8)
        out = resize(m, w, h)
        assert out.shape == (h, w)
        assert set(np.unique(out)) <= set(np.unique(m))

    def test_bilinear_constant_field(self):
        img = np.full((30, 40, 3), 77, dtype=np.uint8)
        assert (resize(img, 13, 9) == 77).all()


class TestRotatePrescaled:
    def test_zero_angle_is_centre_crop_of_upscale(self):
        rng = np.random.default_rng(2)
        img = rng.integers(0, 256, (21, 31, 3), dtype=np.uint8)
        out = rotate_prescaled(img, 0, 1.66)
        # manual bilinear sample of the zoom at each output pixel
        H, W = img.shape[:2]
        cy, cx = (H - 1) / 2, (W - 1) / 2
        want = np.zeros(img.shape)
        f = img.astype(float)
        for y in range(H):
            for x in range(W):
                sy, sx = cy + (y - cy) / 1.66, cx + (x - cx) / 1.66
                y0, x0 = int(np.floor(sy)), int(np.floor(sx))
                y1, x1 = min(y0 + 1, H - 1), min(x0 + 1, W - 1)
                fy, fx = sy - y0, sx - x0
                want[y, x] = ((1 - fy) * ((1 - fx) * f[y0, x0] + fx * f[y0, x1])
                              + fy * ((1 - fx) * f[y1, x0] + fx * f[y1, x1]))
        assert np.abs(out.astype(int) - np.floor(want + 0.5)).max() <= 1

    @pytest.mark.parametrize("angle", [0, 13, 45, 90, 200, 359])
    def test_uniform_gray_stays_uniform(self, angle):
        img = np.full((40, 50, 3), 128, dtype=np.uint8)
        assert (rotate_prescaled(img, angle) == 128).all()

    def test_centre_is_fixed(self):
        img = np.zeros((41, 41, 3), dtype=np.uint8) + 10
        img[20, 20] = (255, 0, 0)
        out = rotate_prescaled(img, 90, 1.66)
        assert tuple(out[20, 20]) == (255, 0, 0)

    @pytest.mark.parametrize("angle", range(0, 360, 7))
    def test_shape_and_no_black_fill(self, angle):
        img = np.random.default_rng(angle).integers(1, 256, (48, 48, 3), dtype=np.uint8)
        out = rotate_prescaled(img, angle, np.sqrt(2))
        assert out.shape == img.shape
        assert not (out == 0).all(axis=2).any()

    def test_mask_is_nearest(self):
        m = np.random.default_rng(3).choice([0, 3], size=(40, 40)).astype(np.uint8)
        out = rotate_prescaled(m, 33)
        assert set(np.unique(out)) <= {0, 3}

    def test_min_prescale(self):
        assert min_prescale(4000, 3000) == pytest.approx(5 / 3)
        assert min_prescale(256, 256) == pytest.approx(np.sqrt(2))

    def test_rejects_shrink(self):
        with pytest.raises(ValueError):
            rotate_prescaled(np.zeros((4, 4, 3), dtype=np.uint8), 10, 0.5)


def test_png_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    img = rng.integers(0, 256, (20, 30, 3), dtype=np.uint8)
    mask = rng.integers(0, 4, (20, 30)).astype(np.uint8)
    write_image(tmp_path / "a.png", img)
    write_mask(tmp_path / "a_mask.png", mask)
    assert np.array_equal(read_image(tmp_path / "a.png"), img)
    assert np.array_equal(read_mask(tmp_path / "a_mask.png"), mask)
    from PIL import Image
    with Image.open(tmp_path / "a_mask.png") as im:
        assert im.mode == "P"


def test_sample_pair_validation():
    with pytest.raises(ValueError):
        SamplePair(np.zeros((4, 4, 3), np.uint8), np.zeros((4, 5), np.uint8), "x")
    with pytest.raises(ValueError):
        SamplePair(np.zeros((4, 4, 3), np.uint8), np.full((4, 4), 7, np.uint8), "x")
    p = SamplePair(np.zeros((4, 5, 3), np.uint8), np.full((4, 5), FIRE, np.uint8), "x")
    assert p.size == (5, 4)
