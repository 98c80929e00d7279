import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (flood_fill_components, pixel_set, shift_intersection, shift_union,
                     supersampled_rotated_area)
from wildfire_aug.imgcore import FIRE
from wildfire_aug.morphology import (Kernel, Segment, connected_components, crop_to_frame,
                                     dilate, erode, filter_by_area, rotate_segment, with_pixels)


def seg_of(bitmap, origin=(0, 0)):
    return Segment(np.asarray(bitmap, dtype=bool), origin)


def masks(max_side=32):
    return st.tuples(st.integers(1, max_side), st.integers(1, max_side),
                     st.integers(0, 2**32 - 1), st.floats(0.1, 0.9))


def random_bitmap(h, w, seed, p):
    return np.random.default_rng(seed).random((h, w)) < p


class TestKernel:
    @pytest.mark.parametrize("size", [0, 2, -1])
    def test_invalid(self, size):
        with pytest.raises(ValueError):
            Kernel(size)

    def test_half(self):
        assert Kernel(5).half == 2


class TestConnectedComponents:
    def test_two_blobs(self):
        m = np.zeros((10, 10), np.uint8)
        m[1:3, 1:3] = FIRE
        m[6:9, 6:9] = FIRE
        segs = connected_components(m, FIRE)
        assert [s.area for s in segs] == [4, 9]
        assert segs[1].origin == (6, 6)

    def test_absent_class(self):
        assert connected_components(np.zeros((5, 5), np.uint8), FIRE) == []

    def test_diagonal_touch_is_one_component(self):
        m = np.zeros((4, 4), np.uint8)
        m[0, 0] = m[1, 1] = m[2, 2] = FIRE
        assert len(connected_components(m, FIRE)) == 1

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_flood_fill_8x8(self, seed):
        binary = random_bitmap(8, 8, seed, 0.45)
        m = np.where(binary, FIRE, 0).astype(np.uint8)
        got = {frozenset(pixel_set(s.bitmap, s.origin)) for s in connected_components(m, FIRE)}
        assert got == set(flood_fill_components(binary))

    @given(masks())
    @settings(max_examples=60, deadline=None)
    def test_partition(self, args):
        h, w, seed, p = args
        binary = random_bitmap(h, w, seed, p)
        m = np.where(binary, FIRE, 2).astype(np.uint8)
        sets = [pixel_set(s.bitmap, s.origin) for s in connected_components(m, FIRE)]
        union = set().union(*sets) if sets else set()
        assert union == pixel_set(binary)
        assert sum(len(s) for s in sets) == len(union)


class TestDilate:
    def test_single_pixel_k5(self):
        out = dilate(seg_of([[1]], (10, 10)), 5)
        assert out.area == 25 and out.shape == (5, 5) and out.origin == (8, 8)

    def test_identity_kernel(self):
        s = seg_of(random_bitmap(7, 9, 0, 0.5), (3, 4))
        out = dilate(s, Kernel(1))
        assert np.array_equal(out.bitmap, s.bitmap) and out.origin == s.origin

    @pytest.mark.parametrize("seed", range(10))
    def test_shift_union_16x16_k3(self, seed):
        s = seg_of(random_bitmap(16, 16, seed, 0.3), (5, 7))
        out = dilate(s, 3)
        assert pixel_set(out.bitmap, out.origin) == shift_union(pixel_set(s.bitmap, s.origin), 1)

    def test_area_grows(self):
        s = seg_of(random_bitmap(12, 12, 1, 0.4))
        assert dilate(s, 5).area >= s.area


class TestErode:
    def test_square_k3(self):
        out = erode(seg_of(np.ones((5, 5))), 3)
        assert out.area == 9
        assert np.array_equal(out.trim().bitmap, np.ones((3, 3), bool))

    def test_identity_kernel(self):
        s = seg_of(random_bitmap(7, 9, 2, 0.5))
        assert np.array_equal(erode(s, 1).bitmap, s.bitmap)

    @pytest.mark.parametrize("seed", range(10))
    def test_shift_intersection_16x16_k3(self, seed):
        s = seg_of(random_bitmap(16, 16, seed, 0.7), (2, 1))
        out = erode(s, 3)
        assert pixel_set(out.bitmap, out.origin) == shift_intersection(
            pixel_set(s.bitmap, s.origin), 1)

    def test_thin_segment_vanishes(self):
        out = erode(seg_of(np.ones((2, 20))), 3)
        assert out.empty and out.area == 0

    def test_pixels_follow_bitmap(self):
        s = with_pixels(seg_of(np.ones((5, 5))), np.full((5, 5, 3), 9, np.uint8))
        out = erode(s, 3)
        assert (out.pixels[out.bitmap] == 9).all() and (out.pixels[~out.bitmap] == 0).all()


class TestMorphologyProperties:
    @given(masks(), st.sampled_from([1, 3, 5, 7]))
    @settings(max_examples=60, deadline=None)
    def test_closing_contains_opening_contained(self, args, k):
        h, w, seed, p = args
        s = seg_of(random_bitmap(h, w, seed, p), (4, 4))
        pts = pixel_set(s.bitmap, s.origin)
        closed = erode(dilate(s, k), k)
        opened = dilate(erode(s, k), k)
        assert pts <= pixel_set(closed.bitmap, closed.origin)
        assert pixel_set(opened.bitmap, opened.origin) <= pts

    @given(masks())
    @settings(max_examples=40, deadline=None)
    def test_erosion_monotone(self, args):
        h, w, seed, p = args
        s = seg_of(random_bitmap(h, w, seed, p))
        areas = [erode(s, k).area for k in (1, 3, 5, 7)]
        assert areas == sorted(areas, reverse=True)


class TestRotateSegment:
    def test_zero(self):
        s = seg_of(random_bitmap(6, 4, 3, 0.6))
        assert np.array_equal(rotate_segment(s, 0).bitmap, s.bitmap)

    def test_l_shape_90_is_rot90(self):
        L = np.array([[1, 0, 0], [1, 0, 0], [1, 1, 1]], bool)
        out = rotate_segment(seg_of(L), 90)
        assert np.array_equal(out.bitmap, np.rot90(L))

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_right_angles_are_permutations(self, k):
        b = random_bitmap(5, 8, k, 0.6)
        b[0, 0] = b[-1, -1] = True  # keep the bounding box tight
        out = rotate_segment(seg_of(b), 90 * k)
        assert np.array_equal(out.bitmap, np.rot90(b, k))

    def test_disk_area_37deg(self):
        yy, xx = np.mgrid[0:11, 0:11]
        disk = (yy - 5) ** 2 + (xx - 5) ** 2 <= 25
        # supersampled continuous rotation keeps the area at 81.02 (input 81)
        oracle = supersampled_rotated_area(disk, 37, 16)
        assert oracle == pytest.approx(81.015625)
        got = rotate_segment(seg_of(disk), 37).area
        assert abs(got - oracle) <= 0.15 * disk.sum()

    def test_pixels_rotate_with_bitmap(self):
        b = np.ones((3, 5), bool)
        px = np.arange(45, dtype=np.uint8).reshape(3, 5, 3)
        out = rotate_segment(Segment(b, (0, 0), FIRE, px), 90)
        assert np.array_equal(out.pixels, np.rot90(px, 1, axes=(0, 1)))


class TestFilterAndCrop:
    def test_hundred_pixel_threshold(self):
        segs = [seg_of(np.ones((1, n))) for n in (25, 100, 101)]
        assert [s.area for s in filter_by_area(segs, 100)] == [100, 101]

    def test_zero_threshold_identity(self):
        segs = [seg_of(np.ones((1, n))) for n in (3, 1, 2)]
        assert filter_by_area(segs, 0) == segs

    def test_all_below(self):
        assert filter_by_area([seg_of(np.ones((2, 2)))], 5) == []

    def test_crop_to_frame(self):
        s = dilate(seg_of([[1]], (0, 0)), 5)
        c = crop_to_frame(s, 10, 10)
        assert c.origin == (0, 0) and c.area == 9
