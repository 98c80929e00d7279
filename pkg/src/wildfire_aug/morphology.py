"""Binary segment machinery used by the copy-paste augmenters.

A :class:`Segment` is a tight (or deliberately enlarged) boolean bitmap plus
the offset of its top-left corner in the parent image.  Dilation and
erosion use flat square structuring elements; anything outside the bitmap
counts as background.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .imgcore import FIRE


@dataclass(frozen=True)
class Kernel:
    size: int

    def __post_init__(self):
        if self.size < 1 or self.size % 2 == 0:
            raise ValueError(f"kernel size must be odd and >= 1, got {self.size}")

    @property
    def half(self):
        return (self.size - 1) // 2


def _kernel(k):
    return k if isinstance(k, Kernel) else Kernel(int(k))


@dataclass(frozen=True)
class Segment:
    bitmap: np.ndarray
    origin: tuple = (0, 0)  # (x, y) of bitmap[0, 0] in the parent image
    source_class: int = FIRE
    pixels: np.ndarray | None = None  # RGB under the bitmap, same (h, w)

    def __post_init__(self):
        object.__setattr__(self, "bitmap", np.asarray(self.bitmap, dtype=bool))
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))
        if self.pixels is not None and self.pixels.shape[:2] != self.bitmap.shape:
            raise ValueError("pixel patch and bitmap shapes differ")

    @property
    def area(self):
        return int(self.bitmap.sum())

    @property
    def empty(self):
        return not self.bitmap.any()

    @property
    def shape(self):
        """(height, width) of the bitmap."""
        return self.bitmap.shape

    def coords(self):
        """Parent-image (ys, xs) of the set bits."""
        ys, xs = np.nonzero(self.bitmap)
        return ys + self.origin[1], xs + self.origin[0]

    def trim(self):
        """Shrink the bitmap to the tight bounding box of its set bits."""
        if self.empty:
            return self
        rows = np.flatnonzero(self.bitmap.any(axis=1))
        cols = np.flatnonzero(self.bitmap.any(axis=0))
        sl = np.s_[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
        pixels = None if self.pixels is None else self.pixels[sl]
        return Segment(self.bitmap[sl], (self.origin[0] + cols[0], self.origin[1] + rows[0]),
                       self.source_class, pixels)


def connected_components(mask, cls=FIRE):
    """All maximal 8-connected components of pixels labelled ``cls``, in raster order."""
    labels, n = ndimage.label(np.asarray(mask) == cls, structure=np.ones((3, 3), dtype=int))
    segs = []
    for i, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        segs.append(Segment(labels[sl] == i, (sl[1].start, sl[0].start), cls))
    return segs


def _shift(a, d, axis, fill):
    out = np.full_like(a, fill)
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if d > 0:
        src[axis], dst[axis] = slice(0, -d), slice(d, None)
    else:
        src[axis], dst[axis] = slice(-d, None), slice(0, d)
    out[tuple(dst)] = a[tuple(src)]
    return out


def _sweep(a, half, op, fill):
    # a square element is separable into a row pass and a column pass
    for axis in (0, 1):
        acc = a.copy()
        for d in range(1, half + 1):
            acc = op(acc, _shift(a, d, axis, fill))
            acc = op(acc, _shift(a, -d, axis, fill))
        a = acc
    return a


def dilate(seg, k):
    """Dilate by a ``k x k`` square; the bitmap grows by ``k // 2`` on every side.

    The pixel patch is dropped because the grown rim has no colour yet; see
    :func:`with_pixels`.
    """
    k = _kernel(k)
    if k.size == 1:
        return seg
    h = k.half
    padded = np.pad(seg.bitmap, h)
    out = _sweep(padded, h, np.logical_or, False)
    return Segment(out, (seg.origin[0] - h, seg.origin[1] - h), seg.source_class)


def erode(seg, k):
    """Erode by a ``k x k`` square, keeping the bitmap frame; the result may be empty."""
    k = _kernel(k)
    if k.size == 1:
        return seg
    h = k.half
    padded = np.pad(seg.bitmap, h)
    out = _sweep(padded, h, np.logical_and, False)[h:-h, h:-h]
    pixels = None
    if seg.pixels is not None:
        pixels = np.where(out[..., None], seg.pixels, 0).astype(np.uint8)
    return Segment(out, seg.origin, seg.source_class, pixels)


def rotate_segment(seg, theta):
    """Rotate counter-clockwise by ``theta`` degrees about the bitmap centre.

    Nearest-neighbour resampling; the result is re-cropped to its tight
    bounding box.  Right angles reduce to exact index permutations.
    """
    if theta % 360 == 0 or seg.empty:
        return seg
    h, w = seg.shape
    th = math.radians(theta)
    c, s = math.cos(th), math.sin(th)
    # snap float noise so right angles map onto exact pixel centres
    c, s = round(c, 12), round(s, 12)
    new_w = max(1, math.ceil(w * abs(c) + h * abs(s) - 1e-9))
    new_h = max(1, math.ceil(w * abs(s) + h * abs(c) - 1e-9))
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    ncx, ncy = (new_w - 1) / 2.0, (new_h - 1) / 2.0

    yy, xx = np.mgrid[0:new_h, 0:new_w].astype(np.float64)
    dx, dy = xx - ncx, yy - ncy
    sx = np.floor(cx + dx * c - dy * s + 0.5).astype(int)
    sy = np.floor(cy + dx * s + dy * c + 0.5).astype(int)
    inside = (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h)
    sxc, syc = np.clip(sx, 0, w - 1), np.clip(sy, 0, h - 1)
    bitmap = inside & seg.bitmap[syc, sxc]
    pixels = None
    if seg.pixels is not None:
        pixels = np.where(bitmap[..., None], seg.pixels[syc, sxc], 0).astype(np.uint8)

    origin = (round(seg.origin[0] + cx - ncx), round(seg.origin[1] + cy - ncy))
    return Segment(bitmap, origin, seg.source_class, pixels).trim()


def filter_by_area(segs, min_area):
    if min_area < 0:
        raise ValueError("min_area must be >= 0")
    return [s for s in segs if s.area >= min_area]


def crop_to_frame(seg, width, height):
    """Drop the part of the bitmap that falls outside a ``width x height`` parent."""
    x0, y0 = seg.origin
    h, w = seg.shape
    left, top = max(0, -x0), max(0, -y0)
    right, bottom = min(w, width - x0), min(h, height - y0)
    if right <= left or bottom <= top:
        return Segment(np.zeros((0, 0), dtype=bool), (max(x0, 0), max(y0, 0)), seg.source_class)
    sl = np.s_[top:bottom, left:right]
    pixels = None if seg.pixels is None else seg.pixels[sl]
    return Segment(seg.bitmap[sl], (x0 + left, y0 + top), seg.source_class, pixels)


def with_pixels(seg, image):
    """Clip the segment to the image frame and attach the RGB values under it."""
    H, W = image.shape[:2]
    seg = crop_to_frame(seg, W, H)
    x0, y0 = seg.origin
    h, w = seg.shape
    patch = image[y0:y0 + h, x0:x0 + w]
    pixels = np.where(seg.bitmap[..., None], patch, 0).astype(np.uint8)
    return replace(seg, pixels=pixels)
