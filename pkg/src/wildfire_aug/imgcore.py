"""Raster and class-mask primitives.

Images are ``uint8`` arrays of shape ``(H, W, 3)`` (RGB) and masks are
``uint8`` arrays of shape ``(H, W)`` holding class ids 0..3.  Everything
else in the package builds on the helpers here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

BACKGROUND, ASH, VEGETATION, FIRE = 0, 1, 2, 3
CLASSES = (BACKGROUND, ASH, VEGETATION, FIRE)
CLASS_NAMES = {BACKGROUND: "background", ASH: "ash", VEGETATION: "vegetation", FIRE: "fire"}

# display colours for the paletted mask PNGs; only the indices carry meaning
MASK_PALETTE = [(0, 0, 0), (128, 128, 128), (0, 160, 0), (255, 0, 0)]

DEFAULT_PRESCALE = 1.66


def check_raster(img):
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError(f"expected uint8 (H, W, 3) raster, got {img.dtype} {img.shape}")
    return img


def check_mask(mask):
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"expected 2-D class mask, got shape {mask.shape}")
    if mask.size and (mask.min() < 0 or mask.max() > FIRE):
        raise ValueError("mask labels must lie in {0, 1, 2, 3}")
    return mask.astype(np.uint8, copy=False)


@dataclass(frozen=True)
class SamplePair:
    image: np.ndarray
    mask: np.ndarray
    id: str

    def __post_init__(self):
        img = check_raster(self.image)
        mask = check_mask(self.mask)
        if img.shape[:2] != mask.shape:
            raise ValueError(f"{self.id}: image {img.shape[:2]} and mask {mask.shape} differ")
        object.__setattr__(self, "image", img)
        object.__setattr__(self, "mask", mask)

    @property
    def size(self):
        """(width, height)"""
        return self.mask.shape[1], self.mask.shape[0]


def clip_u8(x):
    """Round half-up and saturate to 0..255."""
    out = np.clip(np.floor(np.asarray(x, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)
    return out if out.ndim else int(out)


def rgb_to_hsv(rgb):
    """Hexcone HSV: hue in degrees [0, 360), saturation in [0, 1], value on the 0..255 scale.

    Works on a single ``(r, g, b)`` triple or any array with a trailing axis of 3.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    d = v - rgb.min(axis=-1)
    safe_d = np.where(d > 0, d, 1.0)

    h = np.where(v == r, np.mod((g - b) / safe_d, 6.0),
                 np.where(v == g, (b - r) / safe_d + 2.0, (r - g) / safe_d + 4.0))
    h = np.where(d > 0, 60.0 * h, 0.0)
    h = np.where(h >= 360.0, h - 360.0, h)
    s = np.where(v > 0, d / np.where(v > 0, v, 1.0), 0.0)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb_float(hsv):
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    c = v * s
    hp = np.mod(h, 360.0) / 60.0
    x = c * (1.0 - np.abs(np.mod(hp, 2.0) - 1.0))
    m = v - c
    sector = np.floor(hp).astype(int) % 6
    zero = np.zeros_like(c)
    # (r, g, b) before adding m, for each of the six sectors
    table = [(c, x, zero), (x, c, zero), (zero, c, x), (zero, x, c), (x, zero, c), (c, zero, x)]
    out = np.zeros(h.shape + (3,))
    for k, (rr, gg, bb) in enumerate(table):
        sel = sector == k
        out[..., 0] = np.where(sel, rr, out[..., 0])
        out[..., 1] = np.where(sel, gg, out[..., 1])
        out[..., 2] = np.where(sel, bb, out[..., 2])
    return out + m[..., None]


def hsv_to_rgb(hsv):
    """Inverse of :func:`rgb_to_hsv`, rounded to 8-bit."""
    return clip_u8(hsv_to_rgb_float(hsv))


def _axis_coords(n_out, n_in):
    # pixel-centre alignment
    return (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5


def resize(arr, w, h):
    """Resize to exactly ``w`` x ``h``: bilinear for rasters, nearest-neighbour for masks."""
    if w < 1 or h < 1:
        raise ValueError(f"target size must be positive, got {w}x{h}")
    arr = np.asarray(arr)
    H, W = arr.shape[:2]
    if (W, H) == (w, h):
        return arr.copy()

    if arr.ndim == 2:
        rows = np.minimum(np.floor((np.arange(h) + 0.5) * H / h).astype(int), H - 1)
        cols = np.minimum(np.floor((np.arange(w) + 0.5) * W / w).astype(int), W - 1)
        return arr[rows[:, None], cols[None, :]]

    ys = np.clip(_axis_coords(h, H), 0, H - 1)
    xs = np.clip(_axis_coords(w, W), 0, W - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, H - 1)
    x1 = np.minimum(x0 + 1, W - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]

    src = arr.astype(np.float64)
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    return clip_u8(top * (1 - fy) + bottom * fy)


def min_prescale(w, h):
    """Smallest zoom that keeps a rotated ``w`` x ``h`` frame fully inside the zoomed image."""
    return float(np.hypot(w, h) / min(w, h))


def rotate_prescaled(arr, angle, prescale=DEFAULT_PRESCALE):
    """Zoom about the centre by ``prescale``, rotate counter-clockwise by ``angle`` degrees,
    and crop back to the input size.

    Rasters are sampled bilinearly, masks with nearest neighbour.  Samples that
    would land outside the zoomed image (only possible when ``prescale`` is
    below :func:`min_prescale`) replicate the edge instead of filling black.
    """
    if prescale < 1:
        raise ValueError("prescale must be >= 1")
    arr = np.asarray(arr)
    H, W = arr.shape[:2]
    cy, cx = (H - 1) / 2.0, (W - 1) / 2.0
    yy, xx = np.mgrid[0:H, 0:W].astype(np.float64)
    dy, dx = yy - cy, xx - cx
    th = np.deg2rad(angle)
    c, s = np.cos(th), np.sin(th)
    src_x = cx + (dx * c - dy * s) / prescale
    src_y = cy + (dx * s + dy * c) / prescale
    coords = np.stack([src_y, src_x])

    if arr.ndim == 2:
        return ndimage.map_coordinates(arr, coords, order=0, mode="nearest").astype(arr.dtype)
    out = np.empty(arr.shape, dtype=np.float64)
    for ch in range(arr.shape[2]):
        out[..., ch] = ndimage.map_coordinates(arr[..., ch].astype(np.float64), coords,
                                               order=1, mode="nearest")
    return clip_u8(out)


def to_gray(img):
    """Rec. 601 luma in [0, 1]."""
    img = np.asarray(img, dtype=np.float64) / 255.0
    return img @ np.array([0.299, 0.587, 0.114])


# ---------------------------------------------------------------- PNG I/O

def read_image(path):
    with Image.open(path) as im:
        return np.array(im.convert("RGB"), dtype=np.uint8)


def write_image(path, img, compress_level=1):
    # lossless either way; level 1 is several times faster on noisy photos
    Image.fromarray(check_raster(img)).save(path, compress_level=compress_level)


def read_mask(path):
    """Read a class mask; palette indices (or grey levels) are the class ids."""
    with Image.open(path) as im:
        if im.mode not in ("P", "L"):
            raise ValueError(f"{path}: mask must be paletted or greyscale PNG, got mode {im.mode}")
        mask = np.array(im, dtype=np.uint8)
    return check_mask(mask)


def write_mask(path, mask):
    mask = np.ascontiguousarray(check_mask(mask))
    im = Image.frombytes("P", (mask.shape[1], mask.shape[0]), mask.tobytes())
    flat = [v for rgb in MASK_PALETTE for v in rgb]
    im.putpalette(flat + [0] * (768 - len(flat)))
    im.save(path)
