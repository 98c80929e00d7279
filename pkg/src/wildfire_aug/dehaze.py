"""Single-image smoke removal with the dark channel prior.

Stages: dark channel -> atmospheric light -> coarse transmission ->
guided-filter refinement -> radiance recovery.  Intensities are handled in
[0, 1] floating point and quantised to 8-bit only at the very end.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imgcore import check_raster, clip_u8, to_gray

# lower bound that keeps every transmission value strictly positive
T_MIN = 1e-6


@dataclass(frozen=True)
class DehazeParams:
    patch: int = 15
    omega: float = 0.95
    t_floor: float = 0.1
    guided_radius: int = 60
    guided_eps: float = 1e-3
    top_fraction: float = 0.001

    def __post_init__(self):
        if self.patch < 1 or self.patch % 2 == 0:
            raise ValueError("patch must be odd and >= 1")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError("omega must lie in [0, 1]")
        if not 0.0 < self.t_floor <= 1.0:
            raise ValueError("t_floor must lie in (0, 1]")
        if self.guided_radius < 1 or self.guided_eps <= 0:
            raise ValueError("guided_radius must be >= 1 and guided_eps > 0")
        if not 0.0 < self.top_fraction <= 1.0:
            raise ValueError("top_fraction must lie in (0, 1]")


def _patch_min(a, patch):
    # edge replication never introduces a new minimum, so this equals a window clamped to the image
    return ndimage.minimum_filter(a, size=patch, mode="nearest")


def box_mean(a, r):
    """Mean over the (2r+1)^2 window around each pixel, truncated at the image border."""
    a = np.asarray(a, dtype=np.float64)
    H, W = a.shape
    integral = np.zeros((H + 1, W + 1))
    integral[1:, 1:] = a.cumsum(0).cumsum(1)
    y0 = np.clip(np.arange(H) - r, 0, H)
    y1 = np.clip(np.arange(H) + r + 1, 0, H)
    x0 = np.clip(np.arange(W) - r, 0, W)
    x1 = np.clip(np.arange(W) + r + 1, 0, W)
    s = (integral[y1][:, x1] - integral[y0][:, x1] - integral[y1][:, x0] + integral[y0][:, x0])
    count = (y1 - y0)[:, None] * (x1 - x0)[None, :]
    return s / count


def dark_channel(img, patch=15):
    """Per-pixel channel minimum followed by a ``patch x patch`` minimum filter."""
    img = check_raster(img)
    if patch < 1 or patch % 2 == 0:
        raise ValueError("patch must be odd and >= 1")
    return _patch_min(img.min(axis=2), patch)


def atmospheric_light(img, dark, top_fraction=0.001):
    """Brightest image pixel (by r+g+b) among the top ``top_fraction`` of the dark channel.

    Ties in the dark channel go to the lower raster index.
    """
    img = check_raster(img)
    dark = np.asarray(dark)
    if dark.shape != img.shape[:2]:
        raise ValueError("image and dark channel differ in size")
    n = dark.size
    k = max(1, int(n * top_fraction))
    order = np.argsort(-dark.ravel().astype(np.float64), kind="stable")[:k]
    sums = img.reshape(-1, 3).astype(np.int64).sum(axis=1)[order]
    best = order[int(np.argmax(sums))]
    return tuple(int(v) for v in img.reshape(-1, 3)[best])


def estimate_transmission(img, A, params=DehazeParams()):
    """Coarse transmission ``1 - omega * darkchannel(I / A)``, clamped to (0, 1]."""
    img = check_raster(img)
    A = np.asarray(A, dtype=np.float64)
    if A.shape != (3,) or np.any(A <= 0):
        raise ValueError(f"atmospheric light must be three positive values, got {A}")
    normalised = (img.astype(np.float64) / A).min(axis=2)
    t = 1.0 - params.omega * _patch_min(normalised, params.patch)
    return np.clip(t, T_MIN, 1.0)


def guided_filter(guide, p, radius, eps):
    """Edge-preserving refinement of ``p`` steered by a grayscale ``guide`` in [0, 1].

    ``guide`` may also be an RGB raster, in which case its luma is used.
    The result is clamped to the valid transmission range (0, 1].
    """
    guide = np.asarray(guide)
    if guide.ndim == 3:
        guide = to_gray(guide)
    guide = guide.astype(np.float64)
    p = np.asarray(p, dtype=np.float64)
    if guide.shape != p.shape:
        raise ValueError(f"guide {guide.shape} and input {p.shape} differ in size")
    if radius < 1 or eps <= 0:
        raise ValueError("radius must be >= 1 and eps > 0")

    mean_i = box_mean(guide, radius)
    mean_p = box_mean(p, radius)
    var_i = box_mean(guide * guide, radius) - mean_i * mean_i
    cov_ip = box_mean(guide * p, radius) - mean_i * mean_p
    a = cov_ip / (var_i + eps)
    b = mean_p - a * mean_i
    q = box_mean(a, radius) * guide + box_mean(b, radius)
    return np.clip(q, T_MIN, 1.0)


def recover(img, t, A, t_floor=0.1):
    """Scene radiance ``(I - A) / max(t, t_floor) + A``, quantised to 8-bit."""
    img = check_raster(img)
    t = np.asarray(t, dtype=np.float64)
    if t.shape != img.shape[:2]:
        raise ValueError("image and transmission map differ in size")
    A = np.asarray(A, dtype=np.float64)
    tt = np.maximum(t, t_floor)[..., None]
    return clip_u8((img.astype(np.float64) - A) / tt + A)


def dehaze_pipeline(img, params=DehazeParams()):
    img = check_raster(img)
    dark = dark_channel(img, params.patch)
    A = atmospheric_light(img, dark, params.top_fraction)
    # an all-zero dark channel can pick an atmosphere with a 0 channel; one level keeps I/A finite
    A = tuple(max(1, a) for a in A)
    t = estimate_transmission(img, A, params)
    t = guided_filter(to_gray(img), t, params.guided_radius, params.guided_eps)
    return recover(img, t, A, params.t_floor)
