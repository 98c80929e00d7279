import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wildfire_aug.imgcore import ASH, FIRE, VEGETATION, SamplePair  # noqa: E402


def synthetic_pair(seed, size=256, n_fire=3, pair_id=None):
    """Vegetation field with an ash patch and a few elliptical fire clusters."""
    rng = np.random.default_rng(seed)
    H = W = size
    mask = np.zeros((H, W), dtype=np.uint8)
    mask[: H // 2, :] = VEGETATION
    ay, ax = rng.integers(0, H // 2), rng.integers(0, W // 2)
    mask[ay:ay + H // 4, ax:ax + W // 3] = ASH
    yy, xx = np.mgrid[0:H, 0:W]
    for _ in range(n_fire):
        cy, cx = rng.integers(20, H - 20), rng.integers(20, W - 20)
        ry, rx = rng.integers(5, 16), rng.integers(5, 16)
        mask[((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1] = FIRE

    base = np.array([[40, 40, 40], [90, 90, 90], [30, 120, 40], [250, 120, 20]], dtype=np.int16)
    noise = rng.integers(-15, 16, size=(H, W, 3))
    img = np.clip(base[mask] + noise, 1, 255).astype(np.uint8)
    return SamplePair(img, mask, pair_id or f"img{seed:02d}")


def hazy_scene(size=320, t=0.6, A=230.0, seed=1):
    """Radiance obeying the dark channel prior (one zero channel per pixel) plus an
    opaque bright corner, hazed with constant transmission."""
    rng = np.random.default_rng(seed)
    J = rng.integers(20, 230, (size, size, 3)).astype(float)
    zero = rng.integers(0, 3, (size, size))
    J[np.arange(size)[:, None], np.arange(size)[None, :], zero] = 0
    J[:32, :32] = A
    I = np.clip(np.floor(J * t + A * (1 - t) + 0.5), 0, 255).astype(np.uint8)
    return J, I


@pytest.fixture(scope="session")
def eight_pairs():
    return [synthetic_pair(s) for s in range(8)]


@pytest.fixture(scope="session")
def small_pairs():
    return [synthetic_pair(s, size=64, n_fire=2) for s in range(3)]
