"""Small synthetic scenes shared by the demo scripts."""
import numpy as np

from wildfire_aug import ASH, FIRE, VEGETATION, SamplePair


def scene(seed, size=256, n_fire=3):
    rng = np.random.default_rng(seed)
    mask = np.zeros((size, size), np.uint8)
    mask[: size // 2] = VEGETATION
    ay, ax = rng.integers(0, size // 2, 2)
    mask[ay:ay + size // 4, ax:ax + size // 3] = ASH
    yy, xx = np.mgrid[0:size, 0:size]
    for _ in range(n_fire):
        cy, cx = rng.integers(20, size - 20, 2)
        ry, rx = rng.integers(5, 16, 2)
        mask[((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1] = FIRE
    base = np.array([[40, 40, 40], [90, 90, 90], [30, 120, 40], [250, 120, 20]])
    img = np.clip(base[mask] + rng.integers(-15, 16, (size, size, 3)), 1, 255).astype(np.uint8)
    return SamplePair(img, mask, f"scene{seed:02d}")
