# %% [markdown]
# Rotation, brightness and contrast: 24 variants per input image.

# %%
import numpy as np

from _fixtures import scene
from wildfire_aug.augment import (BRIGHTNESS_FACTORS, CONTRAST_FACTORS, ROTATION_ANGLES,
                                  AugmentConfig, build_dataset)
from wildfire_aug.evalmoo import pixel_stats
from wildfire_aug.imgcore import min_prescale

pairs = [scene(s) for s in range(8)]
print("angles:", ROTATION_ANGLES[:4], "...", ROTATION_ANGLES[-1])
print("brightness:", BRIGHTNESS_FACTORS[0], "...", BRIGHTNESS_FACTORS[-1])
print("contrast:", CONTRAST_FACTORS[0], "...", CONTRAST_FACTORS[-1])

# %% the upscale before rotating has to cover the corners
print("smallest safe prescale, square frame: %.3f" % min_prescale(256, 256))
print("smallest safe prescale, 4000x3000:    %.3f" % min_prescale(4000, 3000))

# %%
for method in ("rotation", "brightness", "contrast"):
    m = build_dataset(pairs, AugmentConfig(method, len(pairs), seed=1))
    first = m.records[0]
    print(f"{method:<10} {len(m)} records, {pixel_stats(m).total:,} pixels, "
          f"first id {first.id}, params {first.provenance.params}")

# %% brightness and contrast never touch the mask
m = build_dataset(pairs, AugmentConfig("contrast", len(pairs)))
same = all(np.array_equal(r.pair.mask, pairs[i // 24].mask) for i, r in enumerate(m))
print("masks unchanged:", same)
