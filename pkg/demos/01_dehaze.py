# %% [markdown]
# Smoke removal with the dark channel prior.
# We haze a synthetic scene with a known transmission and try to get it back.

# %%
import sys
from pathlib import Path

import numpy as np

from wildfire_aug.dehaze import (DehazeParams, atmospheric_light, dark_channel, dehaze_pipeline,
                                 estimate_transmission)

rng = np.random.default_rng(0)
J = rng.integers(20, 230, (320, 320, 3)).astype(float)
J[np.arange(320)[:, None], np.arange(320)[None, :], rng.integers(0, 3, (320, 320))] = 0
t_true, A_true = 0.6, 230.0
# A is read off the haziest region, so the frame needs one: a saturated corner
J[:32, :32] = A_true
hazy = np.clip(np.floor(J * t_true + A_true * (1 - t_true) + 0.5), 0, 255).astype(np.uint8)
print("hazy image", hazy.shape, "mean", hazy.mean().round(1), "clean mean", J.mean().round(1))

# %% the dark channel of a hazy frame is lifted well above zero
p = DehazeParams()
dc = dark_channel(hazy, p.patch)
print("dark channel min / median:", dc.min(), np.median(dc))

# %% atmospheric light comes from the haziest 0.1% of pixels
A = atmospheric_light(hazy, dc, p.top_fraction)
print("estimated A:", A, "true A:", A_true)

# %% coarse transmission keeps a little haze on purpose (omega < 1)
t = estimate_transmission(hazy, A, p)
print("coarse t: mean %.3f  (true %.2f, omega-biased %.3f)" % (t.mean(), t_true, 1 - p.omega * (1 - t_true)))

# %% the full pipeline refines t with a guided filter and inverts the haze model
out = dehaze_pipeline(hazy, p)
err = np.abs(out.astype(int) - J)
print("whole frame: mean abs error %.2f, max %d" % (err.mean(), err.max()))

# %% near the bright corner the patch and box windows mix in its transmission
reach = 2 * p.guided_radius + p.patch // 2
yy, xx = np.mgrid[0:320, 0:320]
far = np.maximum(yy - 31, xx - 31) > reach
print("beyond %d px of the corner: mean %.2f, max %d" % (reach, err[far].mean(), err[far].max()))

# %% write the result next to the input if a folder is given
if len(sys.argv) > 1:
    from wildfire_aug.imgcore import write_image
    d = Path(sys.argv[1])
    d.mkdir(parents=True, exist_ok=True)
    write_image(d / "hazy.png", hazy)
    write_image(d / "dehazed.png", out)
    print("wrote", d)
