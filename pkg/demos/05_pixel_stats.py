# %% [markdown]
# Class composition before and after copy-paste.

# %%
from _fixtures import scene
from wildfire_aug.augment import AugmentConfig, build_dataset
from wildfire_aug.evalmoo import pixel_stats

pairs = [scene(s) for s in range(8)]
before = pixel_stats([p.mask for p in pairs])
after = pixel_stats(build_dataset(pairs, AugmentConfig("std_copy_paste", 8, r=3, seed=3)))

print(f"{'class':<12}{'before':>10}{'after':>10}")
for b, a in zip(before.as_rows(), after.as_rows()):
    print(f"{b['class']:<12}{b['percent']:>9.2f}%{a['percent']:>9.2f}%")
print(f"totals: {before.total:,} -> {after.total:,} pixels")
