# %% [markdown]
# Folding three segmentation metrics into one score and ranking methods.

# %%
from wildfire_aug.evalmoo import MetricRecord, keep_best_rank, rank_methods, roc_weights

w = roc_weights(3)
print("rank-order-centroid weights:", w.exact, "=", tuple(round(x, 4) for x in w.w))

# %% (fire FNR, vegetation IoU, total IoU) for five training sets
rows = {
    "non-augmented": (0.1616, 0.6083, 0.4526),
    "rotation": (0.1174, 0.6424, 0.5546),
    "brightness": (0.1683, 0.6708, 0.5509),
    "contrast": (0.1168, 0.6762, 0.5598),
    "std copy-paste": (0.0521, 0.6609, 0.5682),
}
for i, r in enumerate(rank_methods([MetricRecord(k, *v) for k, v in rows.items()]), 1):
    print(f"{i}. {r.method:<15} F = {r.score:.4f}")

# %% a hyperparameter sweep where some runs never predict fire
sweep = [
    ({"lr": 0.0005, "dropout": 0.3, "batch": 8}, 0.0425, 0.6598, 0.5552),
    ({"lr": 0.001, "dropout": 0.2, "batch": 4}, 0.0549, 0.6805, 0.5716),
    ({"lr": 0.005, "dropout": 0.0, "batch": 16}, 1.0, 0.6195, 0.4488),
]
res = keep_best_rank(sweep)
print("best:", res.best.extra, "F = %.5f" % res.best.score)
print("collapsed run scores only", round(res.ranked[-1].score, 5))
