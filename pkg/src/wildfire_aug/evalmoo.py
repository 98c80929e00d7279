"""Segmentation scoring and ranking.

Per-class one-vs-rest confusion counts feed IoU and false-negative rate.
Three metrics (fire FNR, vegetation IoU, total IoU) are folded into one
score with rank-order-centroid weights::

    F = w1 * (1 - fire_fnr) + w2 * veg_iou + w3 * total_iou
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .imgcore import CLASS_NAMES, CLASSES, FIRE, VEGETATION


@dataclass
class ConfusionStats:
    classes: tuple = CLASSES
    tp: np.ndarray = None
    fp: np.ndarray = None
    fn: np.ndarray = None
    tn: np.ndarray = None

    def __post_init__(self):
        n = len(self.classes)
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(n, dtype=np.int64))

    def __add__(self, other):
        if tuple(self.classes) != tuple(other.classes):
            raise ValueError("cannot merge statistics over different class sets")
        return ConfusionStats(self.classes, self.tp + other.tp, self.fp + other.fp,
                              self.fn + other.fn, self.tn + other.tn)

    def _idx(self, c):
        return list(self.classes).index(c)

    def counts(self, c):
        i = self._idx(c)
        return int(self.tp[i]), int(self.fp[i]), int(self.fn[i]), int(self.tn[i])


def confusion(pred, gt, classes=CLASSES):
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"prediction {pred.shape} and ground truth {gt.shape} differ in size")
    classes = tuple(classes)
    n = len(classes)
    # joint histogram over (gt, pred); labels outside `classes` land in the spare bin
    lut = np.full(256, n, dtype=np.int64)
    lut[list(classes)] = np.arange(n)
    g = lut[gt.astype(np.int64).ravel()]
    p = lut[pred.astype(np.int64).ravel()]
    cm = np.bincount(g * (n + 1) + p, minlength=(n + 1) ** 2).reshape(n + 1, n + 1)
    tp = np.diag(cm)[:n].copy()
    fn = cm[:n, :].sum(axis=1) - tp
    fp = cm[:, :n].sum(axis=0) - tp
    tn = gt.size - tp - fn - fp
    return ConfusionStats(classes, tp, fp, fn, tn)


def accumulate(pairs, classes=CLASSES, n_jobs=1):
    """Dataset-global confusion over an iterable of ``(pred, gt)`` masks.

    Counts are integers, so the threaded path gives the same totals.
    """
    total = ConfusionStats(tuple(classes))
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda pg: confusion(pg[0], pg[1], classes), pairs))
    else:
        parts = (confusion(pred, gt, classes) for pred, gt in pairs)
    for part in parts:
        total = total + part
    return total


def iou(stats, c):
    """TP / (TP + FP + FN); 1.0 when the class is absent from both masks."""
    tp, fp, fn, _ = stats.counts(c)
    denom = tp + fp + fn
    return 1.0 if denom == 0 else tp / denom


def fnr(stats, c):
    """FN / (TP + FN); 0.0 when the class has no ground-truth pixels."""
    tp, _, fn, _ = stats.counts(c)
    denom = tp + fn
    return 0.0 if denom == 0 else fn / denom


def total_iou(stats, mode="mean"):
    """Mean of per-class IoUs (``mean``) or pooled TP over pooled TP+FP+FN (``micro``)."""
    if mode == "mean":
        return float(np.mean([iou(stats, c) for c in stats.classes]))
    if mode == "micro":
        tp, fp, fn = int(stats.tp.sum()), int(stats.fp.sum()), int(stats.fn.sum())
        denom = tp + fp + fn
        return 1.0 if denom == 0 else tp / denom
    raise ValueError(f"unknown total-IoU mode {mode!r}")


def per_image_metrics(pairs, mode="mean"):
    """Alternative accounting: average each metric over images instead of pooling counts."""
    rows = [confusion(p, g) for p, g in pairs]
    return (float(np.mean([fnr(s, FIRE) for s in rows])),
            float(np.mean([iou(s, VEGETATION) for s in rows])),
            float(np.mean([total_iou(s, mode) for s in rows])))


@dataclass(frozen=True)
class ScoreWeights:
    w: tuple
    exact: tuple = ()

    def __post_init__(self):
        w = tuple(float(x) for x in self.w)
        if not w or any(x <= 0 for x in w):
            raise ValueError("weights must be positive")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {sum(w)}")
        if any(a < b for a, b in zip(w, w[1:])):
            raise ValueError("weights must be sorted in descending priority")
        object.__setattr__(self, "w", w)

    def __len__(self):
        return len(self.w)

    def __iter__(self):
        return iter(self.w)


def roc_weights(n):
    """Rank-order-centroid weights w_i = (1/n) * sum_{k=i..n} 1/k, exact in rationals."""
    if n < 1:
        raise ValueError("need at least one ranked metric")
    exact = tuple(Fraction(1, n) * sum(Fraction(1, k) for k in range(i, n + 1))
                  for i in range(1, n + 1))
    return ScoreWeights(tuple(float(x) for x in exact), exact)


ROC3 = roc_weights(3)


def weighted_score(fire_fnr, veg_iou, total_iou, w=ROC3):
    vals = (fire_fnr, veg_iou, total_iou)
    if any(not 0.0 <= v <= 1.0 for v in vals):
        raise ValueError(f"metrics must be fractions in [0, 1], got {vals}")
    if len(w) != 3:
        raise ValueError("weighted_score needs exactly three weights")
    w1, w2, w3 = w
    return w1 * (1.0 - fire_fnr) + w2 * veg_iou + w3 * total_iou


@dataclass(frozen=True)
class MetricRecord:
    method: str
    fire_fnr: float
    veg_iou: float
    total_iou: float
    score: float = float("nan")
    extra: dict = field(default_factory=dict)

    def scored(self, w=ROC3):
        return MetricRecord(self.method, self.fire_fnr, self.veg_iou, self.total_iou,
                            weighted_score(self.fire_fnr, self.veg_iou, self.total_iou, w),
                            self.extra)


def rank_methods(records, w=ROC3):
    """Best first. Scores are recomputed; ties go to the lower fire FNR, then the name."""
    if not records:
        raise ValueError("nothing to rank")
    scored = [r.scored(w) for r in records]
    return sorted(scored, key=lambda r: (-r.score, r.fire_fnr, r.method))


def metrics_from_stats(method, stats, mode="mean"):
    return MetricRecord(method, fnr(stats, FIRE), iou(stats, VEGETATION),
                        total_iou(stats, mode)).scored()


# ------------------------------------------------------------ dataset statistics

@dataclass
class PixelStats:
    counts: dict
    total: int

    @property
    def percent(self):
        if self.total == 0:
            return {c: 0.0 for c in self.counts}
        return {c: round(100.0 * n / self.total, 2) for c, n in self.counts.items()}

    def as_rows(self):
        pct = self.percent
        rows = [{"class": CLASS_NAMES.get(c, str(c)), "pixels": n, "percent": pct[c]}
                for c, n in self.counts.items()]
        rows.append({"class": "total", "pixels": self.total, "percent": 100.0 if self.total else 0.0})
        return rows


def pixel_stats(masks):
    """Per-class pixel counts over a manifest or any iterable of masks."""
    counts = np.zeros(len(CLASSES), dtype=np.int64)
    total = 0
    for item in masks:
        mask = item.load_mask() if hasattr(item, "load_mask") else np.asarray(item)
        counts += np.bincount(mask.ravel(), minlength=len(CLASSES))[:len(CLASSES)]
        total += mask.size
    return PixelStats({c: int(n) for c, n in zip(CLASSES, counts)}, total)


# ------------------------------------------------------------ keep-best tuning trace

@dataclass
class TuningResult:
    ranked: list
    best: MetricRecord
    retained: list  # input indices a keep-if-better loop would have checkpointed


def keep_best_rank(rows, w=ROC3):
    """Rank tuning rows by score and replay the keep-if-strictly-better selection.

    ``rows`` holds ``(hyperparams, fire_fnr, veg_iou, total_iou)`` tuples.
    """
    if not rows:
        raise ValueError("no tuning rows")
    recs = []
    for hp, f, v, t in rows:
        name = json.dumps(hp, sort_keys=True) if isinstance(hp, dict) else str(hp)
        extra = hp if isinstance(hp, dict) else {"hyperparams": hp}
        recs.append(MetricRecord(name, f, v, t, extra=extra).scored(w))

    retained, best_score = [], -np.inf
    for i, r in enumerate(recs):
        if r.score > best_score:
            retained.append(i)
            best_score = r.score
    ranked = sorted(recs, key=lambda r: -r.score)
    return TuningResult(ranked, recs[retained[-1]], retained)


# ------------------------------------------------------------ reports

def read_metric_rows(path, percent=False):
    """Read ``method,fire_fnr,veg_iou,total_iou`` rows; other columns go to ``extra``."""
    scale = 0.01 if percent else 1.0
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            extra = {k: v for k, v in row.items()
                     if k not in ("method", "fire_fnr", "veg_iou", "total_iou", "score")}
            out.append(MetricRecord(row.get("method", ""), float(row["fire_fnr"]) * scale,
                                    float(row["veg_iou"]) * scale,
                                    float(row["total_iou"]) * scale, extra=extra))
    return out


REPORT_FORMATS = ("csv", "json")


def write_report(out_dir, ranked, w=ROC3, per_class=None, extra=None, formats=REPORT_FORMATS):
    """Write ``report.csv`` and/or ``report.json``; scores are rounded to 4 places only here."""
    bad = set(formats) - set(REPORT_FORMATS)
    if bad or not formats:
        raise ValueError(f"report formats must be a non-empty subset of {REPORT_FORMATS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        with open(out_dir / "report.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["rank", "method", "fire_fnr", "veg_iou", "total_iou", "score"])
            for i, r in enumerate(ranked, start=1):
                writer.writerow([i, r.method, f"{r.fire_fnr:.4f}", f"{r.veg_iou:.4f}",
                                 f"{r.total_iou:.4f}", f"{r.score:.4f}"])
        written.append(out_dir / "report.csv")
    if "json" in formats:
        payload = {
            "weights": list(w.w),
            "ranking": [{"rank": i, **{k: v for k, v in asdict(r).items() if k != "extra"},
                         "score_rounded": round(r.score, 4),
                         **({"extra": r.extra} if r.extra else {})}
                        for i, r in enumerate(ranked, start=1)],
        }
        if per_class is not None:
            payload["per_class"] = per_class
        if extra:
            payload.update(extra)
        with open(out_dir / "report.json", "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(out_dir / "report.json")
    return tuple(written)


def per_class_table(stats):
    return {CLASS_NAMES.get(c, str(c)): {"tp": s[0], "fp": s[1], "fn": s[2], "tn": s[3],
                                          "iou": iou(stats, c), "fnr": fnr(stats, c)}
            for c in stats.classes for s in [stats.counts(c)]}
