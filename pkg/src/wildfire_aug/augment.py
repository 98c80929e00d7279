"""Dataset generators: rotation, brightness, contrast, standard copy-paste and
centralised copy-paste (eroded fire cores).

Every generated record carries a :class:`~wildfire_aug.dataset.Provenance`
from which :func:`regenerate` rebuilds the output bit-exactly.  Random draws
for a copy-paste output come from a private generator seeded by
``(seed, source, target, repetition)``, so records can be produced in any
order or in parallel without changing the result.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .dataset import DatasetManifest, Provenance, Record, derive_seed
from .imgcore import (DEFAULT_PRESCALE, FIRE, SamplePair, clip_u8, hsv_to_rgb, rgb_to_hsv,
                      rotate_prescaled)
from .morphology import (Kernel, connected_components, dilate, erode, filter_by_area,
                         rotate_segment, with_pixels)

METHODS = ("rotation", "brightness", "contrast", "std_copy_paste", "ccpda")
COPY_PASTE = ("std_copy_paste", "ccpda")

ROTATION_ANGLES = tuple(range(5, 360, 15))
BRIGHTNESS_FACTORS = tuple(round(1.00 + 0.05 * k, 2) for k in range(24))
CONTRAST_FACTORS = tuple(round(0.50 + 0.05 * k, 2) for k in range(24))


class PlacementError(ValueError):
    """A fixed paste position leaves the frame or lands on existing fire."""


@dataclass(frozen=True)
class RandomPlacement:
    kind: str = "random"


@dataclass(frozen=True)
class FixedPlacement:
    x_frac: float = 0.25
    y_frac: float = 0.25
    theta: float = 0.0
    kind: str = "fixed"

    def __post_init__(self):
        if not (0 <= self.x_frac < 1 and 0 <= self.y_frac < 1):
            raise ValueError("fixed placement fractions must lie in [0, 1)")


def placement_from_dict(d):
    if d is None or d.get("kind", "random") == "random":
        return RandomPlacement()
    return FixedPlacement(float(d.get("x_frac", 0.25)), float(d.get("y_frac", 0.25)),
                          float(d.get("theta", 0.0)))


@dataclass(frozen=True)
class AugmentConfig:
    method: str
    n: int
    r: int = 1
    seed: int = 0
    dilation_kernel: int = 5
    min_area_std: int = 100
    erosion_percent: float = 0.0
    # None: use the erosion kernel size of each segment as its minimum core area
    min_area_ccpda: int | None = None
    placement: RandomPlacement | FixedPlacement = field(default_factory=RandomPlacement)
    max_placement_tries: int = 100
    subset_prob: float = 1.0
    ccpda_dilate: bool = False
    ccpda_rotate: bool = False
    prescale: float = DEFAULT_PRESCALE

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if not 0 <= self.erosion_percent < 1:
            raise ValueError("erosion_percent must lie in [0, 1)")
        if not 0 < self.subset_prob <= 1:
            raise ValueError("subset_prob must lie in (0, 1]")
        Kernel(self.dilation_kernel)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["placement"] = placement_from_dict(d.get("placement"))
        return cls(**d)


# ------------------------------------------------------------ photometric / geometric

def adjust_brightness(img, factor):
    """Scale the HSV value channel, saturate at 255 and convert back to RGB."""
    hsv = rgb_to_hsv(img)
    hsv[..., 2] = np.clip(hsv[..., 2] * factor, 0, 255)
    return hsv_to_rgb(hsv)


def adjust_contrast(img, alpha, beta=0.0):
    return clip_u8(img.astype(np.float64) * alpha + beta)


def _single(method, pair, value, seed, prescale=DEFAULT_PRESCALE):
    if method == "rotation":
        out = SamplePair(rotate_prescaled(pair.image, value, prescale),
                         rotate_prescaled(pair.mask, value, prescale), f"{pair.id}_rot{value:03d}")
        params = {"angle": value, "prescale": prescale}
    elif method == "brightness":
        out = SamplePair(adjust_brightness(pair.image, value), pair.mask.copy(),
                         f"{pair.id}_bri{value:.2f}")
        params = {"factor": value}
    else:
        out = SamplePair(adjust_contrast(pair.image, value), pair.mask.copy(),
                         f"{pair.id}_con{value:.2f}")
        params = {"alpha": value, "beta": 0.0}
    return out, Provenance(method, pair.id, "", params, seed)


def gen_rotation_set(d, prescale=DEFAULT_PRESCALE, seed=0):
    _nonempty(d)
    return [_single("rotation", p, a, seed, prescale) for p in d for a in ROTATION_ANGLES]


def gen_brightness_set(d, seed=0):
    _nonempty(d)
    return [_single("brightness", p, f, seed) for p in d for f in BRIGHTNESS_FACTORS]


def gen_contrast_set(d, seed=0):
    _nonempty(d)
    return [_single("contrast", p, a, seed) for p in d for a in CONTRAST_FACTORS]


def _nonempty(d):
    if not d:
        raise ValueError("input dataset is empty")


# ------------------------------------------------------------ segment extraction

def erosion_kernel(area, percent):
    """Square kernel that strips roughly ``percent`` of a segment's equivalent-circle radius."""
    if percent <= 0:
        return Kernel(1)
    r_eq = math.sqrt(area / math.pi)
    half = max(1, math.floor(percent * r_eq + 0.5))
    return Kernel(2 * half + 1)


def extract_fire_segments_std(pair, cfg, rng, angles=None):
    """Fire components, dilated, coloured from the source, randomly rotated, area-filtered.

    One angle is drawn per component before filtering; pass a list as
    ``angles`` to collect them.
    """
    segs = []
    for comp in connected_components(pair.mask, FIRE):
        grown = with_pixels(dilate(comp, cfg.dilation_kernel), pair.image)
        theta = float(rng.uniform(0.0, 360.0))
        if angles is not None:
            angles.append(theta)
        segs.append(rotate_segment(grown, theta))
    return filter_by_area(segs, cfg.min_area_std)


def extract_fire_segments_ccpda(pair, cfg, rng=None):
    """Eroded fire cores that survive the minimum-area test.

    Dilation and random rotation of the cores are off unless enabled in the
    config (``ccpda_dilate`` / ``ccpda_rotate``; the latter needs ``rng``).
    """
    cores = []
    for comp in connected_components(pair.mask, FIRE):
        k = erosion_kernel(comp.area, cfg.erosion_percent)
        core = erode(with_pixels(comp, pair.image), k)
        min_area = k.size if cfg.min_area_ccpda is None else cfg.min_area_ccpda
        if core.empty or core.area < min_area:
            continue
        core = core.trim()
        if cfg.ccpda_dilate:
            core = with_pixels(dilate(core, cfg.dilation_kernel), pair.image)
        if cfg.ccpda_rotate:
            if rng is None:
                raise ValueError("ccpda_rotate needs a random generator")
            core = rotate_segment(core, float(rng.uniform(0.0, 360.0)))
        cores.append(core)
    return cores


# ------------------------------------------------------------ pasting

def _fits(mask, seg, x, y):
    H, W = mask.shape
    h, w = seg.shape
    if x < 0 or y < 0 or x + w > W or y + h > H:
        return False
    return not np.any(seg.bitmap & (mask[y:y + h, x:x + w] == FIRE))


def _stamp(img, mask, seg, x, y):
    ys, xs = np.nonzero(seg.bitmap)
    img[ys + y, xs + x] = seg.pixels[ys, xs]
    mask[ys + y, xs + x] = FIRE


def paste_with_log(target, segs, placement, rng=None, max_tries=100, subset_prob=1.0):
    """Paste segments onto ``target``; returns the new pair and one log entry per segment.

    Log entries are dicts with ``x``, ``y`` (top-left of the bitmap) and
    ``area``, or ``{"skipped": reason}``.
    """
    img = target.image.copy()
    mask = target.mask.copy()
    H, W = mask.shape
    log = []
    for seg in segs:
        if seg.pixels is None:
            raise ValueError("segment has no pixel patch; attach one with with_pixels()")
        if seg.empty:
            log.append({"skipped": "empty"})
            continue
        if subset_prob < 1.0 and rng.random() >= subset_prob:
            log.append({"skipped": "not selected"})
            continue

        if isinstance(placement, FixedPlacement):
            if placement.theta % 360:
                seg = rotate_segment(seg, placement.theta)
            x, y = int(placement.x_frac * W), int(placement.y_frac * H)
            if not _fits(mask, seg, x, y):
                raise PlacementError(f"fixed placement at ({x}, {y}) leaves the frame or "
                                     f"overlaps fire for a {seg.shape[1]}x{seg.shape[0]} segment")
            _stamp(img, mask, seg, x, y)
            log.append({"x": x, "y": y, "area": seg.area})
            continue

        h, w = seg.shape
        if h > H or w > W:
            log.append({"skipped": "larger than frame"})
            continue
        for _ in range(max_tries):
            x = int(rng.integers(0, W - w + 1))
            y = int(rng.integers(0, H - h + 1))
            if _fits(mask, seg, x, y):
                _stamp(img, mask, seg, x, y)
                log.append({"x": x, "y": y, "area": seg.area})
                break
        else:
            log.append({"skipped": "no valid position"})
    return SamplePair(img, mask, target.id), log


def paste(target, segs, placement=RandomPlacement(), rng=None, max_tries=100, subset_prob=1.0):
    return paste_with_log(target, segs, placement, rng, max_tries, subset_prob)[0]


# ------------------------------------------------------------ dataset builders

def _copy_paste_one(source, target, rep, cfg):
    rng = np.random.default_rng(derive_seed(cfg.seed, source.id, target.id, rep))
    angles = []
    if cfg.method == "std_copy_paste":
        segs = extract_fire_segments_std(source, cfg, rng, angles)
    else:
        segs = extract_fire_segments_ccpda(source, cfg, rng)
    if isinstance(cfg.placement, FixedPlacement) and segs:
        # one anchor point can host a single segment: keep the largest
        segs = [max(segs, key=lambda s: s.area)]
    out, log = paste_with_log(target, segs, cfg.placement, rng, cfg.max_placement_tries,
                              cfg.subset_prob)
    out_id = f"{cfg.method}_{source.id}__{target.id}_r{rep}"
    params = {"repetition": rep, "config": cfg.to_dict(), "pasted": log}
    if angles:
        params["angles"] = angles
    return (SamplePair(out.image, out.mask, out_id),
            Provenance(cfg.method, source.id, target.id, params, cfg.seed))


def gen_copy_paste_set(d, cfg, n_jobs=1):
    jobs = [(s, t, rep) for rep in range(cfg.r) for s in d for t in d]
    if n_jobs == 1:
        return [_copy_paste_one(s, t, rep, cfg) for s, t, rep in jobs]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(lambda job: _copy_paste_one(*job, cfg), jobs))


def build_dataset(d, cfg, n_jobs=1, split="train"):
    """Generate the augmented dataset for ``cfg.method`` as a manifest.

    Copy-paste methods enumerate every ordered (source, target) pair, the
    diagonal included, over ``cfg.r`` repetitions: ``n**2 * r`` records.
    The other methods emit 24 variants per input.
    """
    if len(d) != cfg.n:
        raise ValueError(f"config expects n={cfg.n} source pairs, got {len(d)}")
    _nonempty(d)
    if cfg.method == "rotation":
        out = gen_rotation_set(d, cfg.prescale, cfg.seed)
    elif cfg.method == "brightness":
        out = gen_brightness_set(d, cfg.seed)
    elif cfg.method == "contrast":
        out = gen_contrast_set(d, cfg.seed)
    else:
        out = gen_copy_paste_set(d, cfg, n_jobs)
    return DatasetManifest([Record(p.id, split, prov, p) for p, prov in out])


def regenerate(prov, sources):
    """Rebuild one output from its provenance; ``sources`` maps id -> SamplePair."""
    src = sources[prov.source_id]
    p = prov.params
    if prov.method == "rotation":
        return _single("rotation", src, p["angle"], prov.seed, p["prescale"])[0]
    if prov.method == "brightness":
        return _single("brightness", src, p["factor"], prov.seed)[0]
    if prov.method == "contrast":
        return _single("contrast", src, p["alpha"], prov.seed)[0]
    if prov.method in COPY_PASTE:
        cfg = AugmentConfig.from_dict(p["config"])
        return _copy_paste_one(src, sources[prov.target_id], p["repetition"], cfg)[0]
    raise ValueError(f"cannot regenerate method {prov.method!r}")
