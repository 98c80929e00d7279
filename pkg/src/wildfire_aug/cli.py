"""Command line front end and the end-to-end pipeline.

    wildfire-aug <subcommand> [--config FILE] [--seed N] [--out DIR] ...

Subcommands: dehaze, split, augment, eval, rank, stats, pipeline.  Values
given on the command line override the same keys in the YAML config.
Failures exit non-zero with a one-line JSON error on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .augment import AugmentConfig, build_dataset, placement_from_dict
from .dataset import (DatasetManifest, Record, derive_seed, load_pairs, save_pairs,
                      split_dataset)
from .dehaze import DehazeParams, dehaze_pipeline
from .evalmoo import (REPORT_FORMATS, ConfusionStats, confusion, keep_best_rank,
                      metrics_from_stats, per_class_table, pixel_stats, rank_methods,
                      read_metric_rows, write_report)
from .imgcore import SamplePair, read_mask, resize

STAGES = ("dehaze", "split", "augment", "evaluate", "rank")


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    input_dir: Path | None = None
    output_dir: Path = Path("out")
    seed: int = 0
    split: tuple = (8, 2, 10)
    target_size: tuple = (256, 256)
    stages: tuple = ()
    downscale: str = "after"
    dehaze: dict = field(default_factory=dict)
    augment: dict = field(default_factory=dict)
    evaluate: dict = field(default_factory=dict)
    rank: dict = field(default_factory=dict)
    report_formats: tuple = REPORT_FORMATS

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        self.input_dir = Path(self.input_dir) if self.input_dir else None
        self.split = tuple(int(c) for c in self.split)
        self.target_size = tuple(int(c) for c in self.target_size)
        self.stages = tuple(self.stages or ())
        unknown = set(self.stages) - set(STAGES)
        if unknown:
            raise ConfigError(f"unknown stages {sorted(unknown)}; expected a subset of {STAGES}")
        if len(self.target_size) != 2 or min(self.target_size) < 1:
            raise ConfigError("target_size must be two positive integers")
        if len(self.split) != 3 or min(self.split) < 0:
            raise ConfigError("split must be three non-negative counts")
        self.report_formats = tuple(self.report_formats)
        if not self.report_formats or set(self.report_formats) - set(REPORT_FORMATS):
            raise ConfigError(f"report_formats must be a non-empty subset of {REPORT_FORMATS}")
        if self.downscale not in ("before", "after"):
            raise ConfigError("downscale must be 'before' or 'after'")

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    def dehaze_params(self):
        try:
            return DehazeParams(**self.dehaze)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"dehaze: {exc}") from exc

    def augment_config(self, n):
        d = dict(self.augment)
        if "method" not in d:
            raise ConfigError("augment.method is required")
        d.setdefault("n", n)
        d.setdefault("seed", derive_seed(self.seed, "augment"))
        try:
            d["placement"] = placement_from_dict(d.get("placement"))
            return AugmentConfig(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"augment: {exc}") from exc


def load_config(path):
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file {path} not found")
    data = yaml.safe_load(path.read_text()) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def _downscale(pairs, size):
    w, h = size
    return [SamplePair(resize(p.image, w, h), resize(p.mask, w, h), p.id) for p in pairs]


def _downscale_manifest(manifest, size):
    for rec in manifest.records:
        rec.pair = _downscale([rec.load()], size)[0]
    return manifest


def _find_prediction(pred_dir, rec_id):
    for name in (f"{rec_id}_mask.png", f"{rec_id}.png"):
        p = Path(pred_dir) / name
        if p.exists():
            return p
    raise FileNotFoundError(f"no prediction for {rec_id} in {pred_dir}")


def evaluate_predictions(pred_dir, gt_records, name="model", mode="mean"):
    """Pool confusion counts over the given ground-truth records and score them."""
    stats = ConfusionStats()
    for rec in gt_records:
        gt = rec.load_mask()
        pred = read_mask(_find_prediction(pred_dir, rec.id))
        if pred.shape != gt.shape:
            raise ValueError(f"{rec.id}: prediction {pred.shape} vs ground truth {gt.shape}")
        stats = stats + confusion(pred, gt)
    return metrics_from_stats(name, stats, mode), stats


def augmentable(manifest):
    """Training records of a split manifest; a test-tagged record is never augmented."""
    return [r for r in manifest.records if r.split == "train"]


def _check_no_test(records):
    bad = [r.id for r in records if r.split == "test"]
    if bad:
        raise ValueError(f"refusing to augment test-split records: {bad[:5]}")


def run_pipeline(cfg):
    """Run the configured stages in order and return a summary dict."""
    summary = {"stages": list(cfg.stages)}
    if not cfg.stages:
        return summary
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)

    manifest = None
    needs_data = {"dehaze", "split", "augment", "evaluate"} & set(cfg.stages)
    if needs_data:
        if cfg.input_dir is None:
            raise ConfigError("input_dir is required for the requested stages")
        pairs = load_pairs(cfg.input_dir)
        if "dehaze" in cfg.stages:
            params = cfg.dehaze_params()
            pairs = [SamplePair(dehaze_pipeline(p.image, params), p.mask, p.id) for p in pairs]
            save_pairs(out / "dehazed", pairs)
        if "split" in cfg.stages:
            manifest = split_dataset(pairs, cfg.split, cfg.seed)
        else:
            manifest = DatasetManifest([Record(p.id, "train", None, p) for p in pairs])
        if cfg.downscale == "before":
            _downscale_manifest(manifest, cfg.target_size)

    if "augment" in cfg.stages:
        train = augmentable(manifest)
        _check_no_test(train)
        acfg = cfg.augment_config(len(train))
        aug = build_dataset([r.load() for r in train], acfg)
        if cfg.downscale == "after":
            _downscale_manifest(aug, cfg.target_size)
        aug.write(out / "augment" / acfg.method)
        summary["augmented_records"] = len(aug)
        summary["augmented_pixel_total"] = pixel_stats(aug).total

    if manifest is not None:
        if cfg.downscale == "after":
            _downscale_manifest(manifest, cfg.target_size)
        manifest.write(out / "dataset")
        summary["source_pixel_total"] = pixel_stats(manifest.by_split("train")).total

    ranked_inputs = []
    if "evaluate" in cfg.stages:
        ev = cfg.evaluate
        if "pred_dir" not in ev:
            raise ConfigError("evaluate.pred_dir is required")
        test = [r for r in manifest.records if r.split == ev.get("split", "test")]
        rec, stats = evaluate_predictions(ev["pred_dir"], test, ev.get("name", "model"),
                                          ev.get("total_iou", "mean"))
        write_report(out / "eval", [rec], per_class=per_class_table(stats),
                     formats=cfg.report_formats)
        ranked_inputs.append(rec)
        summary["evaluation"] = {"fire_fnr": rec.fire_fnr, "veg_iou": rec.veg_iou,
                                 "total_iou": rec.total_iou, "score": rec.score}

    if "rank" in cfg.stages:
        rk = cfg.rank
        if rk.get("metrics_csv"):
            ranked_inputs += read_metric_rows(rk["metrics_csv"], rk.get("percent", False))
        if not ranked_inputs:
            raise ConfigError("rank stage has nothing to rank")
        ranked = rank_methods(ranked_inputs)
        write_report(out / "rank", ranked, formats=cfg.report_formats)
        summary["ranking"] = [r.method for r in ranked]
    return summary


# ------------------------------------------------------------ argparse front end

def _parser():
    p = argparse.ArgumentParser(prog="wildfire-aug", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="YAML config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        return sp

    sp = common(sub.add_parser("dehaze", help="remove smoke haze from every image in a directory"))
    sp.add_argument("--input")
    sp.add_argument("--omega", type=float)
    sp.add_argument("--patch", type=int)

    sp = common(sub.add_parser("split", help="tag pairs train/val/test"))
    sp.add_argument("--input")
    sp.add_argument("--counts", help="train,val,test counts, e.g. 8,2,10")
    sp.add_argument("--size", help="downscale to WxH, e.g. 256x256")

    sp = common(sub.add_parser("augment", help="generate an augmented dataset"))
    sp.add_argument("--input", help="directory of pairs or a manifest.csv")
    sp.add_argument("--method")
    sp.add_argument("--r", type=int)
    sp.add_argument("--erosion-percent", type=float)
    sp.add_argument("--fixed", help="fixed placement x_frac,y_frac[,theta]")
    sp.add_argument("--size", help="downscale outputs to WxH")
    sp.add_argument("--from-split", default="train")

    sp = common(sub.add_parser("eval", help="score prediction masks against ground truth"))
    sp.add_argument("--pred-dir")
    sp.add_argument("--gt", help="ground-truth directory of pairs or a manifest.csv")
    sp.add_argument("--split", default=None, help="only evaluate records of this split")
    sp.add_argument("--name", default="model")
    sp.add_argument("--total-iou", choices=["mean", "micro"])

    sp = common(sub.add_parser("rank", help="rank metric rows by weighted score"))
    sp.add_argument("--metrics", help="CSV with method,fire_fnr,veg_iou,total_iou")
    sp.add_argument("--percent", action="store_true", help="metric columns are percentages")
    sp.add_argument("--keep-best", action="store_true",
                    help="also replay keep-if-better selection in file order")

    sp = common(sub.add_parser("stats", help="per-class pixel composition"))
    sp.add_argument("--input", help="directory of pairs or a manifest.csv")

    common(sub.add_parser("pipeline", help="run the stages listed in the config"))
    return p


def _records(path, split=None):
    path = Path(path)
    if path.suffix == ".csv":
        manifest = DatasetManifest.read(path)
    else:
        manifest = DatasetManifest([Record(p.id, "train", None, p) for p in load_pairs(path)])
    if split is not None:
        manifest = manifest.by_split(split)
    return manifest


def _size(text):
    w, h = text.lower().split("x")
    return int(w), int(h)


def _pick(args, conf, key, conf_key=None, default=None):
    v = getattr(args, key, None)
    if v is not None:
        return v
    return conf.get(conf_key or key, default)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        result = _dispatch(args)
    except (ConfigError, argparse.ArgumentTypeError, yaml.YAMLError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError, KeyError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    if result is not None:
        print(json.dumps(result, indent=2, sort_keys=True, default=str))
    return 0


def _dispatch(args):
    conf = load_config(args.config)
    seed = _pick(args, conf, "seed", default=0)
    out = Path(_pick(args, conf, "out", "output_dir", "out"))
    cmd = args.command

    if cmd == "pipeline":
        conf = dict(conf)
        conf["seed"] = seed
        conf["output_dir"] = out
        return run_pipeline(PipelineConfig.from_dict(conf))

    if cmd == "dehaze":
        params = dict(conf.get("dehaze", {}))
        if args.omega is not None:
            params["omega"] = args.omega
        if args.patch is not None:
            params["patch"] = args.patch
        pairs = load_pairs(_required(_pick(args, conf, "input", "input_dir"), "--input"))
        p = PipelineConfig(dehaze=params).dehaze_params()
        save_pairs(out, [SamplePair(dehaze_pipeline(x.image, p), x.mask, x.id) for x in pairs])
        return {"dehazed": len(pairs), "out": str(out)}

    if cmd == "split":
        pairs = load_pairs(_required(_pick(args, conf, "input", "input_dir"), "--input"))
        counts = (tuple(int(c) for c in args.counts.split(",")) if args.counts
                  else tuple(conf.get("split", (8, 2, 10))))
        manifest = split_dataset(pairs, counts, seed)
        size = _size(args.size) if args.size else conf.get("target_size")
        if size:
            _downscale_manifest(manifest, tuple(size))
        path = manifest.write(out)
        return {"manifest": str(path), "counts": dict(zip(("train", "val", "test"), counts))}

    if cmd == "augment":
        src = _required(_pick(args, conf, "input", "input_dir"), "--input")
        if args.from_split == "test":
            raise ValueError("refusing to augment the test split")
        manifest = _records(src)
        records = [r for r in manifest.records if r.split == args.from_split]
        _check_no_test(records)
        aconf = dict(conf.get("augment", {}))
        for key, flag in (("method", args.method), ("r", args.r),
                          ("erosion_percent", args.erosion_percent)):
            if flag is not None:
                aconf[key] = flag
        if args.fixed:
            parts = [float(x) for x in args.fixed.split(",")]
            aconf["placement"] = {"kind": "fixed", "x_frac": parts[0], "y_frac": parts[1],
                                  "theta": parts[2] if len(parts) > 2 else 0.0}
        aconf.setdefault("seed", derive_seed(seed, "augment"))
        pcfg = PipelineConfig(seed=seed, augment=aconf)
        acfg = pcfg.augment_config(len(records))
        aug = build_dataset([r.load() for r in records], acfg)
        size = _size(args.size) if args.size else conf.get("target_size")
        if size:
            _downscale_manifest(aug, tuple(size))
        path = aug.write(out)
        return {"manifest": str(path), "records": len(aug), "pixel_total": pixel_stats(aug).total}

    if cmd == "eval":
        ev = conf.get("evaluate", {})
        pred_dir = _required(args.pred_dir or ev.get("pred_dir"), "--pred-dir")
        gt = _required(args.gt or ev.get("gt"), "--gt")
        records = _records(gt, args.split or ev.get("split")).records
        rec, stats = evaluate_predictions(pred_dir, records, args.name,
                                          args.total_iou or ev.get("total_iou", "mean"))
        write_report(out, [rec], per_class=per_class_table(stats))
        return {"fire_fnr": rec.fire_fnr, "veg_iou": rec.veg_iou, "total_iou": rec.total_iou,
                "score": rec.score}

    if cmd == "rank":
        rk = conf.get("rank", {})
        path = _required(args.metrics or rk.get("metrics_csv"), "--metrics")
        rows = read_metric_rows(path, args.percent or rk.get("percent", False))
        ranked = rank_methods(rows)
        extra = None
        if args.keep_best:
            tr = keep_best_rank([(r.extra or r.method, r.fire_fnr, r.veg_iou, r.total_iou)
                                 for r in rows])
            extra = {"keep_best_retained": tr.retained, "keep_best": tr.best.method}
        write_report(out, ranked, extra=extra)
        return {"ranking": [(r.method, round(r.score, 4)) for r in ranked], **(extra or {})}

    if cmd == "stats":
        src = _required(_pick(args, conf, "input", "input_dir"), "--input")
        ps = pixel_stats(_records(src))
        return {"rows": ps.as_rows(), "total": ps.total}
    raise ConfigError(f"unknown command {cmd}")


def _required(value, flag):
    if value in (None, ""):
        raise ConfigError(f"{flag} is required (flag or config)")
    return value


if __name__ == "__main__":
    sys.exit(main())
