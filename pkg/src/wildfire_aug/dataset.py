"""Dataset records, manifests, directory I/O and train/val/test splitting."""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imgcore import SamplePair, read_image, read_mask, write_image, write_mask

MANIFEST_COLUMNS = ["out_image", "out_mask", "method", "source_id", "target_id",
                    "params_json", "seed", "split"]
SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class Provenance:
    method: str
    source_id: str
    target_id: str = ""
    params: dict = field(default_factory=dict)
    seed: int = 0

    def params_json(self):
        return json.dumps(self.params, sort_keys=True, separators=(",", ":"))


@dataclass
class Record:
    id: str
    split: str = "train"
    provenance: Provenance | None = None
    pair: SamplePair | None = None
    image_path: Path | None = None
    mask_path: Path | None = None

    def load(self):
        if self.pair is None:
            if self.image_path is None or self.mask_path is None:
                raise ValueError(f"record {self.id} has neither data nor file paths")
            self.pair = SamplePair(read_image(self.image_path), read_mask(self.mask_path), self.id)
        return self.pair

    def load_mask(self):
        if self.pair is not None:
            return self.pair.mask
        if self.mask_path is None:
            raise ValueError(f"record {self.id} has no mask")
        return read_mask(self.mask_path)


@dataclass
class DatasetManifest:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def pairs(self, split=None):
        return [r.load() for r in self.records if split is None or r.split == split]

    def by_split(self, split):
        return DatasetManifest([r for r in self.records if r.split == split])

    def write(self, out_dir, name="manifest.csv"):
        """Save every in-memory pair as PNG and write the manifest CSV next to them."""
        out_dir = Path(out_dir)
        (out_dir / "images").mkdir(parents=True, exist_ok=True)
        (out_dir / "masks").mkdir(parents=True, exist_ok=True)
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            raise ValueError("manifest record ids are not unique")
        for rec in self.records:
            if rec.pair is not None:
                rec.image_path = out_dir / "images" / f"{rec.id}.png"
                rec.mask_path = out_dir / "masks" / f"{rec.id}_mask.png"
                write_image(rec.image_path, rec.pair.image)
                write_mask(rec.mask_path, rec.pair.mask)
            elif not (rec.image_path and Path(rec.image_path).exists()):
                raise FileNotFoundError(f"record {rec.id}: image file missing")
        path = out_dir / name
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(MANIFEST_COLUMNS)
            for rec in self.records:
                prov = rec.provenance or Provenance("none", rec.id)
                writer.writerow([_rel(rec.image_path, out_dir), _rel(rec.mask_path, out_dir),
                                 prov.method, prov.source_id, prov.target_id,
                                 prov.params_json(), prov.seed, rec.split])
        return path

    @classmethod
    def read(cls, path):
        path = Path(path)
        base = path.parent
        records = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                missing = set(MANIFEST_COLUMNS) - set(row)
                if missing:
                    raise ValueError(f"{path}: missing columns {sorted(missing)}")
                image_path = base / row["out_image"]
                rec_id = image_path.stem
                prov = Provenance(row["method"], row["source_id"], row["target_id"],
                                  json.loads(row["params_json"] or "{}"), int(row["seed"] or 0))
                records.append(Record(rec_id, row["split"], prov, None, image_path,
                                      base / row["out_mask"]))
        return cls(records)


def _rel(p, base):
    p = Path(p)
    try:
        return p.relative_to(base).as_posix()
    except ValueError:
        return str(p)


def load_pairs(input_dir):
    """Read ``<id>.png`` / ``<id>_mask.png`` pairs from a directory, sorted by id."""
    input_dir = Path(input_dir)
    if not input_dir.is_dir():
        raise FileNotFoundError(f"input directory {input_dir} does not exist")
    pairs = []
    for mask_path in sorted(input_dir.glob("*_mask.png")):
        pair_id = mask_path.name[: -len("_mask.png")]
        image_path = input_dir / f"{pair_id}.png"
        if not image_path.exists():
            raise FileNotFoundError(f"mask {mask_path.name} has no matching image")
        pairs.append(SamplePair(read_image(image_path), read_mask(mask_path), pair_id))
    if not pairs:
        raise FileNotFoundError(f"no <id>.png / <id>_mask.png pairs in {input_dir}")
    return pairs


def save_pairs(out_dir, pairs):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for p in pairs:
        write_image(out_dir / f"{p.id}.png", p.image)
        write_mask(out_dir / f"{p.id}_mask.png", p.mask)


def derive_seed(*parts):
    """Stable 64-bit seed from arbitrary printable parts."""
    digest = hashlib.sha256(json.dumps([str(p) for p in parts]).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def split_dataset(pairs, counts=(8, 2, 10), seed=0):
    """Shuffle deterministically and tag pairs train/val/test by ``counts``."""
    counts = tuple(int(c) for c in counts)
    if len(counts) != 3 or min(counts) < 0:
        raise ValueError(f"split counts must be three non-negative integers, got {counts}")
    if sum(counts) != len(pairs):
        raise ValueError(f"split counts {counts} do not sum to {len(pairs)} pairs")
    order = np.random.default_rng(derive_seed(seed, "split")).permutation(len(pairs))
    tags = [s for s, c in zip(SPLITS, counts) for _ in range(c)]
    records = []
    for tag, idx in zip(tags, order):
        p = pairs[idx]
        records.append(Record(p.id, tag, Provenance("none", p.id, "", {}, seed), p))
    return DatasetManifest(records)

