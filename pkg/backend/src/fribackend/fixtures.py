"""Builds every committed fixture the scanner's test suite consumes.

Run as: python -m fribackend.fixtures --out <repo>/fixtures
Produces:
  images/        24 held-out 32px texture images + manifest.json
  images48/      3 48px texture images + manifest.json (resize control)
  corpora/       texture corpus npz (regenerable, committed for reruns)
  weights/       base / probe fixtures (+ .meta.json, .golden.npz)
  natural/       60 natural 64px tiles + manifest, torch checkpoint
"""

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .corpus import (TEXTURE_CLASSES, build_natural_corpus, build_texture_corpus,
                     export_manifest_split, save_corpus_npz, texture_sample)
from .nets import ArchConfig
from .train import TrainRun, save_torch_checkpoint, train_arrays

SEED = 20190426

CLASSIC = ArchConfig()  # pool1 3/2 valid, pool2 3/2
PROBE_3 = ArchConfig(pool1_stride=1, pool1_pad="same", pool2_size=3,
                     pool2_stride=1, conv1_bias_frozen=True)
PROBE_32 = ArchConfig(pool1_stride=1, pool1_pad="same", pool2_size=32,
                      pool2_stride=1, conv1_bias_frozen=True)


def _log(msg):
    print(f"[fixtures +{time.perf_counter() - _T0:7.1f}s] {msg}", flush=True)


_T0 = time.perf_counter()


def build_all(out_dir: Path, quick: bool = False, only: tuple = ()):
    out_dir = Path(out_dir)
    (out_dir / "corpora").mkdir(parents=True, exist_ok=True)
    (out_dir / "weights").mkdir(parents=True, exist_ok=True)

    n_train, n_test = (600, 120) if quick else (3000, 500)
    _log(f"texture corpus: {n_train} train / {n_test} test")
    x_tr, y_tr, x_te, y_te = build_texture_corpus(SEED, n_train, n_test)
    corpus_npz = out_dir / "corpora" / "textures.npz"
    save_corpus_npz(corpus_npz, x_tr, y_tr, x_te, y_te)

    # held-out images for scans: the first 24 test samples
    export_manifest_split(out_dir / "images", x_te[:24], y_te[:24],
                          TEXTURE_CLASSES, prefix="tex")
    # 48px trio for the resize-control criterion (side = net input 32 < 48)
    big = [texture_sample(SEED, 77_000_000 + i, i % 10, side=48) for i in range(3)]
    export_manifest_split(out_dir / "images48", np.stack(big),
                          np.arange(3) % 10, TEXTURE_CLASSES, prefix="big")

    epochs_base = 4 if quick else 12
    epochs_probe = 2 if quick else 6
    # the base net sees crop sizes down to the P=0.4 region side (13 px on
    # 32 px images) so small-region sweeps stay above chance; the probe
    # nets see objects placed on black canvases so the embedding sweeps
    # are in-distribution (identical recipe for both pool sizes)
    runs = [
        ("base", CLASSIC, epochs_base, 11, dict(augment_min_side=13)),
        ("probe_pool3", PROBE_3, epochs_probe, 22, dict(embed_augment=0.5)),
        ("probe_pool32", PROBE_32, epochs_probe, 33, dict(embed_augment=0.5)),
    ]
    results = {}
    for stem, arch, epochs, seed_off, extra in runs:
        if only and stem not in only:
            continue
        _log(f"training {stem} ({epochs} epochs)")
        run = TrainRun(dataset=str(corpus_npz),
                       out=str(out_dir / "weights" / f"{stem}.tcnnw"),
                       epochs=epochs, seed=SEED + seed_off, arch=arch, **extra)
        _, summary = train_arrays(run, x_tr, y_tr, x_te, y_te, log=_log)
        results[stem] = summary

    if not only or "natural" in only:
        _log("natural corpus + model")
        results["natural"] = build_natural(out_dir, quick)

    summary_path = out_dir / "fixtures.json"
    summary = json.loads(summary_path.read_text()) if summary_path.exists() else {}
    summary.update({k: {"test_accuracy": round(v["test_accuracy"], 4)}
                    for k, v in results.items()})
    summary_path.write_text(json.dumps(summary, indent=1) + "\n")
    _log("done")
    return results


def build_natural(out_dir: Path, quick: bool = False) -> dict:
    out_dir = Path(out_dir)
    n_train, n_test = (80, 10) if quick else (500, 60)
    x_tr, y_tr, x_te, y_te, names = build_natural_corpus(
        SEED + 7, n_train_per_class=n_train, n_test_per_class=n_test,
        tile_side=64)
    # training views: random crops (>= 13 px, the P=0.2 region side on a
    # 64px tile) resized to the 32px net input
    run = TrainRun(dataset="", out=str(out_dir / "natural" / "natural.tcnnw"),
                   epochs=3 if quick else 10, seed=SEED + 7,
                   distortions=True, augment_min_side=13,
                   arch=replace(CLASSIC, num_classes=len(names)))

    from PIL import Image as PILImage

    def to32(tiles):
        return np.stack([np.asarray(PILImage.fromarray(t).resize(
            (32, 32), PILImage.BILINEAR)) for t in tiles])

    net, summary = train_arrays(run, to32(x_tr), y_tr, to32(x_te), y_te, log=_log)
    save_torch_checkpoint(net, out_dir / "natural" / "ckpt", names)
    # the scan set: 60 full-resolution 64px tiles, balanced over photos
    pick = np.concatenate([np.nonzero(y_te == c)[0][:60 // len(names) + 1]
                           for c in range(len(names))])[:60]
    export_manifest_split(out_dir / "natural" / "tiles", x_te[pick], y_te[pick],
                          names, prefix="nat", supercategory="photo")
    return summary


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    ap.add_argument("--quick", action="store_true",
                    help="tiny corpora/epochs for smoke testing")
    ap.add_argument("--only", default="",
                    help="comma list: base,probe_pool3,probe_pool32,natural")
    args = ap.parse_args(argv)
    only = tuple(t for t in args.only.split(",") if t)
    if only == ("natural",):
        build_natural(Path(args.out), quick=args.quick)
    else:
        build_all(Path(args.out), quick=args.quick, only=only)
    return 0


if __name__ == "__main__":
    sys.exit(main())
