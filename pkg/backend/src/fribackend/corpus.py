"""Seeded corpora: synthetic CIFAR-like textures and natural photo tiles.

The texture classes are stationary (stripes, checkers, noise spectra),
so small crops of an image stay informative -- the regime where region
sweeps produce interesting correctness churn.
"""

import json
from pathlib import Path

import numpy as np

TEXTURE_CLASSES = ("hstripes", "vstripes", "dstripes", "checker", "rings",
                   "blobs", "smooth", "salt", "gradient", "grid")


def _base_colors(rng):
    a = rng.uniform(30, 225, size=3)
    b = rng.uniform(30, 225, size=3)
    while np.abs(a - b).sum() < 120:  # keep the two tones apart
        b = rng.uniform(30, 225, size=3)
    return a, b


def _texture(rng, cls: int, side: int) -> np.ndarray:
    yy, xx = np.mgrid[0:side, 0:side]
    a, b = _base_colors(rng)
    period = int(rng.integers(3, 9))
    phase = int(rng.integers(0, period))
    name = TEXTURE_CLASSES[cls]
    if name == "hstripes":
        mask = ((yy + phase) // period) % 2
    elif name == "vstripes":
        mask = ((xx + phase) // period) % 2
    elif name == "dstripes":
        mask = ((xx + yy + phase) // period) % 2
    elif name == "checker":
        mask = (((yy + phase) // period) + ((xx + phase) // period)) % 2
    elif name == "rings":
        cy, cx = rng.uniform(0, side, size=2)
        r = np.hypot(yy - cy, xx - cx)
        mask = (r // period).astype(int) % 2
    elif name == "blobs":
        mask = np.zeros((side, side))
        for _ in range(int(rng.integers(4, 9))):
            cy, cx = rng.uniform(0, side, size=2)
            s = rng.uniform(1.5, 3.5)
            mask += np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * s * s))
        mask = (mask > 0.5).astype(int)
    elif name == "smooth":
        coarse = rng.uniform(0, 1, size=(4, 4))
        mask = np.kron(coarse, np.ones((side // 4 + 1, side // 4 + 1)))
        mask = mask[:side, :side]
    elif name == "salt":
        mask = (rng.random((side, side)) < 0.12).astype(int)
    elif name == "gradient":
        gx, gy = rng.uniform(-1, 1, size=2)
        ramp = gx * xx + gy * yy
        span = ramp.max() - ramp.min()
        mask = (ramp - ramp.min()) / (span if span > 0 else 1.0)
    else:  # grid
        mask = (((yy + phase) % period == 0) | ((xx + phase) % period == 0)).astype(int)
    img = a[None, None, :] + mask[:, :, None] * (b - a)[None, None, :]
    img = img + rng.normal(0, 12, size=img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def texture_sample(seed, index: int, cls: int, side: int = 32) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, index, cls]))
    return _texture(rng, cls, side)


def build_texture_corpus(seed: int, n_train: int, n_test: int, side: int = 32):
    """Balanced 10-class arrays: (x_train, y_train, x_test, y_test)."""
    def split(n, offset):
        xs = np.empty((n, side, side, 3), dtype=np.uint8)
        ys = np.empty(n, dtype=np.int64)
        for i in range(n):
            cls = i % len(TEXTURE_CLASSES)
            xs[i] = texture_sample(seed, offset + i, cls, side)
            ys[i] = cls
        return xs, ys

    x_tr, y_tr = split(n_train, 0)
    x_te, y_te = split(n_test, 10_000_000)
    return x_tr, y_tr, x_te, y_te


def save_corpus_npz(path, x_train, y_train, x_test, y_test):
    np.savez_compressed(path, x_train=x_train, y_train=y_train,
                        x_test=x_test, y_test=y_test,
                        classes=np.array(TEXTURE_CLASSES))


def load_corpus_npz(path):
    d = np.load(path, allow_pickle=False)
    return d["x_train"], d["y_train"], d["x_test"], d["y_test"]


# -- natural photo tiles ---------------------------------------------------

NATURAL_PHOTOS = ("astronaut", "chelsea", "coffee", "rocket",
                  "immunohistochemistry", "hubble_deep_field", "grass", "brick")


def _load_photos():
    from skimage import data as skdata

    photos = []
    for name in NATURAL_PHOTOS:
        img = getattr(skdata, name)()
        if img.ndim == 2:
            img = np.repeat(img[:, :, None], 3, axis=2)
        photos.append(img[:, :, :3].astype(np.uint8))
    return photos


def _tile(rng, photo: np.ndarray, out_side: int) -> np.ndarray:
    from PIL import Image as PILImage

    h, w = photo.shape[:2]
    side = int(rng.integers(out_side, min(h, w, out_side * 4) + 1))
    y = int(rng.integers(0, h - side + 1))
    x = int(rng.integers(0, w - side + 1))
    piece = photo[y:y + side, x:x + side]
    if side != out_side:
        piece = np.asarray(PILImage.fromarray(piece).resize(
            (out_side, out_side), PILImage.BILINEAR))
    return np.ascontiguousarray(piece)


def build_natural_corpus(seed: int, n_train_per_class: int,
                         n_test_per_class: int, tile_side: int = 64):
    """Photo-identity classification task over random tiles of real images."""
    photos = _load_photos()
    rng = np.random.default_rng(seed)

    def split(n_per):
        xs, ys = [], []
        for cls, photo in enumerate(photos):
            for _ in range(n_per):
                xs.append(_tile(rng, photo, tile_side))
                ys.append(cls)
        return np.stack(xs), np.array(ys, dtype=np.int64)

    x_tr, y_tr = split(n_train_per_class)
    x_te, y_te = split(n_test_per_class)
    return x_tr, y_tr, x_te, y_te, list(NATURAL_PHOTOS)


# -- manifest export (for the scanner CLI) ---------------------------------

def export_manifest_split(out_dir, xs, ys, class_names, prefix="img",
                          supercategory="synthetic"):
    """Write PNG files plus the scanner's manifest.json beside them."""
    from PIL import Image as PILImage

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, (px, y) in enumerate(zip(xs, ys)):
        name = f"{prefix}{i:03d}.png"
        PILImage.fromarray(px).save(out_dir / name)
        entries.append({"path": name, "truth": int(y),
                        "class_name": str(class_names[int(y)]),
                        "supercategory": supercategory})
    (out_dir / "manifest.json").write_text(
        json.dumps({"entries": entries}, indent=1) + "\n")
    return out_dir / "manifest.json"
