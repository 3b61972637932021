"""Seeded training of the toy CNN; exports scanner weight fixtures.

Regularizer switches follow the classic CIFAR recipe: weight decay,
dropout on the first dense layer, and input distortions (horizontal
reflection, brightness within +-63, contrast 0.2-1.8). Crop
augmentation resamples a random square of at least a configured side
and rescales it to the input size.
"""

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from .corpus import load_corpus_npz
from .nets import ArchConfig, ToyCnn
from .weights_io import write_weights

N_GOLDEN = 10


@dataclass
class TrainRun:
    dataset: str
    out: str
    epochs: int = 10
    batch_size: int = 100
    lr: float = 1e-3
    seed: int = 0
    weight_decay: float = 0.0
    dropout: float = 0.0
    distortions: bool = False
    augment_min_side: int = 0     # 0 disables crop augmentation
    embed_augment: float = 0.0    # chance of black-canvas placement augment
    embed_sides: tuple = (12, 24)
    arch: ArchConfig = field(default_factory=ArchConfig)

    @classmethod
    def from_json(cls, path):
        doc = json.loads(Path(path).read_text())
        arch = ArchConfig(**doc.pop("arch", {}))
        return cls(arch=arch, **doc)


def _distort(rng, batch: np.ndarray) -> np.ndarray:
    out = batch.astype(np.float32)
    n = out.shape[0]
    flip = rng.random(n) < 0.5
    out[flip] = out[flip, :, ::-1]
    bright = rng.uniform(-63, 63, size=(n, 1, 1, 1)).astype(np.float32)
    contrast = rng.uniform(0.2, 1.8, size=(n, 1, 1, 1)).astype(np.float32)
    mean = out.mean(axis=(1, 2, 3), keepdims=True)
    out = (out - mean) * contrast + mean + bright
    return np.clip(out, 0, 255)


def _embed_random(rng, batch: np.ndarray, p: float, sides, full: int) -> np.ndarray:
    """Downscale a sample and place it on a black canvas (probe regime)."""
    out = batch.astype(np.float32, copy=True)
    for i, px in enumerate(batch):
        if rng.random() >= p:
            continue
        side = int(rng.integers(sides[0], sides[1] + 1))
        small = F.interpolate(
            torch.from_numpy(px.astype(np.float32)).permute(2, 0, 1)[None],
            size=(side, side), mode="bilinear", align_corners=False)[0]
        y = int(rng.integers(0, full - side + 1))
        x = int(rng.integers(0, full - side + 1))
        canvas = np.zeros((full, full, batch.shape[3]), dtype=np.float32)
        canvas[y:y + side, x:x + side] = small.permute(1, 2, 0).numpy()
        out[i] = canvas
    return out


def _augment_crops(rng, batch: np.ndarray, min_side: int, full: int) -> np.ndarray:
    out = np.empty_like(batch, dtype=np.float32)
    for i, px in enumerate(batch):
        side = int(rng.integers(min_side, full + 1))
        y = int(rng.integers(0, full - side + 1))
        x = int(rng.integers(0, full - side + 1))
        piece = torch.from_numpy(
            px[y:y + side, x:x + side].astype(np.float32)).permute(2, 0, 1)
        if side != full:
            piece = F.interpolate(piece[None], size=(full, full), mode="bilinear",
                                  align_corners=False)[0]
        out[i] = piece.permute(1, 2, 0).numpy()
    return out


@torch.no_grad()
def evaluate(net: ToyCnn, x: np.ndarray, y: np.ndarray, batch=200) -> float:
    hits = 0
    for start in range(0, len(x), batch):
        logits = net.logits_from_uint8(x[start:start + batch])
        hits += int((logits.argmax(1).numpy() == y[start:start + batch]).sum())
    return hits / len(x)


def train(run: TrainRun, log=print) -> dict:
    x_tr, y_tr, x_te, y_te = load_corpus_npz(run.dataset)
    net, summary = train_arrays(run, x_tr, y_tr, x_te, y_te, log=log)
    return summary


def train_arrays(run: TrainRun, x_tr, y_tr, x_te, y_te, log=print):
    torch.manual_seed(run.seed)
    rng = np.random.default_rng(run.seed)
    full = run.arch.input_side
    arch = ArchConfig(**{**asdict(run.arch), "dropout": run.dropout})
    net = ToyCnn(arch)
    params = [p for p in net.parameters() if p.requires_grad]
    opt = torch.optim.Adam(params, lr=run.lr, weight_decay=run.weight_decay)
    drop_at = max(int(run.epochs * 0.8), 1)
    n = len(x_tr)
    for epoch in range(run.epochs):
        if epoch == drop_at:
            for g in opt.param_groups:
                g["lr"] = run.lr * 0.1
        order = rng.permutation(n)
        net.train()
        total_loss = 0.0
        for start in range(0, n, run.batch_size):
            idx = order[start:start + run.batch_size]
            batch = x_tr[idx]
            if run.augment_min_side:
                batch = _augment_crops(rng, batch, run.augment_min_side, full)
            if run.embed_augment and epoch >= 1:
                # first epoch is a plain warmup: with a frozen-zero conv1
                # bias, starting straight on mostly-black canvases tends
                # to kill every relu and training never recovers
                batch = _embed_random(rng, batch, run.embed_augment,
                                      run.embed_sides, full)
            if run.distortions:
                batch = _distort(rng, batch)
            xb = torch.from_numpy(np.ascontiguousarray(
                batch, dtype=np.float32)).permute(0, 3, 1, 2) / 255.0
            yb = torch.from_numpy(y_tr[idx])
            opt.zero_grad()
            loss = F.cross_entropy(net(xb), yb)
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"training diverged (non-finite loss) at epoch {epoch}, "
                    f"seed {run.seed}")
            loss.backward()
            opt.step()
            total_loss += float(loss.detach()) * len(idx)
        log(f"epoch {epoch + 1}/{run.epochs} loss {total_loss / n:.4f}")
    test_acc = evaluate(net, x_te, y_te)
    train_acc = evaluate(net, x_tr[:1000], y_tr[:1000])
    log(f"accuracy: train {train_acc:.3f} test {test_acc:.3f}")
    return net, export_fixture(net, run, test_acc, x_te)


def export_fixture(net: ToyCnn, run: TrainRun, test_acc: float,
                   x_golden: np.ndarray) -> dict:
    out = Path(run.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    info = {"train_info": {
        "epochs": run.epochs, "seed": run.seed, "test_accuracy": round(test_acc, 4),
        "weight_decay": run.weight_decay, "dropout": run.dropout,
        "distortions": run.distortions, "augment_min_side": run.augment_min_side,
    }}
    write_weights(out, net.export_arrays(), net.cfg.netspec_dict(), info)
    golden_in = np.ascontiguousarray(x_golden[:N_GOLDEN])
    golden_logits = net.logits_from_uint8(golden_in).numpy().astype(np.float32)
    np.savez(str(out) + ".golden.npz", inputs=golden_in, logits=golden_logits)
    return {"weights": str(out), "test_accuracy": test_acc}


def save_torch_checkpoint(net: ToyCnn, out_dir, class_names=None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.save(net.state_dict(), out_dir / "model.pt")
    (out_dir / "arch.json").write_text(json.dumps(asdict(net.cfg), indent=1) + "\n")
    if class_names:
        (out_dir / "classes.json").write_text(json.dumps(list(class_names)) + "\n")
