"""Models servable behind the protocol."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class ModelInfo:
    name: str
    num_classes: int
    input_side: int
    channels: int
    max_batch: int = 64
    max_inflight: int = 4

    def hello(self) -> dict:
        return {"name": self.name, "num_classes": self.num_classes,
                "input_side": self.input_side, "channels": self.channels,
                "max_batch": self.max_batch, "max_inflight": self.max_inflight}


class EchoModel:
    """Deterministic reference model for protocol conformance tests.

    Predicts the mean-pixel bucket: label = floor(mean / 256 * K); the
    score vector decays geometrically with distance from that label.
    """

    def __init__(self, num_classes=10, input_side=8, channels=3):
        self.info = ModelInfo("echo", num_classes, input_side, channels)

    def scores(self, px: np.ndarray) -> np.ndarray:
        k = self.info.num_classes
        mean = float(px.mean()) if px.size else 0.0
        label = min(int(mean * k / 256.0), k - 1)
        raw = 0.5 ** np.abs(np.arange(k) - label)
        return raw / raw.sum()

    def batch_scores(self, batch: np.ndarray) -> np.ndarray:
        return np.stack([self.scores(px) for px in batch])


class TorchModel:
    """A trained ToyCnn checkpoint directory served as a classifier.

    Layout: <dir>/model.pt (state dict), <dir>/arch.json, optional
    <dir>/classes.json with class names.
    """

    def __init__(self, ckpt_dir, max_batch=64, max_inflight=4):
        import torch
        from .nets import ArchConfig, ToyCnn

        ckpt_dir = Path(ckpt_dir)
        arch = ArchConfig(**json.loads((ckpt_dir / "arch.json").read_text()))
        self.net = ToyCnn(arch)
        state = torch.load(ckpt_dir / "model.pt", map_location="cpu",
                           weights_only=True)
        self.net.load_state_dict(state)
        self.net.eval()
        self.info = ModelInfo(f"torch:{ckpt_dir.name}", arch.num_classes,
                              arch.input_side, arch.channels,
                              max_batch=max_batch, max_inflight=max_inflight)

    def batch_scores(self, batch: np.ndarray) -> np.ndarray:
        import torch
        logits = self.net.logits_from_uint8(batch).to(torch.float64)
        return torch.softmax(logits, dim=1).numpy()

    def scores(self, px: np.ndarray) -> np.ndarray:
        return self.batch_scores(px[None])[0]


def load_model(spec: str):
    """echo[:K[,side[,channels]]] | torch:<checkpoint dir>"""
    kind, _, rest = spec.partition(":")
    if kind == "echo":
        args = [int(v) for v in rest.split(",") if v] if rest else []
        return EchoModel(*args)
    if kind == "torch":
        return TorchModel(rest)
    raise ValueError(f"unknown model spec {spec!r} (echo|torch:<dir>)")
