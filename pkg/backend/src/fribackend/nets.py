"""Torch implementation of the scanner's two-conv CIFAR-style network.

Semantics mirror the scanner's inference engine: pixels scaled by 1/255,
stride-1 same-padded 5x5 convs, max pooling (valid, or -inf-padded SAME
for the stride-1 probe variant), cross-channel LRN with the classic
constants, and a (h, w, c) row-major flatten before the dense layers.
"""

from dataclasses import asdict, dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F


@dataclass
class ArchConfig:
    input_side: int = 32
    channels: int = 3
    num_classes: int = 10
    conv_kernel: int = 5
    conv1_filters: int = 64
    conv2_filters: int = 64
    pool1_size: int = 3
    pool1_stride: int = 2
    pool1_pad: str = "valid"
    pool2_size: int = 3
    pool2_stride: int = 2
    fc1_units: int = 192
    dropout: float = 0.0
    conv1_bias_frozen: bool = False

    def pool1_out(self) -> int:
        if self.pool1_pad == "same":
            return -(-self.input_side // self.pool1_stride)
        return (self.input_side - self.pool1_size) // self.pool1_stride + 1

    def pool2_out(self) -> int:
        return (self.pool1_out() - self.pool2_size) // self.pool2_stride + 1

    def fc1_in(self) -> int:
        return self.pool2_out() ** 2 * self.conv2_filters

    def netspec_dict(self) -> dict:
        keys = ("input_side", "channels", "num_classes", "conv_kernel",
                "conv1_filters", "conv2_filters", "pool1_size", "pool1_stride",
                "pool1_pad", "pool2_size", "pool2_stride", "fc1_units")
        d = asdict(self)
        return {k: d[k] for k in keys}


def _maxpool_same(x, size, stride):
    h, w = x.shape[2], x.shape[3]
    oh, ow = -(-h // stride), -(-w // stride)
    ph = max((oh - 1) * stride + size - h, 0)
    pw = max((ow - 1) * stride + size - w, 0)
    x = F.pad(x, (pw // 2, pw - pw // 2, ph // 2, ph - ph // 2),
              value=float("-inf"))
    return F.max_pool2d(x, size, stride)


class ToyCnn(nn.Module):
    def __init__(self, cfg: ArchConfig):
        super().__init__()
        self.cfg = cfg
        k = cfg.conv_kernel
        self.conv1 = nn.Conv2d(cfg.channels, cfg.conv1_filters, k, padding=k // 2)
        self.conv2 = nn.Conv2d(cfg.conv1_filters, cfg.conv2_filters, k,
                               padding=k // 2)
        # matches the scanner's lrn: (1 + (0.001/9) * sum_9 x^2) ** 0.75
        self.lrn = nn.LocalResponseNorm(size=9, alpha=0.001, beta=0.75, k=1.0)
        self.drop = nn.Dropout(cfg.dropout) if cfg.dropout > 0 else nn.Identity()
        self.fc1 = nn.Linear(cfg.fc1_in(), cfg.fc1_units)
        self.fc2 = nn.Linear(cfg.fc1_units, cfg.num_classes)
        if cfg.conv1_bias_frozen:
            nn.init.zeros_(self.conv1.bias)
            self.conv1.bias.requires_grad_(False)

    def forward(self, x):
        """x: float tensor (n, c, h, w) already scaled to [0, 1]."""
        cfg = self.cfg
        x = F.relu(self.conv1(x))
        if cfg.pool1_pad == "same":
            x = _maxpool_same(x, cfg.pool1_size, cfg.pool1_stride)
        else:
            x = F.max_pool2d(x, cfg.pool1_size, cfg.pool1_stride)
        x = self.lrn(x)
        x = F.relu(self.conv2(x))
        x = F.max_pool2d(x, cfg.pool2_size, cfg.pool2_stride)
        x = self.lrn(x)
        x = x.permute(0, 2, 3, 1).reshape(x.shape[0], -1)  # (h, w, c) row-major
        x = F.relu(self.fc1(x))
        x = self.drop(x)
        return self.fc2(x)

    @torch.no_grad()
    def logits_from_uint8(self, px):
        """px: numpy/torch uint8 (n, h, w, c) -> float32 logits (n, classes)."""
        x = torch.as_tensor(px).to(torch.float32).permute(0, 3, 1, 2) / 255.0
        was_training = self.training
        self.eval()
        out = self.forward(x)
        self.train(was_training)
        return out

    def export_arrays(self) -> dict:
        """Weights in the scanner's layout: conv (kh, kw, in, out), fc (in, out)."""
        sd = {k: v.detach().cpu().numpy() for k, v in self.state_dict().items()}
        return {
            "conv1_w": sd["conv1.weight"].transpose(2, 3, 1, 0),
            "conv1_b": sd["conv1.bias"],
            "conv2_w": sd["conv2.weight"].transpose(2, 3, 1, 0),
            "conv2_b": sd["conv2.bias"],
            "fc1_w": sd["fc1.weight"].T,
            "fc1_b": sd["fc1.bias"],
            "fc2_w": sd["fc2.weight"].T,
            "fc2_b": sd["fc2.bias"],
        }
