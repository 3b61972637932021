"""Writer/reader for the scanner's TCNNW1 weights container.

Implemented against the documented format only (magic, LE uint32 layer
table, float32 row-major data, JSON sidecar) so it stays independent of
the scanner package.
"""

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"TCNNW1\n"
LAYER_NAMES = ("conv1_w", "conv1_b", "conv2_w", "conv2_b",
               "fc1_w", "fc1_b", "fc2_w", "fc2_b")

LRN_META = {"radius": 4, "bias": 1.0, "alpha": 0.001 / 9.0, "beta": 0.75}


def write_weights(path, arrays: dict, netspec: dict, extra_meta: dict | None = None):
    path = Path(path)
    blob = [MAGIC, struct.pack("<I", len(LAYER_NAMES))]
    for name in LAYER_NAMES:
        arr = np.ascontiguousarray(arrays[name], dtype="<f4")
        if not np.isfinite(arr).all():
            raise ValueError(f"{name} contains non-finite values")
        nb = name.encode()
        blob.append(struct.pack("<I", len(nb)))
        blob.append(nb)
        blob.append(struct.pack("<I", arr.ndim))
        blob.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        blob.append(arr.tobytes())
    path.write_bytes(b"".join(blob))
    meta = {"netspec": netspec, "lrn": LRN_META, "input_scale": "1/255"}
    if extra_meta:
        meta.update(extra_meta)
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=1) + "\n")


def read_weights(path):
    """Parse back a TCNNW1 file; returns (arrays dict, meta dict)."""
    path = Path(path)
    buf = path.read_bytes()
    if buf[:len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: bad magic")
    off = len(MAGIC)
    (count,) = struct.unpack_from("<I", buf, off)
    off += 4
    arrays = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<I", buf, off)
        off += 4
        name = buf[off:off + nlen].decode()
        off += nlen
        (rank,) = struct.unpack_from("<I", buf, off)
        off += 4
        dims = struct.unpack_from(f"<{rank}I", buf, off)
        off += 4 * rank
        n = int(np.prod(dims)) if dims else 1
        arrays[name] = np.frombuffer(buf, dtype="<f4", count=n,
                                     offset=off).reshape(dims).copy()
        off += 4 * n
    if off != len(buf):
        raise ValueError(f"{path}: trailing bytes")
    meta = json.loads(Path(str(path) + ".meta.json").read_text())
    return arrays, meta
