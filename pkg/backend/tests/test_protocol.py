import base64
import hashlib
import json

import numpy as np
import pytest

from fribackend.models import EchoModel, load_model
from fribackend.protocol import handle_request

# contract shared with the scanner's wire tests
CODEC_SHA256 = "2eb798cac9ab30c7fd20a9e7b357714429d39df08d11d0b75763702c4af2ceb8"


def codec_image() -> np.ndarray:
    return (np.arange(8 * 8 * 3, dtype=np.int64) % 256).astype(np.uint8).reshape(8, 8, 3)


def item_for(px: np.ndarray) -> dict:
    return {"h": px.shape[0], "w": px.shape[1], "c": px.shape[2],
            "pixels": base64.b64encode(px.tobytes()).decode("ascii")}


class TestCodecContract:
    def test_fixed_checksum(self):
        payload = item_for(codec_image())["pixels"]
        assert hashlib.sha256(payload.encode("ascii")).hexdigest() == CODEC_SHA256


class TestHello:
    def test_echo_hello(self):
        model = EchoModel()
        resp = handle_request(model, {"op": "hello"})
        assert resp == {"name": "echo", "num_classes": 10, "input_side": 8,
                        "channels": 3, "max_batch": 64, "max_inflight": 4}


class TestClassify:
    def test_mean_bucket_label(self):
        model = EchoModel()
        px = np.full((8, 8, 3), 200, dtype=np.uint8)
        resp = handle_request(model, {"id": 1, "op": "classify", "topk": 3,
                                      **item_for(px)})
        assert resp["id"] == 1
        assert resp["labels"][0] == int(200 * 10 / 256)
        assert len(resp["labels"]) == 3
        assert resp["scores"] == sorted(resp["scores"], reverse=True)

    def test_deterministic(self):
        model = EchoModel()
        rng = np.random.default_rng(0)
        px = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
        req = {"id": 2, "op": "classify", "topk": 10, **item_for(px)}
        assert handle_request(model, req) == handle_request(model, dict(req))

    def test_scores_form_distribution(self):
        model = EchoModel()
        px = np.zeros((8, 8, 3), dtype=np.uint8)
        resp = handle_request(model, {"id": 3, "op": "classify", "topk": 10,
                                      **item_for(px)})
        assert sum(resp["scores"]) == pytest.approx(1.0, abs=1e-9)

    def test_batch_of_16_matches_16_singles(self):
        model = EchoModel()
        rng = np.random.default_rng(1)
        pxs = [rng.integers(0, 256, (8, 8, 3), dtype=np.uint8) for _ in range(16)]
        batch = handle_request(model, {"id": 4, "op": "classify_batch", "topk": 5,
                                       "items": [item_for(p) for p in pxs]})
        singles = [handle_request(model, {"id": i, "op": "classify", "topk": 5,
                                          **item_for(p)})
                   for i, p in enumerate(pxs)]
        assert [r for r in batch["results"]] == \
            [{"labels": s["labels"], "scores": s["scores"]} for s in singles]


class TestErrorPaths:
    def test_wrong_payload_size(self):
        model = EchoModel()
        bad = {"id": 9, "op": "classify", "topk": 1, "h": 8, "w": 8, "c": 3,
               "pixels": base64.b64encode(b"abc").decode()}
        resp = handle_request(model, bad)
        assert resp["id"] == 9 and "error" in resp

    def test_wrong_shape_for_model(self):
        model = EchoModel()
        px = np.zeros((4, 4, 3), dtype=np.uint8)
        resp = handle_request(model, {"id": 10, "op": "classify", "topk": 1,
                                      **item_for(px)})
        assert "error" in resp and "4x4x3" in resp["error"]

    def test_unknown_op(self):
        resp = handle_request(EchoModel(), {"id": 11, "op": "transmogrify"})
        assert resp["id"] == 11 and "unknown op" in resp["error"]

    def test_stream_survives_malformed_lines(self):
        import io
        from fribackend.protocol import serve_stream

        model = EchoModel()
        lines = b"this is not json\n" + \
            (json.dumps({"op": "hello"}) + "\n").encode()
        out = io.BytesIO()
        serve_stream(model, io.BytesIO(lines), out)
        responses = [json.loads(l) for l in out.getvalue().splitlines()]
        assert "error" in responses[0]
        assert responses[1]["name"] == "echo"


class TestModelSpec:
    def test_echo_with_args(self):
        model = load_model("echo:5,16,1")
        assert model.info.num_classes == 5
        assert model.info.input_side == 16
        assert model.info.channels == 1

    def test_unknown_spec(self):
        with pytest.raises(ValueError):
            load_model("banana:1")
