"""Line-delimited JSON classification protocol server.

One JSON document per line, UTF-8. Requests: hello, classify,
classify_batch. Malformed requests produce an error response carrying
the request id; the stream itself never dies on bad input. Responses go
out in request order.
"""

import base64
import json
import socketserver
import sys

import numpy as np


def _rank(scores: np.ndarray, topk: int):
    order = np.argsort(-scores, kind="stable")[:max(min(topk, len(scores)), 1)]
    return ([int(i) for i in order], [float(scores[i]) for i in order])


def _decode_item(item: dict, info) -> np.ndarray:
    h, w, c = int(item["h"]), int(item["w"]), int(item["c"])
    raw = base64.b64decode(item["pixels"])
    if len(raw) != h * w * c:
        raise ValueError(f"payload {len(raw)} bytes, expected {h * w * c}")
    if (h, w, c) != (info.input_side, info.input_side, info.channels):
        raise ValueError(
            f"input {h}x{w}x{c} does not match served model "
            f"{info.input_side}x{info.input_side}x{info.channels}")
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w, c)


def handle_request(model, req: dict):
    """Map one request object to one response object (never raises)."""
    op = req.get("op")
    if op == "hello":
        return model.info.hello()
    rid = req.get("id")
    try:
        topk = int(req.get("topk", 1))
        if op == "classify":
            labels, scores = _rank(model.scores(_decode_item(req, model.info)), topk)
            return {"id": rid, "labels": labels, "scores": scores}
        if op == "classify_batch":
            batch = np.stack([_decode_item(item, model.info)
                              for item in req["items"]])
            results = []
            for row in model.batch_scores(batch):
                labels, scores = _rank(row, topk)
                results.append({"labels": labels, "scores": scores})
            return {"id": rid, "results": results}
        raise ValueError(f"unknown op {op!r}")
    except Exception as e:
        return {"id": rid, "error": str(e)}


def serve_stream(model, rfile, wfile):
    for line in rfile:
        if not line.strip():
            continue
        try:
            req = json.loads(line)
        except json.JSONDecodeError as e:
            resp = {"id": None, "error": f"malformed JSON: {e}"}
        else:
            resp = handle_request(model, req)
        wfile.write((json.dumps(resp) + "\n").encode("utf-8"))
        wfile.flush()


def serve_stdio(model):
    serve_stream(model, sys.stdin.buffer, sys.stdout.buffer)


def serve_tcp(model, host: str, port: int):
    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            serve_stream(model, self.rfile, self.wfile)

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    with Server((host, port), Handler) as server:
        print(f"serving {model.info.name} on {host}:{server.server_address[1]}",
              file=sys.stderr, flush=True)
        server.serve_forever()
