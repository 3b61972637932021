"""fribackend command line: serve models, train fixtures, build corpora."""

import argparse
import json
import sys
from pathlib import Path


def cmd_serve(args) -> int:
    from .models import load_model
    from .protocol import serve_stdio, serve_tcp

    model = load_model(args.model)
    if args.max_batch:
        model.info.max_batch = args.max_batch
    if args.max_inflight:
        model.info.max_inflight = args.max_inflight
    if args.tcp is not None:
        serve_tcp(model, args.host, args.tcp)
    else:
        serve_stdio(model)
    return 0


def cmd_train(args) -> int:
    from .train import TrainRun, train

    run = TrainRun.from_json(args.config)
    summary = train(run)
    print(json.dumps(summary))
    return 0


def cmd_make_corpus(args) -> int:
    from .corpus import build_texture_corpus, save_corpus_npz

    x_tr, y_tr, x_te, y_te = build_texture_corpus(
        args.seed, args.n_train, args.n_test)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_corpus_npz(args.out, x_tr, y_tr, x_te, y_te)
    print(f"wrote {args.out}: {args.n_train} train / {args.n_test} test")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="fribackend")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="serve a model over the wire protocol")
    p.add_argument("--model", required=True,
                   help="echo[:classes,side,channels] | torch:<ckpt dir>")
    p.add_argument("--stdio", action="store_true", default=False,
                   help="serve on stdin/stdout (default)")
    p.add_argument("--tcp", type=int, default=None, metavar="PORT")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--max-batch", type=int, default=0)
    p.add_argument("--max-inflight", type=int, default=0)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("train", help="train the toy CNN from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("make-corpus", help="generate the texture corpus npz")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-train", type=int, default=3000)
    p.add_argument("--n-test", type=int, default=500)
    p.set_defaults(fn=cmd_make_corpus)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
