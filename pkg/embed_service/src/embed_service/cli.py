"""Command line: `serve` runs the HTTP service, `dump` writes an EMB1 file
that the pipeline's file provider can consume offline."""

from __future__ import annotations

import argparse
import os
import sys

from embed_service.emb1 import text_key, write_emb1
from embed_service.encoder import DEFAULT_DIM, DEFAULT_MODEL, HashEncoder


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embed-service", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int,
                       default=int(os.environ.get("EMBED_PORT", "8901")))
    serve.add_argument("--model", default=DEFAULT_MODEL)
    serve.add_argument("--dim", type=int, default=DEFAULT_DIM)

    dump = sub.add_parser("dump", help="encode texts from a file into EMB1")
    dump.add_argument("--input", required=True,
                      help="UTF-8 text file, one text per line")
    dump.add_argument("--output", required=True, help="EMB1 file to write")
    dump.add_argument("--model", default=DEFAULT_MODEL)
    dump.add_argument("--dim", type=int, default=DEFAULT_DIM)
    return parser


def run_dump(args) -> int:
    encoder = HashEncoder(model_name=args.model, dim=args.dim)
    with open(args.input, encoding="utf-8") as fh:
        texts = [line.rstrip("\n") for line in fh if line.strip()]
    if not texts:
        print("error: input contains no texts", file=sys.stderr)
        return 1
    seen: dict[bytes, str] = {}
    for t in texts:
        seen.setdefault(text_key(t), t)
    keys = sorted(seen)
    vectors = encoder.encode([seen[k] for k in keys])
    write_emb1(args.output, keys, vectors)
    print(f"wrote {len(keys)} vectors (dim={args.dim}) to {args.output}")
    return 0


def main(argv: list[str] | None = None) -> None:
    args = build_parser().parse_args(argv)
    if args.command == "dump":
        raise SystemExit(run_dump(args))

    import uvicorn

    from embed_service.app import create_app

    app = create_app(model_name=args.model, dim=args.dim)
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
