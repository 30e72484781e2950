"""Batch command line: ingest / index / layout / biography / serve / demo.

Every subcommand builds the same ``ApiSession`` the HTTP server uses, so
batch output and server responses always agree.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .biography import assemble_biography
from .config import EngineConfig
from .corpus import CorpusError, load_corpus
from .demo import build_demo_corpus
from .service import ApiSession, create_app


def _load_config(path: str | None) -> EngineConfig:
    if path is None:
        return EngineConfig()
    return EngineConfig.from_file(path)


def cmd_ingest(args) -> int:
    config = _load_config(args.config)
    try:
        corpus = load_corpus(args.data, config)
    except CorpusError as exc:
        print(f"ingest failed: {exc}", file=sys.stderr)
        return 1
    print(f"handscrolls: {len(corpus.handscrolls)}")
    print(f"persons:     {len(corpus.dbs.persons)}")
    print(f"places:      {len(corpus.dbs.places)}")
    print(f"eras:        {len(corpus.dbs.eras.entries)}")
    print(f"events:      {len(corpus.dbs.events)}")
    print(f"seals:       {len(corpus.dbs.seal_gallery)} gallery entries")
    if args.check:
        print("all invariants and cross-references hold")
    return 0


def cmd_index(args) -> int:
    session = ApiSession(args.data, _load_config(args.config))
    out = Path(args.out)
    session.gallery_index.save(out)
    n = len(session.gallery_index.ids)
    print(f"indexed {n} gallery seals -> {out}")
    return 0


def cmd_layout(args) -> int:
    session = ApiSession(args.data, _load_config(args.config))
    plan, layout = session.layout(args.id, args.target)
    png = session.render_ring(args.id, args.target)
    out_png = Path(args.out)
    out_png.write_bytes(png.read_bytes())
    if args.layout_json:
        Path(args.layout_json).write_text(
            json.dumps({"plan": plan.to_json(), "ring": layout.to_json()}, indent=2),
            encoding="utf-8",
        )
    print(f"ring render -> {out_png} ({len(layout.arcs)} arcs)")
    return 0


def cmd_biography(args) -> int:
    config = _load_config(args.config)
    corpus = load_corpus(args.data, config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = sorted(corpus.handscrolls) if args.all else [args.id]
    if not args.all and args.id is None:
        print("biography: need --id or --all", file=sys.stderr)
        return 2
    for hid in ids:
        b = assemble_biography(corpus, hid, config)
        path = out_dir / f"{hid.replace(':', '_')}.json"
        path.write_text(b.serialize() + "\n", encoding="utf-8")
    print(f"wrote {len(ids)} biographies to {out_dir}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    logging.basicConfig(stream=sys.stderr, level=logging.INFO)
    app = create_app(ApiSession(args.data, _load_config(args.config)))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_demo(args) -> int:
    path = build_demo_corpus(args.out, seed=args.seed)
    print(f"demo corpus written to {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="handscroll")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and validate a corpus directory")
    p.add_argument("--data", required=True)
    p.add_argument("--check", action="store_true", help="fail on any invariant violation")
    p.add_argument("--config")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("index", help="build and persist the seal-gallery LSH index")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("layout", help="render the circular layout of one handscroll")
    p.add_argument("--data", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--target", type=int, default=900)
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--layout-json", help="also write plan + ring layout JSON")
    p.add_argument("--config")
    p.set_defaults(fn=cmd_layout)

    p = sub.add_parser("biography", help="assemble biographies in batch")
    p.add_argument("--data", required=True)
    p.add_argument("--id")
    p.add_argument("--all", action="store_true", help="one file per handscroll")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config")
    p.set_defaults(fn=cmd_biography)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--data", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("demo", help="write the synthetic demonstration corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(fn=cmd_demo)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
