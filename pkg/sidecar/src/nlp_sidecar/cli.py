"""Sidecar CLI: make-bundle, serve-embed, bertscore-merge."""

from __future__ import annotations

import argparse
import sys

from .bundle import make_bundle
from .config import SidecarConfig, SidecarError
from .embed_backend import select_backend


def cmd_make_bundle(args) -> int:
    config = SidecarConfig(
        input_path=args.input,
        out_path=args.out,
        chunk_size=args.chunk_size,
        overlap=args.overlap,
        parse_kinds=(args.parse_kind,),
        doc_id=args.doc_id,
    )
    stats = make_bundle(config)
    print(f"bundle written to {args.out}: {stats.chunks} chunks, "
          f"{stats.sentences} sentences, {stats.parses} parses, "
          f"{stats.skipped} skipped")
    return 0


def cmd_serve_embed(args) -> int:
    from .embed_service import serve_embed

    backend = select_backend(args.backend, args.model)
    print(f"serving /embed on {args.host}:{args.port} "
          f"(backend={backend.name}, dim={backend.dim})")
    serve_embed(backend, host=args.host, port=args.port)
    return 0


def cmd_bertscore_merge(args) -> int:
    from .bertscore import bertscore_merge

    backend = select_backend(args.backend, args.model)
    report = bertscore_merge(args.results, args.report, backend,
                             results_out=args.results_out)
    print(f"bertscore merged: aggregate "
          f"{report['aggregates']['bertscore']:.1f} over {len(report.get('per_example', []))} rows")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlp-sidecar",
        description="Parse-bundle production and embedding service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-bundle", help="chunk, segment, parse a document")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--chunk-size", type=int, default=5000)
    p.add_argument("--overlap", type=int, default=0)
    p.add_argument("--parse-kind", choices=["amr", "srl"], default="amr")
    p.add_argument("--doc-id", default="doc")
    p.set_defaults(func=cmd_make_bundle)

    p = sub.add_parser("serve-embed", help="run the /embed HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8230)
    p.add_argument("--backend", choices=["auto", "lite", "model"], default="auto")
    p.add_argument("--model", default="all-MiniLM-L6-v2")
    p.set_defaults(func=cmd_serve_embed)

    p = sub.add_parser("bertscore-merge", help="add a BERTScore column to results")
    p.add_argument("--results", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--results-out", default=None)
    p.add_argument("--backend", choices=["auto", "lite", "model"], default="auto")
    p.add_argument("--model", default="all-MiniLM-L6-v2")
    p.set_defaults(func=cmd_bertscore_merge)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SidecarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
