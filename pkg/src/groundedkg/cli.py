"""Command-line surface: build-graph, index, query, eval, export-graph.

A TOML config file can hold defaults for any option; command-line flags
win. Runs are deterministic: the same inputs (with the stub providers)
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import embed_index, evalkit, kg_builder, parse_ingest, ragen, retrieval
from .errors import GroundedKgError
from .providers import make_embedder


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    config_path = Path(path)
    if not config_path.exists():
        raise GroundedKgError(f"config file not found: {config_path}")
    with config_path.open("rb") as fh:
        return tomllib.load(fh)


def _pick(flag_value, config: dict, section: str, key: str, default=None):
    if flag_value is not None:
        return flag_value
    return config.get(section, {}).get(key, default)


def _embedder_from_options(args, config: dict):
    kind = _pick(args.embedder, config, "embedding", "embedder", "stub")
    spec: dict = {"kind": kind}
    if kind == "stub":
        spec["dim"] = int(_pick(args.dim, config, "embedding", "dim", 64))
        spec["seed"] = int(_pick(getattr(args, "seed", None), config, "embedding", "seed", 0))
    elif kind == "http":
        endpoint = _pick(args.endpoint, config, "embedding", "endpoint")
        if not endpoint:
            raise GroundedKgError("http embedder requires --endpoint")
        spec["endpoint"] = endpoint
    elif kind == "file_cache":
        cache = _pick(args.cache_path, config, "embedding", "cache_path")
        if not cache:
            raise GroundedKgError("file_cache embedder requires --cache-path")
        spec["path"] = cache
    return make_embedder(spec)


def _add_embedder_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--embedder", choices=["stub", "http", "file_cache"], default=None)
    parser.add_argument("--dim", type=int, default=None, help="stub embedder dimension")
    parser.add_argument("--seed", type=int, default=None, help="stub embedder seed")
    parser.add_argument("--endpoint", default=None, help="http embedder endpoint URL")
    parser.add_argument("--cache-path", default=None, help="file_cache vector table path")


def cmd_build_graph(args, config: dict) -> int:
    bundle = _pick(args.bundle, config, "paths", "bundle")
    out = _pick(args.out, config, "paths", "graph")
    if not bundle or not out:
        raise GroundedKgError("build-graph requires --bundle and --out")
    parse_kind = _pick(args.parse_kind, config, "graph", "parse_kind")
    parse = parse_ingest.load_parse_bundle(bundle, parse_kind=parse_kind)
    kg = kg_builder.build_graph(parse)
    kg_builder.export_graph(kg, out)
    print(f"graph written to {out}: {len(kg.nodes)} nodes, {len(kg.edges)} edges")
    return 0


def cmd_index(args, config: dict) -> int:
    graph_path = _pick(args.graph, config, "paths", "graph")
    out = _pick(args.out, config, "paths", "index")
    if not graph_path or not out:
        raise GroundedKgError("index requires --graph and --out")
    scheme = _pick(args.scheme, config, "embedding", "scheme", embed_index.BASIC)
    alpha = float(_pick(args.alpha, config, "embedding", "alpha", 0.5))
    beta = float(_pick(args.beta, config, "embedding", "beta", 0.8))
    kg = kg_builder.load_graph(graph_path)
    embedder = _embedder_from_options(args, config)
    index = embed_index.build_index(kg, embedder, scheme=scheme, alpha=alpha, beta=beta)
    embed_index.save_index(index, out)
    print(f"index written to {out}: scheme={scheme} alpha={alpha} beta={beta} "
          f"dim={index.dim} entries={len(index.vectors)}")
    return 0


def _retrieval_params(args, config: dict) -> retrieval.RetrievalParams:
    k = int(_pick(args.k, config, "retrieval", "k", 10))
    tau = _pick(args.tau, config, "retrieval", "tau")
    top_k_texts = _pick(args.top_k_texts, config, "retrieval", "top_k_texts")
    ret_count_min = _pick(args.ret_count_min, config, "retrieval", "ret_count_min")
    max_context = _pick(args.max_context, config, "retrieval", "max_context_sentences")
    vector_sim = None
    if tau is not None:
        vector_sim = retrieval.VectorSimParams(
            tau=float(tau),
            top_k_texts=int(top_k_texts) if top_k_texts is not None else None)
    return retrieval.RetrievalParams(
        k=k,
        vector_sim=vector_sim,
        ret_count_min=int(ret_count_min) if ret_count_min is not None else None,
        max_context_sentences=int(max_context) if max_context is not None else None)


def cmd_query(args, config: dict) -> int:
    graph_path = _pick(args.graph, config, "paths", "graph")
    index_path = _pick(args.index, config, "paths", "index")
    if not graph_path or not index_path:
        raise GroundedKgError("query requires --graph and --index")
    kg = kg_builder.load_graph(graph_path)
    index = embed_index.load_index(index_path)
    embedder = _embedder_from_options(args, config)
    params = _retrieval_params(args, config)
    query_parse = None
    if args.query_bundle:
        query_parse = parse_ingest.load_parse_bundle(args.query_bundle)
    result = retrieval.retrieve(args.question, kg, index, embedder,
                                params=params, query_parse=query_parse)
    context = retrieval.assemble_context(result.selected_texts,
                                         max_sentences=params.max_context_sentences)
    print(context)
    if args.trace:
        retrieval.write_trace(result, args.trace)
        print(f"trace written to {args.trace}")
    if args.no_llm:
        return 0
    base_url = _pick(args.llm_base_url, config, "llm", "base_url")
    model = _pick(args.llm_model, config, "llm", "model")
    if base_url and model:
        llm = ragen.LlmClient(
            base_url=base_url, model=model,
            timeout=float(_pick(None, config, "llm", "timeout", 60.0)),
            max_retries=int(_pick(None, config, "llm", "max_retries", 3)))
    else:
        llm = ragen.StubLlm()
    spec = ragen.PromptSpec.with_content(content=context, question=args.question)
    result_answer = ragen.answer(spec, llm)
    print(f"answer: {result_answer.answer}")
    return 0


def cmd_eval(args, config: dict) -> int:
    results_path = _pick(args.results, config, "paths", "results")
    if not results_path:
        raise GroundedKgError("eval requires --results")
    examples = evalkit.load_results(results_path)
    report = evalkit.evaluate(examples)
    print(evalkit.render_report(report))
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps(evalkit.report_to_dict(report), indent=1) + "\n", encoding="utf-8")
        print(f"report written to {args.json_out}")
    return 0


def cmd_export_graph(args, config: dict) -> int:
    kg = kg_builder.load_graph(args.graph)
    kg_builder.export_graph(kg, args.out)
    print(f"graph re-exported to {args.out}: {len(kg.nodes)} nodes, {len(kg.edges)} edges")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groundedkg",
        description="Sentence-grounded knowledge-graph retrieval pipeline")
    parser.add_argument("--config", default=None, help="TOML config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graph", help="build a grounded graph from a parse bundle")
    p.add_argument("--bundle", default=None)
    p.add_argument("--parse-kind", choices=["amr", "srl"], default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("index", help="embed graph nodes into a vector index")
    p.add_argument("--graph", default=None)
    p.add_argument("--scheme", choices=list(embed_index.SCHEMES), default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--out", default=None)
    _add_embedder_options(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="retrieve grounded context (and answer unless --no-llm)")
    p.add_argument("--graph", default=None)
    p.add_argument("--index", default=None)
    p.add_argument("--question", required=True)
    p.add_argument("--query-bundle", default=None,
                   help="parse bundle for the question itself")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--top-k-texts", type=int, default=None)
    p.add_argument("--ret-count-min", type=int, default=None)
    p.add_argument("--max-context", type=int, default=None)
    p.add_argument("--no-llm", action="store_true")
    p.add_argument("--llm-base-url", default=None)
    p.add_argument("--llm-model", default=None)
    p.add_argument("--trace", default=None, help="write the retrieval trace JSON here")
    _add_embedder_options(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="score a results file")
    p.add_argument("--results", default=None)
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-graph", help="reload and re-export a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_graph)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except GroundedKgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
