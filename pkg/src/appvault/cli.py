"""Command-line front end.

Store-producing commands (ingest, build, synthgen) operate on a local store
directory. Read commands (query, neighbors, facts, stats) run against a
local store by default or, with --url, act as a thin client of a running
service; output is the same canonical JSON either way.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .attributes import DEFAULT_STOPLIST, load_stoplist
from .canon import canonical_bytes
from .facts import (
    find_piggybacked,
    find_update_attacks,
    localize_malicious_code,
    market_replication,
)
from .graph import BuildConfig, EntityKind, Graph, build_graph, is_store
from .query import evaluate, query_from_params
from .records import CorpusError, parse_corpus, write_corpus
from .service.app import STORE_ENV_VAR
from .similarity import PROBABILISTIC_KINDS
from .stats import DIMENSIONS, distribution
from .synthgen import Profile, generate, write_outputs


def _emit(obj) -> None:
    sys.stdout.write(canonical_bytes(obj).decode("utf-8") + "\n")


def _emit_lines(objs) -> None:
    for obj in objs:
        _emit(obj)


def _store_path(args) -> Path:
    store = args.store or os.environ.get(STORE_ENV_VAR)
    if not store:
        raise SystemExit(f"error: no store given (use --store or {STORE_ENV_VAR})")
    return Path(store)


def _load_graph(args) -> Graph:
    store = _store_path(args)
    if not is_store(store):
        raise SystemExit(f"error: {store} does not hold a built graph (run `appvault build`)")
    return Graph.load(store)


def _http_get(url: str, path: str, params: dict) -> None:
    import httpx

    params = {k: v for k, v in params.items() if v is not None}
    response = httpx.get(url.rstrip("/") + path, params=params, timeout=60.0)
    if response.status_code != 200:
        raise SystemExit(f"error: {response.status_code} {response.text}")
    sys.stdout.write(response.text + "\n")


def cmd_ingest(args) -> None:
    records = parse_corpus(args.file)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    merged = {}
    existing = out / "corpus.ndjson"
    if existing.exists():
        merged = {r.sha256: r for r in parse_corpus(existing)}
    for r in records:
        if r.sha256 in merged:
            raise SystemExit(f"error: duplicate sha256 {r.sha256} already in store")
        merged[r.sha256] = r
    write_corpus(merged.values(), existing)
    _emit({"ingested": len(records), "record_count": len(merged), "store": str(out)})


def cmd_build(args) -> None:
    store = _store_path(args)
    corpus_file = store / "corpus.ndjson"
    if not corpus_file.exists():
        raise SystemExit(f"error: {corpus_file} not found (run `appvault ingest` first)")
    stoplist = load_stoplist(args.family_stoplist) if args.family_stoplist else DEFAULT_STOPLIST
    kinds = (
        frozenset(PROBABILISTIC_KINDS)
        if not args.kinds
        else frozenset(k for k in args.kinds.split(",") if k)
    )
    config = BuildConfig(
        tau_m=args.tau_m,
        theta=args.theta,
        blocking=not args.exhaustive,
        enabled_kinds=kinds,
        stoplist=stoplist,
    )
    graph = build_graph(parse_corpus(corpus_file), config)
    graph.save(store)
    _emit(graph.manifest.to_dict())


def cmd_synthgen(args) -> None:
    profile = Profile.from_file(args.profile) if args.profile else Profile()
    records, truth = generate(args.seed, profile)
    corpus_path, truth_path = write_outputs(records, truth, args.out)
    _emit(
        {
            "apps": len(records),
            "corpus": str(corpus_path),
            "ground_truth": str(truth_path),
            "seed": args.seed,
        }
    )


def cmd_status(args) -> None:
    if args.url:
        _http_get(args.url, "/health", {})
        return
    g = _load_graph(args)
    _emit(dict(g.manifest.to_dict(), status="ok"))


def cmd_app(args) -> None:
    if args.url:
        _http_get(args.url, f"/apps/{args.sha256}", {})
        return
    g = _load_graph(args)
    record = g.records.get(args.sha256)
    if record is None:
        raise SystemExit(f"error: unknown app {args.sha256}")
    _emit(record.to_dict())


def cmd_query(args) -> None:
    if args.url:
        _http_get(
            args.url,
            "/apps",
            {"filter": args.filter, "kind": args.kind, "limit": args.limit, "offset": args.offset},
        )
        return
    g = _load_graph(args)
    q = query_from_params(args.filter, args.kind, args.limit, args.offset)
    for entity_id in evaluate(g, q):
        sys.stdout.write(entity_id + "\n")


def cmd_neighbors(args) -> None:
    params = {
        "id": args.id,
        "kind": args.kind,
        "depth": args.depth,
    }
    if args.rel:
        params["rel"] = args.rel
    if args.min_prob is not None:
        params["min_prob"] = args.min_prob
    if args.url:
        _http_get(args.url, "/graph/neighbors", params)
        return
    g = _load_graph(args)
    rel_filter = None if not args.rel else [r for r in args.rel.split(",") if r]
    subgraph = g.neighbors(
        args.id,
        kind=EntityKind(args.kind),
        rel_filter=rel_filter,
        min_prob=args.min_prob,
        depth=args.depth,
    )
    _emit(subgraph.to_node_link())


def cmd_facts(args) -> None:
    if args.url:
        if args.what == "piggyback":
            _http_get(args.url, "/facts/piggybacked", {})
        elif args.what == "update-attacks":
            _http_get(args.url, "/facts/update-attacks", {"ignore_cert": args.ignore_cert})
        elif args.what == "markets":
            _http_get(args.url, "/facts/markets", {})
        else:
            if not args.family:
                raise SystemExit("error: localize needs --family")
            _http_get(
                args.url,
                f"/facts/families/{args.family}/signatures",
                {"sigma": args.sigma, "beta": args.beta},
            )
        return

    g = _load_graph(args)
    if args.what == "piggyback":
        _emit_lines(f.to_dict() for f in find_piggybacked(g))
    elif args.what == "update-attacks":
        _emit_lines(f.to_dict() for f in find_update_attacks(g, ignore_cert=args.ignore_cert))
    elif args.what == "markets":
        _emit_lines(f.to_dict() for f in market_replication(g))
    else:
        if not args.family:
            raise SystemExit("error: localize needs --family")
        signature = localize_malicious_code(g, args.family, sigma=args.sigma, beta=args.beta)
        _emit(signature.to_dict())


def cmd_stats(args) -> None:
    if args.url:
        _http_get(args.url, f"/stats/{args.dimension}", {})
        return
    g = _load_graph(args)
    report = distribution(g, args.dimension)
    if args.csv:
        sys.stdout.write(report.to_csv())
    else:
        _emit(report.to_dict())


def cmd_serve(args) -> None:
    from .service.app import serve

    store = _store_path(args)
    serve(store, bind=args.bind, ui_dir=args.ui)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="appvault", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_store(p):
        p.add_argument("--store", help=f"store directory (default: ${STORE_ENV_VAR})")

    def add_url(p):
        p.add_argument("--url", help="query a running service instead of a local store")

    p = sub.add_parser("ingest", help="validate a corpus file and merge it into a store")
    p.add_argument("file")
    p.add_argument("--out", required=True, help="store directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build", help="build the knowledge graph from the store corpus")
    add_store(p)
    p.add_argument("--theta", type=float, default=0.9, help="similarity retention threshold")
    p.add_argument("--tau-m", type=float, default=0.01, dest="tau_m", help="centroid match threshold")
    p.add_argument("--exhaustive", action="store_true", help="disable candidate-pair blocking")
    p.add_argument("--kinds", help="comma list of enabled similarity kinds")
    p.add_argument("--family-stoplist", help="file with one generic label token per line")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("synthgen", help="generate a synthetic corpus with ground truth")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--profile", help="JSON profile file (defaults to the standard profile)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synthgen)

    p = sub.add_parser("status", help="echo the build manifest")
    add_store(p)
    add_url(p)
    p.set_defaults(func=cmd_status)

    p = sub.add_parser("app", help="print one app record")
    p.add_argument("sha256")
    add_store(p)
    add_url(p)
    p.set_defaults(func=cmd_app)

    p = sub.add_parser("query", help="evaluate a conjunctive filter query")
    p.add_argument("filter", nargs="?", default="")
    p.add_argument("--kind", default="APP")
    p.add_argument("--limit", type=int)
    p.add_argument("--offset", type=int, default=0)
    add_store(p)
    add_url(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("neighbors", help="bounded neighborhood of an entity")
    p.add_argument("--id", required=True)
    p.add_argument("--kind", default="APP")
    p.add_argument("--rel", help="comma list of relationship names")
    p.add_argument("--min-prob", type=float, dest="min_prob")
    p.add_argument("--depth", type=int, default=1)
    add_store(p)
    add_url(p)
    p.set_defaults(func=cmd_neighbors)

    p = sub.add_parser("facts", help="extract facts from the graph")
    p.add_argument("what", choices=("piggyback", "update-attacks", "markets", "localize"))
    p.add_argument("--family", help="family name for localize")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--ignore-cert", action="store_true", dest="ignore_cert")
    add_store(p)
    add_url(p)
    p.set_defaults(func=cmd_facts)

    p = sub.add_parser("stats", help="distribution reports")
    p.add_argument("dimension", choices=DIMENSIONS)
    p.add_argument("--csv", action="store_true")
    add_store(p)
    add_url(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--bind", default="127.0.0.1:8000")
    p.add_argument("--ui", help="directory with the built explorer UI")
    add_store(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except BrokenPipeError:
        sys.stderr.close()
        return 0
    except CorpusError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (ValueError, LookupError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
