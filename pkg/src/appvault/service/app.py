"""HTTP API over a graph store.

Every endpoint is a pure view: the body is the canonical serialization of
the corresponding library call, so repeated GETs against a fixed store are
byte-identical. Reads hit the current immutable snapshot; POST /ingest and
POST /build are serialized behind an admin lane and swap snapshots
atomically.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Query, Request, Response

from ..attributes import DEFAULT_STOPLIST
from ..canon import canonical_bytes
from ..facts import (
    find_piggybacked,
    find_update_attacks,
    localize_malicious_code,
    market_replication,
)
from ..graph import BuildConfig, EntityKind, UnknownEntityError
from ..query import QueryError, evaluate, query_from_params
from ..records import CorpusError
from ..similarity import PROBABILISTIC_KINDS
from ..stats import DIMENSIONS, distribution
from . import schemas
from .state import StoreState

STORE_ENV_VAR = "APPVAULT_STORE"


class CanonicalJSONResponse(Response):
    media_type = "application/json"

    def render(self, content: Any) -> bytes:
        return canonical_bytes(content)


def create_app(store_dir: str | Path | None = None, ui_dir: str | Path | None = None) -> FastAPI:
    if store_dir is None:
        store_dir = os.environ.get(STORE_ENV_VAR)
    if store_dir is None:
        raise ValueError(f"no store directory given and {STORE_ENV_VAR} is not set")
    state = StoreState(store_dir)

    app = FastAPI(title="appvault", default_response_class=CanonicalJSONResponse)
    app.state.store = state

    @app.exception_handler(UnknownEntityError)
    async def _unknown_entity(_request: Request, exc: UnknownEntityError):
        return CanonicalJSONResponse({"detail": str(exc)}, status_code=404)

    @app.exception_handler(QueryError)
    async def _bad_query(_request: Request, exc: QueryError):
        return CanonicalJSONResponse({"detail": str(exc)}, status_code=400)

    @app.exception_handler(CorpusError)
    async def _bad_corpus(_request: Request, exc: CorpusError):
        return CanonicalJSONResponse({"detail": str(exc)}, status_code=400)

    @app.get("/health", response_model=schemas.HealthModel)
    def health():
        return dict(state.graph.manifest.to_dict(), status="ok")

    @app.get(
        "/apps/{sha256}",
        response_model=schemas.AppRecordModel,
        response_model_exclude_none=True,
    )
    def get_app(sha256: str):
        record = state.graph.records.get(sha256)
        if record is None:
            raise UnknownEntityError(EntityKind.APP, sha256)
        return record.to_dict()

    @app.get("/apps", response_model=list[str])
    def query_apps(
        filter: str = "",
        kind: str = "APP",
        limit: int | None = Query(default=None, ge=1),
        offset: int = Query(default=0, ge=0),
    ):
        q = query_from_params(filter, kind, limit, offset)
        return evaluate(state.graph, q)

    @app.get(
        "/graph/neighbors",
        response_model=schemas.SubgraphModel,
        response_model_exclude_none=True,
    )
    def neighbors(
        id: str,
        kind: str = "APP",
        rel: str | None = None,
        min_prob: float | None = Query(default=None, ge=0.0, le=1.0),
        depth: int = Query(default=1, ge=1, le=3),
    ):
        try:
            entity_kind = EntityKind(kind)
        except ValueError:
            raise QueryError(f"unknown entity kind {kind!r}") from None
        rel_filter = None if rel is None else [r for r in rel.split(",") if r]
        try:
            subgraph = state.graph.neighbors(
                id, kind=entity_kind, rel_filter=rel_filter, min_prob=min_prob, depth=depth
            )
        except ValueError as exc:
            raise QueryError(str(exc)) from None
        return subgraph.to_node_link()

    @app.get(
        "/facts/piggybacked",
        response_model=list[schemas.PiggybackModel],
        response_model_exclude_none=True,
    )
    def piggybacked():
        return [f.to_dict() for f in find_piggybacked(state.graph)]

    @app.get(
        "/facts/update-attacks",
        response_model=list[schemas.UpdateAttackModel],
        response_model_exclude_none=True,
    )
    def update_attacks(ignore_cert: bool = False):
        return [f.to_dict() for f in find_update_attacks(state.graph, ignore_cert=ignore_cert)]

    @app.get("/facts/markets", response_model=list[schemas.MarketReplicationModel])
    def markets():
        return [f.to_dict() for f in market_replication(state.graph)]

    @app.get(
        "/facts/families/{name}/signatures",
        response_model=schemas.FamilySignatureModel,
    )
    def family_signatures(
        name: str,
        sigma: float = Query(default=0.5, gt=0.0, le=1.0),
        beta: float = Query(default=0.01, ge=0.0, lt=1.0),
    ):
        return localize_malicious_code(state.graph, name, sigma=sigma, beta=beta).to_dict()

    @app.get("/stats/{dimension}", response_model=schemas.DistributionModel)
    def stats(dimension: str):
        if dimension not in DIMENSIONS:
            raise HTTPException(status_code=404, detail=f"unknown dimension {dimension!r}")
        return distribution(state.graph, dimension).to_dict()

    @app.post("/ingest", response_model=schemas.IngestResultModel)
    async def ingest(request: Request):
        body = (await request.body()).decode("utf-8")
        ingested, total = state.ingest(body)
        return {"ingested": ingested, "record_count": total}

    @app.post("/build", response_model=schemas.ManifestModel)
    def build(
        theta: float = Query(default=0.9, gt=0.0, le=1.0),
        tau_m: float = Query(default=0.01, gt=0.0),
        blocking: bool = True,
        kinds: str | None = None,
    ):
        enabled = (
            frozenset(PROBABILISTIC_KINDS)
            if kinds is None
            else frozenset(k for k in kinds.split(",") if k)
        )
        try:
            config = BuildConfig(
                tau_m=tau_m, theta=theta, blocking=blocking,
                enabled_kinds=enabled, stoplist=DEFAULT_STOPLIST,
            )
        except ValueError as exc:
            raise QueryError(str(exc)) from None
        graph = state.build(config)
        return graph.manifest.to_dict()

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(store_dir: str | Path, bind: str = "127.0.0.1:8000", ui_dir: str | Path | None = None):
    import uvicorn

    host, _, port = bind.rpartition(":")
    app = create_app(store_dir, ui_dir=ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
