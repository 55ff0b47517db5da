"""Store state behind the service: a read-mostly immutable graph snapshot
with atomic swap on rebuild.

Readers grab the current snapshot reference and keep using it for the whole
request; ingest/build run serialized behind an admin lock and publish a new
snapshot in a single assignment, so in-flight readers finish on the old
graph and never observe partial state.
"""

from __future__ import annotations

import io
import threading
from pathlib import Path

from ..graph import BuildConfig, Graph, build_graph, is_store
from ..records import AppRecord, CorpusError, parse_corpus, parse_record_line, write_corpus


class StoreState:
    def __init__(self, store_dir: str | Path):
        self.store_dir = Path(store_dir)
        if not self.store_dir.is_dir():
            raise FileNotFoundError(f"store directory not found: {self.store_dir}")
        self._admin = threading.Lock()
        if is_store(self.store_dir):
            self._graph = Graph.load(self.store_dir)
        else:
            # Unbuilt store: serve an in-memory build of whatever corpus is
            # present (possibly empty) without writing anything.
            self._graph = build_graph(self._read_corpus(), BuildConfig())

    @property
    def graph(self) -> Graph:
        return self._graph

    def _corpus_path(self) -> Path:
        return self.store_dir / "corpus.ndjson"

    def _read_corpus(self) -> list[AppRecord]:
        path = self._corpus_path()
        if not path.exists():
            return []
        return parse_corpus(path)

    def ingest(self, body: str) -> tuple[int, int]:
        """Merge corpus lines into the store; returns (ingested, total).
        Does not touch the served graph until the next build."""
        with self._admin:
            existing = {r.sha256: r for r in self._read_corpus()}
            added = 0
            for lineno, line in enumerate(io.StringIO(body), start=1):
                if not line.strip():
                    continue
                record = parse_record_line(line, lineno)
                if record.sha256 in existing:
                    raise CorpusError(
                        f"duplicate sha256 {record.sha256} already in store",
                        line=lineno,
                        fld="sha256",
                    )
                existing[record.sha256] = record
                added += 1
            write_corpus(existing.values(), self._corpus_path())
            return added, len(existing)

    def build(self, config: BuildConfig) -> Graph:
        """Rebuild from the store corpus, persist, and atomically swap."""
        with self._admin:
            graph = build_graph(self._read_corpus(), config)
            graph.save(self.store_dir)
            self._graph = graph
            return graph
