"""The knowledge graph: entities, typed relationships, construction,
persistence, and bounded traversal.

Entities are apps (identified by sha256), markets, malware families, authors
(certificate fingerprints), third-party libraries, and categories.
Deterministic relationships are asserted from identical attributes and carry
no probability; probabilistic relationships carry a similarity score and are
retained only at or above the threshold theta. Symmetric similarity edges are
stored once with src < dst; traversal treats every edge as bidirectional.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .attributes import DEFAULT_STOPLIST, centroids_of, normalize_family
from .canon import canonical_line, digest_lines
from .records import AppRecord, CorpusError, canonical_serialize, parse_corpus, write_corpus
from .similarity import (
    APP_SIM_KINDS,
    DEFAULT_TAU_M,
    JACCARD_KINDS,
    PROBABILISTIC_KINDS,
    _jaccard_sets,
    jaccard,
    matched_weight_similarity,
)


class EntityKind(str, Enum):
    APP = "APP"
    MARKET = "MARKET"
    FAMILY = "FAMILY"
    AUTHOR = "AUTHOR"
    LIBRARY = "LIBRARY"
    CATEGORY = "CATEGORY"


DETERMINISTIC_RELS = ("author", "category", "invoke", "library", "malware", "market", "upgrade")
RELATION_KINDS = tuple(sorted(DETERMINISTIC_RELS + PROBABILISTIC_KINDS))

DEFAULT_THETA = 0.9


class UnknownEntityError(LookupError):
    def __init__(self, kind: "EntityKind", entity_id: str):
        self.kind = kind
        self.entity_id = entity_id
        super().__init__(f"unknown entity ({kind.value}, {entity_id!r})")


@dataclass(frozen=True)
class Entity:
    kind: EntityKind
    id: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.kind.value, self.id)

    def to_dict(self) -> dict[str, str]:
        return {"id": self.id, "kind": self.kind.value}


@dataclass(frozen=True)
class Edge:
    rel: str
    src_kind: EntityKind
    src_id: str
    dst_kind: EntityKind
    dst_id: str
    prob: float | None = None

    def __post_init__(self):
        if self.rel not in RELATION_KINDS:
            raise ValueError(f"unknown relationship {self.rel!r}")
        if self.rel in DETERMINISTIC_RELS:
            if self.prob is not None:
                raise ValueError(f"deterministic relationship {self.rel!r} cannot carry a probability")
        else:
            if self.prob is None:
                raise ValueError(f"probabilistic relationship {self.rel!r} requires a probability")
            if not 0.0 < self.prob <= 1.0:
                raise ValueError(f"probability {self.prob} outside (0, 1]")

    @property
    def src(self) -> tuple[str, str]:
        return (self.src_kind.value, self.src_id)

    @property
    def dst(self) -> tuple[str, str]:
        return (self.dst_kind.value, self.dst_id)

    def sort_key(self):
        return (self.rel, self.src_kind.value, self.src_id, self.dst_kind.value, self.dst_id)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "rel": self.rel,
            "src": self.src_id,
            "src_kind": self.src_kind.value,
            "dst": self.dst_id,
            "dst_kind": self.dst_kind.value,
        }
        if self.prob is not None:
            out["prob"] = self.prob
        return out

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Edge":
        return cls(
            rel=d["rel"],
            src_kind=EntityKind(d["src_kind"]),
            src_id=d["src"],
            dst_kind=EntityKind(d["dst_kind"]),
            dst_id=d["dst"],
            prob=d.get("prob"),
        )


@dataclass(frozen=True)
class BuildConfig:
    tau_m: float = DEFAULT_TAU_M
    theta: float = DEFAULT_THETA
    blocking: bool = True
    enabled_kinds: frozenset[str] = frozenset(PROBABILISTIC_KINDS)
    stoplist: frozenset[str] = DEFAULT_STOPLIST

    def __post_init__(self):
        if self.tau_m <= 0:
            raise ValueError("tau_m must be > 0")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must be in (0, 1]")
        unknown = self.enabled_kinds - set(PROBABILISTIC_KINDS)
        if unknown:
            raise ValueError(f"unknown similarity kinds: {sorted(unknown)}")


@dataclass(frozen=True)
class Manifest:
    theta: float
    tau_m: float
    blocking: bool
    enabled_kinds: tuple[str, ...]
    stoplist: tuple[str, ...]
    corpus_digest: str
    record_count: int
    built_at: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "theta": self.theta,
            "tau_m": self.tau_m,
            "blocking": self.blocking,
            "enabled_kinds": list(self.enabled_kinds),
            "stoplist": list(self.stoplist),
            "corpus_digest": self.corpus_digest,
            "record_count": self.record_count,
            "built_at": self.built_at,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Manifest":
        return cls(
            theta=d["theta"],
            tau_m=d["tau_m"],
            blocking=d["blocking"],
            enabled_kinds=tuple(d["enabled_kinds"]),
            stoplist=tuple(d["stoplist"]),
            corpus_digest=d["corpus_digest"],
            record_count=d["record_count"],
            built_at=d["built_at"],
        )


@dataclass(frozen=True)
class Subgraph:
    nodes: tuple[Entity, ...]
    edges: tuple[Edge, ...]

    def to_node_link(self) -> dict[str, Any]:
        return {
            "nodes": [n.to_dict() for n in self.nodes],
            "edges": [e.to_dict() for e in self.edges],
        }


def corpus_digest_of(records: Iterable[AppRecord]) -> str:
    ordered = sorted(records, key=lambda r: r.sha256)
    return digest_lines(canonical_serialize(r) + b"\n" for r in ordered)


class Graph:
    """Immutable after construction; unlimited concurrent readers."""

    def __init__(
        self,
        records: Mapping[str, AppRecord],
        entities: Iterable[Entity],
        edges: Iterable[Edge],
        manifest: Manifest,
    ):
        self.records: dict[str, AppRecord] = dict(records)
        self.entities: dict[tuple[str, str], Entity] = {e.key: e for e in entities}
        self.edges: tuple[Edge, ...] = tuple(sorted(set(edges), key=Edge.sort_key))
        self.manifest = manifest
        for e in self.edges:
            if e.src not in self.entities or e.dst not in self.entities:
                raise ValueError(f"edge {e.to_dict()} references a missing entity")
            if e.prob is not None and e.prob < manifest.theta:
                raise ValueError(
                    f"edge {e.to_dict()} carries prob below the retention threshold {manifest.theta}"
                )
        self._adjacency: dict[tuple[str, str], list[Edge]] | None = None
        self._families: dict[str, list[str]] | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.records == other.records
            and self.entities == other.entities
            and self.edges == other.edges
            and self.manifest == other.manifest
        )

    def entity(self, kind: EntityKind, entity_id: str) -> Entity:
        try:
            return self.entities[(kind.value, entity_id)]
        except KeyError:
            raise UnknownEntityError(kind, entity_id) from None

    def record_of(self, entity: Entity) -> AppRecord | None:
        """Attributes of an APP entity; name-only kinds have none."""
        if entity.kind is EntityKind.APP:
            return self.records[entity.id]
        return None

    def entities_of_kind(self, kind: EntityKind) -> list[Entity]:
        return sorted(
            (e for e in self.entities.values() if e.kind is kind), key=lambda e: e.id
        )

    def edges_of_kind(self, rel: str) -> list[Edge]:
        return [e for e in self.edges if e.rel == rel]

    @property
    def adjacency(self) -> dict[tuple[str, str], list[Edge]]:
        if self._adjacency is None:
            adj: dict[tuple[str, str], list[Edge]] = {k: [] for k in self.entities}
            for e in self.edges:
                adj[e.src].append(e)
                if e.dst != e.src:
                    adj[e.dst].append(e)
            self._adjacency = adj
        return self._adjacency

    def families(self) -> dict[str, list[str]]:
        """Family name -> member app sha256s, from malware edges."""
        if self._families is None:
            fams: dict[str, list[str]] = {}
            for e in self.edges_of_kind("malware"):
                fams.setdefault(e.dst_id, []).append(e.src_id)
            for members in fams.values():
                members.sort()
            self._families = fams
        return self._families

    def market_members(self) -> dict[str, frozenset[str]]:
        """Market name -> hosted app sha256s (multi-market aware)."""
        members: dict[str, set[str]] = {
            e.id: set() for e in self.entities.values() if e.kind is EntityKind.MARKET
        }
        for sha, record in self.records.items():
            for market in record.hosting_markets:
                members[market].add(sha)
        return {name: frozenset(shas) for name, shas in members.items()}

    def code_sim_value(self, sha_a: str, sha_b: str) -> float | None:
        lo, hi = sorted((sha_a, sha_b))
        for e in self.edges_of_kind("code_sim"):
            if e.src_id == lo and e.dst_id == hi:
                return e.prob
        return None

    # -- traversal ---------------------------------------------------------

    def neighbors(
        self,
        entity_id: str,
        kind: EntityKind = EntityKind.APP,
        rel_filter: Iterable[str] | None = None,
        min_prob: float | None = None,
        depth: int = 1,
    ) -> Subgraph:
        """Breadth-first bounded subgraph around an entity.

        Edges are traversable in both directions. `rel_filter` keeps only the
        named relationships; `min_prob` drops probabilistic edges below it
        (deterministic edges are unaffected). The result is the subgraph
        induced by the visited nodes over the passing edges.
        """
        if not 1 <= depth <= 3:
            raise ValueError("depth must be a positive integer <= 3")
        rels = None if rel_filter is None else set(rel_filter)
        if rels is not None:
            unknown = rels - set(RELATION_KINDS)
            if unknown:
                raise ValueError(f"unknown relationships: {sorted(unknown)}")
        start = self.entity(kind, entity_id)

        def passes(e: Edge) -> bool:
            if rels is not None and e.rel not in rels:
                return False
            if min_prob is not None and e.prob is not None and e.prob < min_prob:
                return False
            return True

        visited = {start.key}
        frontier = [start.key]
        for _ in range(depth):
            nxt = []
            for key in frontier:
                for e in self.adjacency[key]:
                    if not passes(e):
                        continue
                    other = e.dst if e.src == key else e.src
                    if other not in visited:
                        visited.add(other)
                        nxt.append(other)
            frontier = nxt

        nodes = sorted((self.entities[k] for k in visited), key=lambda n: (n.kind.value, n.id))
        edges = sorted(
            (e for e in self.edges if passes(e) and e.src in visited and e.dst in visited),
            key=lambda e: (e.rel, e.dst_id, e.src_id, e.dst_kind.value, e.src_kind.value),
        )
        return Subgraph(nodes=tuple(nodes), edges=tuple(edges))

    # -- persistence -------------------------------------------------------

    def save(self, store_dir: str | Path) -> None:
        """Write corpus, entities, edges, and manifest as canonical files.
        Saving the same graph twice produces byte-identical directories."""
        store = Path(store_dir)
        store.mkdir(parents=True, exist_ok=True)
        write_corpus(self.records.values(), store / "corpus.ndjson")
        with open(store / "entities.ndjson", "wb") as fh:
            for key in sorted(self.entities):
                fh.write(canonical_line(self.entities[key].to_dict()))
        with open(store / "edges.ndjson", "wb") as fh:
            for e in self.edges:
                fh.write(canonical_line(e.to_dict()))
        with open(store / "manifest.json", "wb") as fh:
            fh.write(canonical_line(self.manifest.to_dict()))

    @classmethod
    def load(cls, store_dir: str | Path) -> "Graph":
        import json

        store = Path(store_dir)
        try:
            manifest = Manifest.from_dict(json.loads((store / "manifest.json").read_text("utf-8")))
        except (KeyError, json.JSONDecodeError) as exc:
            raise CorpusError(f"corrupt manifest.json: {exc}") from None
        records = {r.sha256: r for r in parse_corpus(store / "corpus.ndjson")}

        entities = []
        with open(store / "entities.ndjson", "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    entities.append(Entity(kind=EntityKind(obj["kind"]), id=obj["id"]))
                except (KeyError, ValueError) as exc:
                    raise CorpusError(f"corrupt entity: {exc}", line=lineno) from None

        edges = []
        with open(store / "edges.ndjson", "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    edges.append(Edge.from_dict(json.loads(line)))
                except (KeyError, ValueError) as exc:
                    raise CorpusError(f"corrupt edge: {exc}", line=lineno) from None

        try:
            return cls(records, entities, edges, manifest)
        except ValueError as exc:
            raise CorpusError(str(exc)) from None


def is_store(store_dir: str | Path) -> bool:
    store = Path(store_dir)
    return all(
        (store / name).exists()
        for name in ("corpus.ndjson", "entities.ndjson", "edges.ndjson", "manifest.json")
    )


# -- construction ------------------------------------------------------------


def _candidate_pairs(records: Sequence[AppRecord], blocking: bool) -> list[tuple[str, str]]:
    """Unordered app pairs to score. With blocking, only pairs sharing a
    package name, a library, or a hosting market are considered."""
    if not blocking:
        shas = sorted(r.sha256 for r in records)
        return list(itertools.combinations(shas, 2))

    buckets: dict[tuple[str, str], list[str]] = {}
    for r in records:
        buckets.setdefault(("pkg", r.package_name), []).append(r.sha256)
        for lib in r.libraries:
            buckets.setdefault(("lib", lib), []).append(r.sha256)
        for market in r.hosting_markets:
            buckets.setdefault(("mkt", market), []).append(r.sha256)

    pairs: set[tuple[str, str]] = set()
    for members in buckets.values():
        members.sort()
        pairs.update(itertools.combinations(members, 2))
    return sorted(pairs)


def build_graph(corpus: Sequence[AppRecord], config: BuildConfig = BuildConfig()) -> Graph:
    """Build the full graph for a corpus: one APP entity per record, one
    entity per distinct market/family/author/library/category, deterministic
    edges from identical attributes, and probabilistic edges retained at
    prob >= theta."""
    records: dict[str, AppRecord] = {}
    for r in corpus:
        if r.sha256 in records:
            raise ValueError(f"duplicate sha256 in corpus: {r.sha256}")
        records[r.sha256] = r

    entities: dict[tuple[str, str], Entity] = {}

    def add_entity(kind: EntityKind, entity_id: str) -> None:
        entities.setdefault((kind.value, entity_id), Entity(kind, entity_id))

    family_of: dict[str, str] = {}
    for sha, r in records.items():
        add_entity(EntityKind.APP, sha)
        for market in r.hosting_markets:
            add_entity(EntityKind.MARKET, market)
        add_entity(EntityKind.AUTHOR, r.certificate.fingerprint)
        for lib in r.libraries:
            add_entity(EntityKind.LIBRARY, lib)
        if r.crawl is not None:
            add_entity(EntityKind.CATEGORY, r.crawl.category)
        label = normalize_family(r.detections, config.stoplist)
        if label.is_labeled:
            family_of[sha] = label.name
            add_entity(EntityKind.FAMILY, label.name)

    edges: list[Edge] = []

    def det(rel: str, src: tuple[EntityKind, str], dst: tuple[EntityKind, str]) -> None:
        edges.append(Edge(rel, src[0], src[1], dst[0], dst[1]))

    for sha in sorted(records):
        r = records[sha]
        det("market", (EntityKind.APP, sha), (EntityKind.MARKET, r.market))
        det("author", (EntityKind.APP, sha), (EntityKind.AUTHOR, r.certificate.fingerprint))
        for lib in sorted(r.libraries):
            det("library", (EntityKind.APP, sha), (EntityKind.LIBRARY, lib))
        if r.crawl is not None:
            det("category", (EntityKind.APP, sha), (EntityKind.CATEGORY, r.crawl.category))
        if sha in family_of:
            det("malware", (EntityKind.APP, sha), (EntityKind.FAMILY, family_of[sha]))

    # upgrade: same package and certificate, strictly increasing version code
    lineages: dict[tuple[str, str], list[AppRecord]] = {}
    for r in records.values():
        lineages.setdefault((r.package_name, r.certificate.fingerprint), []).append(r)
    for group in lineages.values():
        group.sort(key=lambda r: (r.version_code, r.sha256))
        for a, b in itertools.combinations(group, 2):
            if a.version_code < b.version_code:
                det("upgrade", (EntityKind.APP, a.sha256), (EntityKind.APP, b.sha256))

    # invoke: src names dst's package among its outgoing invocation targets
    by_package: dict[str, list[str]] = {}
    for sha, r in records.items():
        by_package.setdefault(r.package_name, []).append(sha)
    for sha in sorted(records):
        r = records[sha]
        for pkg in sorted(r.invoked_packages):
            for dst_sha in sorted(by_package.get(pkg, ())):
                if dst_sha != sha:
                    det("invoke", (EntityKind.APP, sha), (EntityKind.APP, dst_sha))

    # probabilistic edges between apps, canonical src < dst, retained at >= theta
    app_kinds = sorted(set(APP_SIM_KINDS) & config.enabled_kinds)
    if app_kinds:
        jaccard_kinds = [k for k in app_kinds if k in JACCARD_KINDS]
        want_code = "code_sim" in app_kinds
        centroid_cache = (
            {sha: centroids_of(r) for sha, r in records.items()} if want_code else {}
        )
        for lo, hi in _candidate_pairs(list(records.values()), config.blocking):
            ra, rb = records[lo], records[hi]
            for kind in jaccard_kinds:
                value = jaccard(_jaccard_sets(ra, kind), _jaccard_sets(rb, kind))
                if value >= config.theta and value > 0.0:
                    edges.append(Edge(kind, EntityKind.APP, lo, EntityKind.APP, hi, prob=value))
            if want_code:
                value = matched_weight_similarity(
                    centroid_cache[lo], centroid_cache[hi], config.tau_m
                )
                if value >= config.theta and value > 0.0:
                    edges.append(Edge("code_sim", EntityKind.APP, lo, EntityKind.APP, hi, prob=value))

    if "mark_sim" in config.enabled_kinds:
        members: dict[str, set[str]] = {
            key[1]: set() for key in entities if key[0] == EntityKind.MARKET.value
        }
        for sha, r in records.items():
            for market in r.hosting_markets:
                members[market].add(sha)
        for m1, m2 in itertools.combinations(sorted(members), 2):
            value = jaccard(members[m1], members[m2])
            if value >= config.theta and value > 0.0:
                edges.append(Edge("mark_sim", EntityKind.MARKET, m1, EntityKind.MARKET, m2, prob=value))

    manifest = Manifest(
        theta=config.theta,
        tau_m=config.tau_m,
        blocking=config.blocking,
        enabled_kinds=tuple(sorted(config.enabled_kinds)),
        stoplist=tuple(sorted(config.stoplist)),
        corpus_digest=corpus_digest_of(records.values()),
        record_count=len(records),
        built_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    return Graph(records, entities.values(), edges, manifest)
