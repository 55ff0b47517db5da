"""Corpus record model: schema, validation, parsing, canonical serialization.

A corpus is a UTF-8 file with one JSON object per line. Field names are
snake_case; set-valued fields are encoded as arrays (order irrelevant on
input, sorted ascending on canonical output); dates are "YYYY-MM-DD".
Records are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any, Iterable, Mapping

from .canon import canonical_bytes

SHA256_RE = re.compile(r"^[0-9a-f]{64}$")
HEX_RE = re.compile(r"^[0-9a-f]+$")

CRAWL_FIELDS = (
    "category",
    "description",
    "screenshots",
    "reviews",
    "score",
    "whats_new",
    "updated_date",
    "file_size",
    "install_count",
    "version",
    "required_android_version",
    "price",
    "content_rating",
    "developer",
    "similar_apps",
    "market",
)

_RECORD_FIELDS = {
    "sha256",
    "package_name",
    "app_name",
    "version_code",
    "version_name",
    "certificate",
    "compile_date",
    "min_sdk",
    "max_sdk",
    "target_sdk",
    "components",
    "declared_permissions",
    "requested_permissions",
    "libraries",
    "invoked_apis",
    "strings",
    "invoked_packages",
    "files",
    "methods",
    "detections",
    "crawl",
    "market",
    "markets",
}

_COMPONENT_KINDS = ("activities", "services", "receivers", "providers")


class RecordError(ValueError):
    """A record violates the schema. Carries the offending field name."""

    def __init__(self, fld: str, message: str):
        self.field = fld
        super().__init__(f"field {fld!r}: {message}")


class CorpusError(ValueError):
    """A corpus file cannot be parsed. Carries line number and field."""

    def __init__(self, message: str, line: int | None = None, fld: str | None = None):
        self.line = line
        self.field = fld
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


def _require(cond: bool, fld: str, message: str) -> None:
    if not cond:
        raise RecordError(fld, message)


def _as_int(value: Any, fld: str, minimum: int = 0) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool), fld, "expected an integer")
    _require(value >= minimum, fld, f"must be >= {minimum}")
    return value


def _as_str(value: Any, fld: str) -> str:
    _require(isinstance(value, str), fld, "expected a string")
    return value


def _as_float(value: Any, fld: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), fld, "expected a number")
    return float(value)


def _as_date(value: Any, fld: str) -> date:
    _require(isinstance(value, str), fld, "expected a YYYY-MM-DD string")
    try:
        return date.fromisoformat(value)
    except ValueError as exc:
        raise RecordError(fld, f"invalid date: {exc}") from None


def _as_str_set(value: Any, fld: str) -> frozenset[str]:
    _require(isinstance(value, list), fld, "expected an array of strings")
    for item in value:
        _require(isinstance(item, str), fld, "expected an array of strings")
    _require(len(set(value)) == len(value), fld, "duplicate elements")
    return frozenset(value)


def _as_str_list(value: Any, fld: str) -> tuple[str, ...]:
    _require(isinstance(value, list), fld, "expected an array of strings")
    for item in value:
        _require(isinstance(item, str), fld, "expected an array of strings")
    return tuple(value)


def _as_pair(value: Any, fld: str) -> tuple[str, str]:
    _require(
        isinstance(value, (list, tuple)) and len(value) == 2
        and all(isinstance(v, str) for v in value),
        fld,
        "expected a [string, string] pair",
    )
    return (value[0], value[1])


@dataclass(frozen=True, eq=False)
class CertIdentity:
    """Signing identity of an app. Two identities are equal iff their
    fingerprints are equal; issuer/subject text is informational."""

    fingerprint: str
    issuer: str
    subject: str
    public_key_hash: str

    def __post_init__(self):
        _require(bool(self.fingerprint), "certificate.fingerprint", "must be non-empty")
        _require(
            HEX_RE.match(self.fingerprint) is not None,
            "certificate.fingerprint",
            "must be lowercase hex",
        )
        _require(
            self.public_key_hash == "" or HEX_RE.match(self.public_key_hash) is not None,
            "certificate.public_key_hash",
            "must be lowercase hex",
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CertIdentity):
            return NotImplemented
        return self.fingerprint == other.fingerprint

    def __hash__(self) -> int:
        return hash(self.fingerprint)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CertIdentity":
        _require(isinstance(d, Mapping), "certificate", "expected an object")
        expected = {"fingerprint", "issuer", "subject", "public_key_hash"}
        for k in d:
            _require(k in expected, f"certificate.{k}", "unknown field")
        for k in expected:
            _require(k in d, f"certificate.{k}", "missing field")
        return cls(
            fingerprint=_as_str(d["fingerprint"], "certificate.fingerprint"),
            issuer=_as_str(d["issuer"], "certificate.issuer"),
            subject=_as_str(d["subject"], "certificate.subject"),
            public_key_hash=_as_str(d["public_key_hash"], "certificate.public_key_hash"),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "fingerprint": self.fingerprint,
            "issuer": self.issuer,
            "subject": self.subject,
            "public_key_hash": self.public_key_hash,
        }


@dataclass(frozen=True)
class CrawlInfo:
    """Market-page metadata. Exactly the 16 crawl fields, no more, no less."""

    category: str
    description: str
    screenshots: tuple[str, ...]
    reviews: tuple[str, ...]
    score: float
    whats_new: str
    updated_date: date
    file_size: int
    install_count: int
    version: str
    required_android_version: str
    price: float
    content_rating: str
    developer: str
    similar_apps: frozenset[str]
    market: str

    def __post_init__(self):
        _require(0.0 <= self.score <= 5.0, "crawl.score", "must be in [0, 5]")
        _require(self.price >= 0.0, "crawl.price", "must be >= 0")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CrawlInfo":
        _require(isinstance(d, Mapping), "crawl", "expected an object")
        for k in d:
            _require(k in CRAWL_FIELDS, f"crawl.{k}", "unknown field")
        for k in CRAWL_FIELDS:
            _require(k in d, f"crawl.{k}", "missing field")
        return cls(
            category=_as_str(d["category"], "crawl.category"),
            description=_as_str(d["description"], "crawl.description"),
            screenshots=_as_str_list(d["screenshots"], "crawl.screenshots"),
            reviews=_as_str_list(d["reviews"], "crawl.reviews"),
            score=_as_float(d["score"], "crawl.score"),
            whats_new=_as_str(d["whats_new"], "crawl.whats_new"),
            updated_date=_as_date(d["updated_date"], "crawl.updated_date"),
            file_size=_as_int(d["file_size"], "crawl.file_size"),
            install_count=_as_int(d["install_count"], "crawl.install_count"),
            version=_as_str(d["version"], "crawl.version"),
            required_android_version=_as_str(
                d["required_android_version"], "crawl.required_android_version"
            ),
            price=_as_float(d["price"], "crawl.price"),
            content_rating=_as_str(d["content_rating"], "crawl.content_rating"),
            developer=_as_str(d["developer"], "crawl.developer"),
            similar_apps=_as_str_set(d["similar_apps"], "crawl.similar_apps"),
            market=_as_str(d["market"], "crawl.market"),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "category": self.category,
            "description": self.description,
            "screenshots": list(self.screenshots),
            "reviews": list(self.reviews),
            "score": self.score,
            "whats_new": self.whats_new,
            "updated_date": self.updated_date.isoformat(),
            "file_size": self.file_size,
            "install_count": self.install_count,
            "version": self.version,
            "required_android_version": self.required_android_version,
            "price": self.price,
            "content_rating": self.content_rating,
            "developer": self.developer,
            "similar_apps": sorted(self.similar_apps),
            "market": self.market,
        }


@dataclass(frozen=True)
class Components:
    activities: frozenset[str] = frozenset()
    services: frozenset[str] = frozenset()
    receivers: frozenset[str] = frozenset()
    providers: frozenset[str] = frozenset()

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Components":
        _require(isinstance(d, Mapping), "components", "expected an object")
        for k in d:
            _require(k in _COMPONENT_KINDS, f"components.{k}", "unknown field")
        for k in _COMPONENT_KINDS:
            _require(k in d, f"components.{k}", "missing field")
        return cls(**{k: _as_str_set(d[k], f"components.{k}") for k in _COMPONENT_KINDS})

    def to_dict(self) -> dict[str, Any]:
        return {k: sorted(getattr(self, k)) for k in _COMPONENT_KINDS}


@dataclass(frozen=True)
class MethodCfg:
    """Control-flow graph of one method: basic blocks with statement counts,
    directed edges, and a loop-nesting depth per block.

    Normalized at construction: blocks sorted by block id, edges sorted and
    deduplicated, loop_depth sorted by block id.
    """

    id: str
    blocks: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int], ...]
    loop_depth: tuple[tuple[int, int], ...]

    def __post_init__(self):
        _require(bool(self.id), "methods.id", "must be non-empty")
        _require(len(self.blocks) >= 1, "methods.blocks", "must contain at least one block")
        ids = [b for b, _ in self.blocks]
        _require(len(set(ids)) == len(ids), "methods.blocks", "duplicate block ids")
        for _, count in self.blocks:
            _require(count >= 1, "methods.blocks", "statement_count must be >= 1")
        known = set(ids)
        for a, b in self.edges:
            _require(
                a in known and b in known,
                "methods.edges",
                f"edge ({a}, {b}) references an unknown block",
            )
        _require(len(set(self.edges)) == len(self.edges), "methods.edges", "duplicate edges")
        depth_ids = [b for b, _ in self.loop_depth]
        _require(
            set(depth_ids) == known and len(depth_ids) == len(known),
            "methods.loop_depth",
            "must map every block id exactly once",
        )
        for _, depth in self.loop_depth:
            _require(depth >= 0, "methods.loop_depth", "depth must be >= 0")
        object.__setattr__(self, "blocks", tuple(sorted(self.blocks)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))
        object.__setattr__(self, "loop_depth", tuple(sorted(self.loop_depth)))

    @property
    def block_ids(self) -> tuple[int, ...]:
        return tuple(b for b, _ in self.blocks)

    def depth_of(self) -> dict[int, int]:
        return dict(self.loop_depth)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "MethodCfg":
        _require(isinstance(d, Mapping), "methods", "expected an object")
        expected = {"id", "blocks", "edges", "loop_depth"}
        for k in d:
            _require(k in expected, f"methods.{k}", "unknown field")
        for k in expected:
            _require(k in d, f"methods.{k}", "missing field")

        def int_pairs(value: Any, fld: str) -> tuple[tuple[int, int], ...]:
            _require(isinstance(value, list), fld, "expected an array of [int, int] pairs")
            out = []
            for item in value:
                _require(
                    isinstance(item, (list, tuple)) and len(item) == 2
                    and all(isinstance(v, int) and not isinstance(v, bool) for v in item),
                    fld,
                    "expected [int, int] pairs",
                )
                out.append((item[0], item[1]))
            return tuple(out)

        return cls(
            id=_as_str(d["id"], "methods.id"),
            blocks=int_pairs(d["blocks"], "methods.blocks"),
            edges=int_pairs(d["edges"], "methods.edges"),
            loop_depth=int_pairs(d["loop_depth"], "methods.loop_depth"),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "blocks": [list(b) for b in self.blocks],
            "edges": [list(e) for e in self.edges],
            "loop_depth": [list(p) for p in self.loop_depth],
        }


@dataclass(frozen=True)
class AppRecord:
    """One ingested app with all of its computed attributes.

    Identity is the apk sha256. `market` names the market the record was
    taken from; the optional `markets` set lists every market hosting the
    same file (multi-market mode) and must contain `market`.
    """

    sha256: str
    package_name: str
    app_name: str
    version_code: int
    version_name: str
    certificate: CertIdentity
    compile_date: date
    components: Components
    declared_permissions: frozenset[str]
    requested_permissions: frozenset[str]
    libraries: frozenset[str]
    invoked_apis: frozenset[str]
    strings: frozenset[str]
    invoked_packages: frozenset[str]
    files: frozenset[tuple[str, str]]
    methods: tuple[MethodCfg, ...]
    detections: tuple[tuple[str, str], ...]
    market: str
    min_sdk: int | None = None
    max_sdk: int | None = None
    target_sdk: int | None = None
    crawl: CrawlInfo | None = None
    markets: frozenset[str] | None = None

    def __post_init__(self):
        _require(SHA256_RE.match(self.sha256) is not None, "sha256", "must match ^[0-9a-f]{64}$")
        _require(self.version_code >= 0, "version_code", "must be >= 0")
        _require(bool(self.market), "market", "must be non-empty")
        for path, digest in self.files:
            _require(
                HEX_RE.match(digest) is not None,
                "files",
                f"content hash for {path!r} must be lowercase hex",
            )
        method_ids = [m.id for m in self.methods]
        _require(len(set(method_ids)) == len(method_ids), "methods", "duplicate method ids")
        if self.markets is not None:
            _require(self.market in self.markets, "markets", "must contain the market field")
        object.__setattr__(self, "methods", tuple(sorted(self.methods, key=lambda m: m.id)))
        object.__setattr__(self, "detections", tuple(sorted(self.detections)))

    @property
    def hosting_markets(self) -> frozenset[str]:
        return self.markets if self.markets is not None else frozenset({self.market})

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AppRecord":
        _require(isinstance(d, Mapping), "record", "expected an object")
        for k in d:
            _require(k in _RECORD_FIELDS, k, "unknown field")
        optional = {"min_sdk", "max_sdk", "target_sdk", "crawl", "markets"}
        for k in _RECORD_FIELDS - optional:
            _require(k in d, k, "missing field")

        _require(isinstance(d["files"], list), "files", "expected an array of [path, hash] pairs")
        files = [_as_pair(p, "files") for p in d["files"]]
        _require(len(set(files)) == len(files), "files", "duplicate entries")

        _require(isinstance(d["methods"], list), "methods", "expected an array of objects")
        _require(isinstance(d["detections"], list), "detections", "expected an array of pairs")

        return cls(
            sha256=_as_str(d["sha256"], "sha256"),
            package_name=_as_str(d["package_name"], "package_name"),
            app_name=_as_str(d["app_name"], "app_name"),
            version_code=_as_int(d["version_code"], "version_code"),
            version_name=_as_str(d["version_name"], "version_name"),
            certificate=CertIdentity.from_dict(d["certificate"]),
            compile_date=_as_date(d["compile_date"], "compile_date"),
            min_sdk=None if d.get("min_sdk") is None else _as_int(d["min_sdk"], "min_sdk"),
            max_sdk=None if d.get("max_sdk") is None else _as_int(d["max_sdk"], "max_sdk"),
            target_sdk=None if d.get("target_sdk") is None else _as_int(d["target_sdk"], "target_sdk"),
            components=Components.from_dict(d["components"]),
            declared_permissions=_as_str_set(d["declared_permissions"], "declared_permissions"),
            requested_permissions=_as_str_set(d["requested_permissions"], "requested_permissions"),
            libraries=_as_str_set(d["libraries"], "libraries"),
            invoked_apis=_as_str_set(d["invoked_apis"], "invoked_apis"),
            strings=_as_str_set(d["strings"], "strings"),
            invoked_packages=_as_str_set(d["invoked_packages"], "invoked_packages"),
            files=frozenset(files),
            methods=tuple(MethodCfg.from_dict(m) for m in d["methods"]),
            detections=tuple(_as_pair(p, "detections") for p in d["detections"]),
            crawl=None if d.get("crawl") is None else CrawlInfo.from_dict(d["crawl"]),
            market=_as_str(d["market"], "market"),
            markets=None if d.get("markets") is None else _as_str_set(d["markets"], "markets"),
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "sha256": self.sha256,
            "package_name": self.package_name,
            "app_name": self.app_name,
            "version_code": self.version_code,
            "version_name": self.version_name,
            "certificate": self.certificate.to_dict(),
            "compile_date": self.compile_date.isoformat(),
            "components": self.components.to_dict(),
            "declared_permissions": sorted(self.declared_permissions),
            "requested_permissions": sorted(self.requested_permissions),
            "libraries": sorted(self.libraries),
            "invoked_apis": sorted(self.invoked_apis),
            "strings": sorted(self.strings),
            "invoked_packages": sorted(self.invoked_packages),
            "files": [list(p) for p in sorted(self.files)],
            "methods": [m.to_dict() for m in self.methods],
            "detections": [list(p) for p in self.detections],
            "market": self.market,
        }
        if self.min_sdk is not None:
            out["min_sdk"] = self.min_sdk
        if self.max_sdk is not None:
            out["max_sdk"] = self.max_sdk
        if self.target_sdk is not None:
            out["target_sdk"] = self.target_sdk
        if self.crawl is not None:
            out["crawl"] = self.crawl.to_dict()
        if self.markets is not None:
            out["markets"] = sorted(self.markets)
        return out


def canonical_serialize(record: AppRecord) -> bytes:
    """Deterministic byte encoding of one record (no trailing newline)."""
    return canonical_bytes(record.to_dict())


def parse_record_line(line: str, lineno: int | None = None) -> AppRecord:
    import json

    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid JSON: {exc.msg}", line=lineno) from None
    try:
        return AppRecord.from_dict(obj)
    except RecordError as exc:
        raise CorpusError(str(exc), line=lineno, fld=exc.field) from None


def parse_corpus(path: str | Path) -> list[AppRecord]:
    """Parse a newline-delimited corpus file; enforces corpus-wide sha256
    uniqueness. Raises CorpusError with the offending line and field."""
    records: list[AppRecord] = []
    seen: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = parse_record_line(line, lineno)
            if record.sha256 in seen:
                raise CorpusError(
                    f"duplicate sha256 {record.sha256} (first seen at line {seen[record.sha256]})",
                    line=lineno,
                    fld="sha256",
                )
            seen[record.sha256] = lineno
            records.append(record)
    return records


def write_corpus(records: Iterable[AppRecord], path: str | Path) -> None:
    """Write records as canonical lines sorted by sha256."""
    ordered = sorted(records, key=lambda r: r.sha256)
    with open(path, "wb") as fh:
        for record in ordered:
            fh.write(canonical_serialize(record) + b"\n")
