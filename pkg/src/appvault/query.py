"""Conjunctive filter queries over the graph.

A query is a conjunction of (field path, operator, literal) predicates
against a target entity kind (APP by default), evaluated as a linear scan
with deterministic ordering (entity id ascending) and offset/limit paging.

Text form, used by the CLI and the HTTP filter parameter:

    package_name = com.example.app AND version_code > 3
    family = kuguo
    requested_permissions contains android.permission.SEND_SMS
    market in ["market00", "market01"]

Literals are parsed as JSON when possible, else taken as bare strings.
Missing optional values (e.g. no crawl metadata) fail every predicate.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Callable

from .attributes import normalize_family
from .graph import EntityKind, Graph
from .records import AppRecord

OPERATORS = ("=", "!=", "<", "<=", ">", ">=", "contains", "in")


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class Conjunct:
    path: str
    op: str
    literal: Any

    def __post_init__(self):
        if self.op not in OPERATORS:
            raise QueryError(f"unknown operator {self.op!r}")


@dataclass(frozen=True)
class FilterQuery:
    conjuncts: tuple[Conjunct, ...] = ()
    kind: EntityKind = EntityKind.APP
    limit: int | None = None
    offset: int = 0

    def __post_init__(self):
        if self.limit is not None and self.limit < 1:
            raise QueryError("limit must be >= 1")
        if self.offset < 0:
            raise QueryError("offset must be >= 0")


def _cert(attr: str) -> Callable[[AppRecord], Any]:
    return lambda r: getattr(r.certificate, attr)


def _crawl(attr: str) -> Callable[[AppRecord], Any]:
    def get(r: AppRecord) -> Any:
        if r.crawl is None:
            return None
        value = getattr(r.crawl, attr)
        return value.isoformat() if attr == "updated_date" else value

    return get


_APP_FIELDS: dict[str, Callable[[AppRecord], Any]] = {
    "sha256": lambda r: r.sha256,
    "package_name": lambda r: r.package_name,
    "app_name": lambda r: r.app_name,
    "version_code": lambda r: r.version_code,
    "version_name": lambda r: r.version_name,
    "compile_date": lambda r: r.compile_date.isoformat(),
    "market": lambda r: r.market,
    "markets": lambda r: r.hosting_markets,
    "min_sdk": lambda r: r.min_sdk,
    "max_sdk": lambda r: r.max_sdk,
    "target_sdk": lambda r: r.target_sdk,
    "certificate.fingerprint": _cert("fingerprint"),
    "certificate.issuer": _cert("issuer"),
    "certificate.subject": _cert("subject"),
    "certificate.public_key_hash": _cert("public_key_hash"),
    "components.activities": lambda r: r.components.activities,
    "components.services": lambda r: r.components.services,
    "components.receivers": lambda r: r.components.receivers,
    "components.providers": lambda r: r.components.providers,
    "declared_permissions": lambda r: r.declared_permissions,
    "requested_permissions": lambda r: r.requested_permissions,
    "libraries": lambda r: r.libraries,
    "invoked_apis": lambda r: r.invoked_apis,
    "strings": lambda r: r.strings,
    "invoked_packages": lambda r: r.invoked_packages,
    "detections_count": lambda r: len(r.detections),
    "malware": lambda r: len(r.detections) >= 1,
}
for _attr in (
    "category",
    "description",
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
    "market",
):
    _APP_FIELDS[f"crawl.{_attr}"] = _crawl(_attr)
_APP_FIELDS["crawl.similar_apps"] = lambda r: None if r.crawl is None else r.crawl.similar_apps
_APP_FIELDS["crawl.screenshots"] = lambda r: None if r.crawl is None else r.crawl.screenshots
_APP_FIELDS["crawl.reviews"] = lambda r: None if r.crawl is None else r.crawl.reviews

_ENTITY_FIELDS = ("id", "kind")


def _resolve(g: Graph, kind: EntityKind, entity_id: str, path: str) -> Any:
    if kind is EntityKind.APP and path in _APP_FIELDS:
        return _APP_FIELDS[path](g.records[entity_id])
    if kind is EntityKind.APP and path == "family":
        label = normalize_family(
            g.records[entity_id].detections, frozenset(g.manifest.stoplist)
        )
        return label.name
    if kind is EntityKind.APP and path == "author":
        return g.records[entity_id].certificate.fingerprint
    if path == "id":
        return entity_id
    if path == "kind":
        return kind.value
    raise QueryError(f"unknown field path {path!r} for kind {kind.value}")


def known_paths(kind: EntityKind) -> tuple[str, ...]:
    if kind is EntityKind.APP:
        return tuple(sorted(set(_APP_FIELDS) | {"family", "author", "id", "kind"}))
    return _ENTITY_FIELDS


def _check_path(kind: EntityKind, path: str) -> None:
    if path not in known_paths(kind):
        raise QueryError(f"unknown field path {path!r} for kind {kind.value}")


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _matches(value: Any, op: str, literal: Any, path: str) -> bool:
    if value is None:
        return False
    if op == "=":
        return value == literal
    if op == "!=":
        return value != literal
    if op in ("<", "<=", ">", ">="):
        ok = (_is_number(value) and _is_number(literal)) or (
            isinstance(value, str) and isinstance(literal, str)
        )
        if not ok:
            raise QueryError(
                f"operator {op!r} on {path!r} needs a literal matching the field type, "
                f"got {type(literal).__name__}"
            )
        if op == "<":
            return value < literal
        if op == "<=":
            return value <= literal
        if op == ">":
            return value > literal
        return value >= literal
    if op == "contains":
        if isinstance(value, str):
            if not isinstance(literal, str):
                raise QueryError(f"'contains' on string field {path!r} needs a string literal")
            return literal in value
        if isinstance(value, (frozenset, set, tuple, list)):
            return literal in value
        raise QueryError(f"'contains' not applicable to field {path!r}")
    # op == "in"
    if not isinstance(literal, (list, tuple)):
        raise QueryError(f"'in' on {path!r} needs an array literal")
    return value in literal


def evaluate(g: Graph, q: FilterQuery) -> list[str]:
    """Entity ids of the target kind satisfying every conjunct, ascending,
    after offset/limit paging."""
    for c in q.conjuncts:
        _check_path(q.kind, c.path)
    matched = []
    for entity in g.entities_of_kind(q.kind):
        if all(
            _matches(_resolve(g, q.kind, entity.id, c.path), c.op, c.literal, c.path)
            for c in q.conjuncts
        ):
            matched.append(entity.id)
    end = None if q.limit is None else q.offset + q.limit
    return matched[q.offset : end]


_WORD_OP_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_.]*)\s+(contains|in)\s+(.+?)\s*$")
_SYM_OP_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_.]*)\s*(<=|>=|!=|=|<|>)\s*(.+?)\s*$")


def _parse_literal(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_filter(text: str) -> tuple[Conjunct, ...]:
    """Parse the textual conjunction form; empty text means no conjuncts."""
    text = text.strip()
    if not text:
        return ()
    conjuncts = []
    for part in re.split(r"\s+AND\s+", text):
        m = _WORD_OP_RE.match(part) or _SYM_OP_RE.match(part)
        if m is None:
            raise QueryError(f"cannot parse conjunct {part!r}")
        path, op, literal = m.group(1), m.group(2), _parse_literal(m.group(3))
        conjuncts.append(Conjunct(path=path, op=op, literal=literal))
    return tuple(conjuncts)


def query_from_params(
    filter_text: str = "",
    kind: str = "APP",
    limit: int | None = None,
    offset: int = 0,
) -> FilterQuery:
    try:
        entity_kind = EntityKind(kind)
    except ValueError:
        raise QueryError(f"unknown entity kind {kind!r}") from None
    return FilterQuery(
        conjuncts=parse_filter(filter_text), kind=entity_kind, limit=limit, offset=offset
    )
