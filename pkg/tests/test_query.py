import random

import pytest

from appvault.attributes import normalize_family
from appvault.graph import EntityKind, build_graph
from appvault.query import (
    Conjunct,
    FilterQuery,
    QueryError,
    evaluate,
    parse_filter,
    query_from_params,
)
from factories import make_record


def scan_oracle(g, conjuncts, kind=EntityKind.APP):
    """Independent linear scan over raw record values."""

    def value_of(record, path):
        if path == "family":
            return normalize_family(record.detections, frozenset(g.manifest.stoplist)).name
        if path == "author":
            return record.certificate.fingerprint
        if path == "malware":
            return len(record.detections) >= 1
        if path == "compile_date":
            return record.compile_date.isoformat()
        obj = record
        for part in path.split("."):
            obj = getattr(obj, part, None)
            if obj is None:
                return None
        return obj

    out = []
    for entity in g.entities_of_kind(kind):
        if kind is not EntityKind.APP:
            values = {"id": entity.id, "kind": entity.kind.value}
            ok = all(_apply(values.get(c.path), c.op, c.literal) for c in conjuncts)
        else:
            record = g.records[entity.id]
            ok = all(_apply(value_of(record, c.path), c.op, c.literal) for c in conjuncts)
        if ok:
            out.append(entity.id)
    return out


def _apply(value, op, literal):
    if value is None:
        return False
    if op == "=":
        return value == literal
    if op == "!=":
        return value != literal
    if op == "<":
        return value < literal
    if op == "<=":
        return value <= literal
    if op == ">":
        return value > literal
    if op == ">=":
        return value >= literal
    if op == "contains":
        return literal in value
    return value in literal


@pytest.fixture(scope="module")
def small_graph():
    records = [
        make_record("q1", package="com.x", version_code=1, perms=("p.a", "p.b")),
        make_record("q2", package="com.x", version_code=5, perms=("p.b",)),
        make_record("q3", package="com.y", version_code=9, market="m2",
                    detections=(("e", "Trojan.Kuguo"),)),
    ]
    return build_graph(records)


def test_no_conjuncts_returns_all_of_kind(small_graph):
    assert evaluate(small_graph, FilterQuery()) == sorted(small_graph.records)
    markets = evaluate(small_graph, FilterQuery(kind=EntityKind.MARKET))
    assert markets == ["m1", "m2"]


def test_conjunction_matches_scan(small_graph):
    conjuncts = parse_filter("package_name = com.x AND version_code > 3")
    assert evaluate(small_graph, FilterQuery(conjuncts)) == scan_oracle(small_graph, conjuncts)
    assert len(evaluate(small_graph, FilterQuery(conjuncts))) == 1


def test_contains_on_set(small_graph):
    conjuncts = parse_filter("requested_permissions contains p.a")
    ids = evaluate(small_graph, FilterQuery(conjuncts))
    assert ids == [make_record("q1").sha256]


def test_family_query_finds_planted_apps(seed1, seed1_graph):
    _, truth = seed1
    for family in truth["families"]:
        ids = evaluate(seed1_graph, FilterQuery(parse_filter(f"family = {family}")))
        assert ids == sorted(truth["families"][family]["members"])


def test_unknown_field_path(small_graph):
    with pytest.raises(QueryError):
        evaluate(small_graph, FilterQuery((Conjunct("no_such_field", "=", 1),)))


def test_type_mismatch(small_graph):
    with pytest.raises(QueryError):
        evaluate(small_graph, FilterQuery((Conjunct("version_code", ">", "three"),)))
    with pytest.raises(QueryError):
        evaluate(small_graph, FilterQuery((Conjunct("market", "in", "m1"),)))


def test_missing_value_fails_conjunct(small_graph):
    # no record has crawl metadata, so crawl.score never matches
    conjuncts = parse_filter("crawl.score >= 0")
    assert evaluate(small_graph, FilterQuery(conjuncts)) == []


def test_pagination(small_graph):
    all_ids = evaluate(small_graph, FilterQuery())
    assert evaluate(small_graph, FilterQuery(limit=2)) == all_ids[:2]
    assert evaluate(small_graph, FilterQuery(limit=2, offset=2)) == all_ids[2:4]
    with pytest.raises(QueryError):
        FilterQuery(limit=0)


def test_parse_filter_forms():
    assert parse_filter("") == ()
    conjuncts = parse_filter('version_code >= 3 AND market in ["m1","m2"] AND app_name = App q1')
    assert conjuncts[0] == Conjunct("version_code", ">=", 3)
    assert conjuncts[1] == Conjunct("market", "in", ["m1", "m2"])
    assert conjuncts[2] == Conjunct("app_name", "=", "App q1")
    with pytest.raises(QueryError):
        parse_filter("version_code ~ 3")
    with pytest.raises(QueryError):
        query_from_params(kind="PLANET")


def random_query(rng, g):
    """A random conjunctive query answerable by both paths."""
    records = list(g.records.values())
    r = rng.choice(records)
    pool = [
        Conjunct("package_name", "=", r.package_name),
        Conjunct("version_code", ">", rng.randrange(0, 50)),
        Conjunct("version_code", "<=", rng.randrange(1, 80)),
        Conjunct("market", "=", r.market),
        Conjunct("market", "in", [r.market, "market99"]),
        Conjunct("malware", "=", rng.random() < 0.5),
        Conjunct("sha256", "!=", r.sha256),
        Conjunct("compile_date", ">=", "2014-01-01"),
        Conjunct("min_sdk", ">=", rng.choice((16, 21))),
        Conjunct("family", "=", rng.choice(("kuguo", "dowgin", "nothing"))),
        Conjunct("requested_permissions", "contains", rng.choice(sorted(r.requested_permissions))),
        Conjunct("libraries", "contains", rng.choice(sorted(r.libraries))),
        Conjunct("app_name", "contains", rng.choice(("Box", "Go", "zz"))),
    ]
    return tuple(rng.sample(pool, rng.randrange(1, 4)))


def test_random_queries_match_scan_oracle(seed1_graph):
    rng = random.Random(31)
    for _ in range(100):
        conjuncts = random_query(rng, seed1_graph)
        got = evaluate(seed1_graph, FilterQuery(conjuncts))
        assert got == scan_oracle(seed1_graph, conjuncts)
