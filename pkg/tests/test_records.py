import json

import pytest

from appvault.canon import canonical_bytes
from appvault.records import (
    AppRecord,
    CorpusError,
    canonical_serialize,
    parse_corpus,
    parse_record_line,
    write_corpus,
)
from factories import make_crawl, make_method, make_record, sha


def record_dict(**overrides):
    d = make_record("base", methods=(make_method(),), crawl=make_crawl()).to_dict()
    d.update(overrides)
    return d


def test_empty_file(tmp_path):
    path = tmp_path / "empty.ndjson"
    path.write_text("")
    assert parse_corpus(path) == []


def test_round_trip_identity():
    record = make_record(
        "rt",
        methods=(make_method("m1", blocks=((0, 2), (1, 3)), edges=((0, 1),)),),
        detections=(("e1", "Trojan.Foo"),),
        apis=("api.a", "api.b"),
        crawl=make_crawl(),
        markets=frozenset({"m1", "m2"}),
    )
    data = canonical_serialize(record)
    parsed = AppRecord.from_dict(json.loads(data))
    assert parsed == record
    assert canonical_serialize(parsed) == data


def test_canonical_ignores_input_order():
    a = make_record("x", apis=("a", "b", "c"))
    b = make_record("x", apis=("c", "b", "a"))
    assert canonical_serialize(a) == canonical_serialize(b)


def test_serialization_deterministic():
    r = make_record("det", methods=(make_method(),))
    assert canonical_serialize(r) == canonical_serialize(r)


def test_short_sha_rejected_with_line_and_field(tmp_path):
    d = record_dict(sha256="ab" * 31 + "a")  # 63 chars
    path = tmp_path / "bad.ndjson"
    path.write_text(json.dumps(d) + "\n")
    with pytest.raises(CorpusError) as err:
        parse_corpus(path)
    assert err.value.line == 1
    assert err.value.field == "sha256"


def test_duplicate_sha_rejected(tmp_path):
    line = canonical_serialize(make_record("dup")).decode()
    path = tmp_path / "dup.ndjson"
    path.write_text(line + "\n" + line + "\n")
    with pytest.raises(CorpusError) as err:
        parse_corpus(path)
    assert make_record("dup").sha256 in str(err.value)
    assert err.value.line == 2


@pytest.mark.parametrize(
    "overrides,field",
    [
        ({"version_code": -1}, "version_code"),
        ({"invoked_apis": ["x", "x"]}, "invoked_apis"),
        ({"compile_date": "2015-13-01"}, "compile_date"),
        ({"certificate": {"fingerprint": "XYZ", "issuer": "", "subject": "", "public_key_hash": ""}},
         "certificate.fingerprint"),
        ({"unexpected": 1}, "unexpected"),
    ],
)
def test_invariant_violations_name_the_field(overrides, field):
    with pytest.raises(CorpusError) as err:
        parse_record_line(json.dumps(record_dict(**overrides)), 1)
    assert err.value.field == field


def test_missing_required_field_rejected():
    d = record_dict()
    del d["package_name"]
    with pytest.raises(CorpusError) as err:
        parse_record_line(json.dumps(d), 1)
    assert err.value.field == "package_name"


def test_crawl_must_have_exactly_16_fields():
    d = record_dict()
    del d["crawl"]["score"]
    with pytest.raises(CorpusError) as err:
        parse_record_line(json.dumps(d), 1)
    assert err.value.field == "crawl.score"

    d = record_dict()
    d["crawl"]["extra"] = 1
    with pytest.raises(CorpusError) as err:
        parse_record_line(json.dumps(d), 1)
    assert err.value.field == "crawl.extra"


def test_crawl_score_bounds():
    d = record_dict()
    d["crawl"]["score"] = 5.5
    with pytest.raises(CorpusError) as err:
        parse_record_line(json.dumps(d), 1)
    assert err.value.field == "crawl.score"


def test_method_invariants():
    d = record_dict()
    d["methods"] = [{"id": "m", "blocks": [[0, 1]], "edges": [[0, 9]], "loop_depth": [[0, 0]]}]
    with pytest.raises(CorpusError) as err:
        parse_record_line(json.dumps(d), 1)
    assert err.value.field == "methods.edges"

    d["methods"] = [{"id": "m", "blocks": [[0, 0]], "edges": [], "loop_depth": [[0, 0]]}]
    with pytest.raises(CorpusError) as err:
        parse_record_line(json.dumps(d), 1)
    assert err.value.field == "methods.blocks"

    d["methods"] = [{"id": "m", "blocks": [[0, 1]], "edges": [], "loop_depth": []}]
    with pytest.raises(CorpusError) as err:
        parse_record_line(json.dumps(d), 1)
    assert err.value.field == "methods.loop_depth"


def test_markets_must_contain_market():
    d = record_dict(markets=["m2", "m3"])
    with pytest.raises(CorpusError) as err:
        parse_record_line(json.dumps(d), 1)
    assert err.value.field == "markets"


def test_synth_corpus_round_trips_byte_identically(tmp_path, seed1):
    records, _ = seed1
    path = tmp_path / "corpus.ndjson"
    write_corpus(records, path)
    original = path.read_bytes()

    parsed = parse_corpus(path)
    assert len(parsed) == len(records)
    reserialized = b"".join(canonical_serialize(r) + b"\n" for r in parsed)
    assert reserialized == original


def test_corpus_digest_stable_across_runs(seed1):
    from appvault.graph import corpus_digest_of

    records, _ = seed1
    assert corpus_digest_of(records) == corpus_digest_of(list(reversed(records)))


def test_cert_equality_is_fingerprint_only():
    from appvault.records import CertIdentity

    a = CertIdentity(fingerprint="ab12", issuer="CN=x", subject="CN=x", public_key_hash="")
    b = CertIdentity(fingerprint="ab12", issuer="CN=other", subject="CN=y", public_key_hash="ff")
    c = CertIdentity(fingerprint="ab13", issuer="CN=x", subject="CN=x", public_key_hash="")
    assert a == b
    assert a != c
    assert hash(a) == hash(b)


def test_blank_lines_skipped(tmp_path):
    line = canonical_serialize(make_record("blank")).decode()
    path = tmp_path / "c.ndjson"
    path.write_text("\n" + line + "\n\n")
    assert len(parse_corpus(path)) == 1


def test_canonical_bytes_sorted_and_compact():
    data = canonical_bytes({"b": 1, "a": [2, 1]})
    assert data == b'{"a":[2,1],"b":1}'
