import pytest

from appvault.records import parse_corpus
from appvault.synthgen import Profile, ProfileError, generate, write_outputs


def test_deterministic_outputs(tmp_path):
    profile = Profile(apps=60, piggyback_pairs=3, update_attack_chains=2, families=1)
    a, b = tmp_path / "a", tmp_path / "b"
    write_outputs(*generate(5, profile), a)
    write_outputs(*generate(5, profile), b)
    assert (a / "corpus.ndjson").read_bytes() == (b / "corpus.ndjson").read_bytes()
    assert (a / "ground_truth.json").read_bytes() == (b / "ground_truth.json").read_bytes()


def test_different_seeds_differ():
    profile = Profile(apps=30, piggyback_pairs=0, update_attack_chains=0, families=0)
    ra, _ = generate(1, profile)
    rb, _ = generate(2, profile)
    assert {r.sha256 for r in ra}.isdisjoint({r.sha256 for r in rb})


def test_zero_plants_empty_ground_truth():
    profile = Profile(
        apps=10, families=0, piggyback_pairs=0, update_attack_chains=0, clone_similarities=()
    )
    records, truth = generate(3, profile)
    assert len(records) == 10
    assert truth["piggyback_pairs"] == []
    assert truth["update_attack_chains"] == []
    assert truth["clone_pairs"] == []
    assert truth["families"] == {}


def test_inconsistent_profile_rejected():
    with pytest.raises(ProfileError):
        Profile(apps=10, piggyback_pairs=20)
    with pytest.raises(ProfileError):
        Profile(markets=0)
    with pytest.raises(ProfileError):
        Profile(clone_similarities=(1.5,))
    with pytest.raises(ProfileError):
        Profile.from_dict({"apps": 10, "bogus": 1})


def test_generated_corpus_parses(tmp_path):
    records, _ = generate(9, Profile(apps=40, piggyback_pairs=2, update_attack_chains=1, families=1))
    corpus_path, _ = write_outputs(records, {}, tmp_path)
    parsed = parse_corpus(corpus_path)
    assert len(parsed) == 40


def test_planted_structures_reference_generated_shas(seed1):
    records, truth = seed1
    shas = {r.sha256 for r in records}
    for p in truth["piggyback_pairs"]:
        assert p["original"] in shas and p["variant"] in shas
    for c in truth["update_attack_chains"]:
        assert all(link["sha256"] in shas for link in c["chain"])
    for pair in truth["clone_pairs"]:
        assert pair["a"] in shas and pair["b"] in shas
    for info in truth["families"].values():
        assert set(info["members"]) <= shas
    for members in truth["market_members"].values():
        assert set(members) <= shas


def test_collision_freedom(seed1):
    records, truth = seed1
    planted = set()
    for p in truth["piggyback_pairs"]:
        planted |= {p["original"], p["variant"]}
    for c in truth["update_attack_chains"]:
        planted |= {link["sha256"] for link in c["chain"]}
    for info in truth["families"].values():
        planted |= set(info["members"])
    keys = {}
    for r in records:
        if r.sha256 in planted:
            continue
        key = (r.package_name, r.version_code)
        assert key not in keys, "non-planted apps must not collide on (package, version)"
        keys[key] = r.sha256
        assert not any(m.id.startswith("payload_") for m in r.methods)


def test_expected_clone_value_is_exact(threshold_corpus):
    from appvault.similarity import code_similarity

    records, truth = threshold_corpus
    by_sha = {r.sha256: r for r in records}
    requested = sorted(p["code_sim"] for p in truth["clone_pairs"])
    assert requested == [0.85, 0.9, 0.95]
    for pair in truth["clone_pairs"]:
        got = code_similarity(by_sha[pair["a"]], by_sha[pair["b"]]).value
        assert got == pair["code_sim"]


def test_market_members_match_records(seed1):
    records, truth = seed1
    expected = {}
    for r in records:
        for m in r.hosting_markets:
            expected.setdefault(m, []).append(r.sha256)
    assert truth["market_members"] == {m: sorted(v) for m, v in expected.items()}
