import random
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from appvault.attributes import (
    DEFAULT_STOPLIST,
    UNLABELED,
    author_of,
    compute_centroid,
    is_malware,
    load_stoplist,
    normalize_family,
)
from appvault.records import MethodCfg
from factories import make_method, make_record


# -- independent centroid oracle ---------------------------------------------


def oracle_centroid(m: MethodCfg):
    """Straightforward recursive recomputation of the three weighted means."""
    sys.setrecursionlimit(100000)
    stmt = dict(m.blocks)
    depth = dict(m.loop_depth)
    succ: dict[int, list[int]] = {b: [] for b in stmt}
    out_degree = {b: 0 for b in stmt}
    for a, b in m.edges:
        succ[a].append(b)
        out_degree[a] += 1

    order: list[int] = []
    visited: set[int] = set()

    def visit(block: int) -> None:
        visited.add(block)
        order.append(block)
        for child in sorted(succ[block]):
            if child not in visited:
                visit(child)

    visit(min(stmt))
    order.extend(b for b in sorted(stmt) if b not in visited)

    total = sum(stmt.values())
    cx = sum(stmt[b] * (i + 1) for i, b in enumerate(order)) / total
    cy = sum(stmt[b] * out_degree[b] for b in order) / total
    cz = sum(stmt[b] * depth[b] for b in order) / total
    return cx, cy, cz, total


def random_cfg(rng: random.Random, max_blocks: int = 50) -> MethodCfg:
    n = rng.randint(1, max_blocks)
    ids = rng.sample(range(0, 4 * max_blocks), n)
    blocks = tuple((b, rng.randint(1, 20)) for b in ids)
    possible = [(a, b) for a in ids for b in ids]
    edges = tuple(rng.sample(possible, rng.randint(0, min(len(possible), 3 * n))))
    loop_depth = tuple((b, rng.randint(0, 4)) for b in ids)
    return MethodCfg(id="m", blocks=blocks, edges=edges, loop_depth=loop_depth)


def test_single_block_centroid():
    c = compute_centroid(make_method(blocks=((0, 5),)))
    assert (c.cx, c.cy, c.cz, c.weight) == (1.0, 0.0, 0.0, 5)


def test_single_block_self_edge_out_degree():
    c = compute_centroid(make_method(blocks=((0, 5),), edges=((0, 0),)))
    assert (c.cx, c.cy, c.cz, c.weight) == (1.0, 1.0, 0.0, 5)


def test_two_block_centroid():
    c = compute_centroid(make_method(blocks=((0, 1), (1, 1)), edges=((0, 1),)))
    assert (c.cx, c.cy, c.cz, c.weight) == (1.5, 0.5, 0.0, 2)


def test_unreachable_blocks_follow_reachable_ones():
    # entry 0 reaches only 3; unreachable 1, 2 take indices 3, 4 in id order
    m = make_method(blocks=((0, 1), (1, 1), (2, 1), (3, 1)), edges=((0, 3),))
    c = compute_centroid(m)
    # order: 0, 3, 1, 2 -> indices 1, 2, 3, 4; block 1 has index 3, block 2 index 4
    assert c.cx == (1 + 2 + 3 + 4) / 4
    assert c == compute_centroid(m)  # deterministic


def test_centroid_matches_oracle_on_random_cfgs():
    rng = random.Random(42)
    for _ in range(200):
        m = random_cfg(rng)
        c = compute_centroid(m)
        assert (c.cx, c.cy, c.cz, c.weight) == oracle_centroid(m)


def test_centroid_invariant_under_input_permutation():
    rng = random.Random(43)
    for _ in range(50):
        m = random_cfg(rng, max_blocks=20)
        blocks, edges, depths = list(m.blocks), list(m.edges), list(m.loop_depth)
        rng.shuffle(blocks)
        rng.shuffle(edges)
        rng.shuffle(depths)
        shuffled = MethodCfg(id=m.id, blocks=tuple(blocks), edges=tuple(edges), loop_depth=tuple(depths))
        assert compute_centroid(shuffled) == compute_centroid(m)


def test_weight_conservation():
    rng = random.Random(44)
    for _ in range(50):
        m = random_cfg(rng, max_blocks=30)
        assert compute_centroid(m).weight == sum(n for _, n in m.blocks)


# -- family normalization ----------------------------------------------------


def test_empty_detections_unlabeled():
    assert normalize_family([]) == UNLABELED
    assert normalize_family([]).vote_count == 0


def test_plurality_vote():
    label = normalize_family(
        [("e1", "Trojan.Kuguo.A"), ("e2", "Android/Kuguo"), ("e3", "Generic.X")]
    )
    assert label.name == "kuguo"
    assert label.vote_count == 2


def test_tie_breaks_lexicographically():
    assert normalize_family([("e1", "a"), ("e2", "b")]).name == "a"


def test_all_generic_tokens_unlabeled():
    assert normalize_family([("e1", "Android.Generic"), ("e2", "Trojan")]) == UNLABELED


@given(st.permutations([("e1", "Trojan.Kuguo.A"), ("e2", "Android/Kuguo"), ("e3", "Generic.X"), ("e4", "dowgin")]))
def test_engine_order_irrelevant(detections):
    assert normalize_family(detections) == normalize_family(
        sorted(detections)
    )


def test_duplicate_tokens_within_label_vote_once():
    label = normalize_family([("e1", "kuguo.kuguo"), ("e2", "dowgin"), ("e3", "dowgin")])
    assert label.name == "dowgin"
    assert label.vote_count == 2


def test_stoplist_override(tmp_path):
    stop = tmp_path / "stop.txt"
    stop.write_text("# comment\nkuguo\n\n")
    stoplist = load_stoplist(stop)
    assert stoplist == frozenset({"kuguo"})
    label = normalize_family([("e1", "Kuguo.Beta")], stoplist)
    assert label.name == "beta"


# -- malware flag and authorship ----------------------------------------------


def test_is_malware_counts():
    assert not is_malware([])
    assert is_malware([("e1", "anything")])
    assert is_malware([(f"e{i}", "x") for i in range(57)])


def test_author_is_fingerprint():
    a = make_record("a", cert="same")
    b = make_record("b", cert="same")
    c = make_record("c", cert="other")
    assert author_of(a) == author_of(b)
    assert author_of(a) != author_of(c)


def test_author_count_matches_distinct_fingerprints(seed1):
    records, _ = seed1
    authors = {author_of(r) for r in records}
    fingerprints = {r.certificate.fingerprint for r in records}
    assert authors == fingerprints
