"""Similarity metrics between apps and markets.

Composite (set-valued) attributes are compared with the Jaccard index; code
is compared by greedily matching method centroids whose difference degree
falls under a threshold, scoring the matched share of total statement weight.
All scores live in [0, 1] and are symmetric in their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Sequence

from .attributes import MethodCentroid, centroids_of
from .records import AppRecord

JACCARD_KINDS = ("api_sim", "perm_sim", "comp_sim", "lib_sim", "file_sim")
APP_SIM_KINDS = JACCARD_KINDS + ("code_sim",)
PROBABILISTIC_KINDS = APP_SIM_KINDS + ("mark_sim",)

DEFAULT_TAU_M = 0.01


@dataclass(frozen=True)
class SimilarityScore:
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in PROBABILISTIC_KINDS:
            raise ValueError(f"unknown similarity kind {self.kind!r}")
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"similarity value {self.value} outside [0, 1]")


def jaccard(a: Collection, b: Collection) -> float:
    """|a ∩ b| / |a ∪ b|, with J(∅, ∅) defined as 1."""
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def tagged_components(record: AppRecord) -> frozenset[str]:
    """Union of the four component name sets, tagged by component kind so a
    name reused across kinds cannot collide."""
    c = record.components
    return frozenset(
        {f"activity:{n}" for n in c.activities}
        | {f"service:{n}" for n in c.services}
        | {f"receiver:{n}" for n in c.receivers}
        | {f"provider:{n}" for n in c.providers}
    )


def _jaccard_sets(record: AppRecord, kind: str) -> Collection:
    if kind == "api_sim":
        return record.invoked_apis
    if kind == "perm_sim":
        return record.requested_permissions
    if kind == "comp_sim":
        return tagged_components(record)
    if kind == "lib_sim":
        return record.libraries
    if kind == "file_sim":
        return record.files
    raise ValueError(f"kind {kind!r} is not a Jaccard attribute kind")


def attribute_similarity(a: AppRecord, b: AppRecord, kind: str) -> SimilarityScore:
    return SimilarityScore(kind, jaccard(_jaccard_sets(a, kind), _jaccard_sets(b, kind)))


def cdg(c1: MethodCentroid, c2: MethodCentroid) -> float:
    """Centroid difference degree: summed per-dimension relative difference,
    a 0/0 dimension contributing 0. Symmetric, zero iff coordinates equal."""
    total = 0.0
    for v1, v2 in zip(c1.coords(), c2.coords()):
        denom = v1 + v2
        if denom > 0.0:
            total += abs(v1 - v2) / denom
    return total


def matched_weight_similarity(
    left: Sequence[MethodCentroid],
    right: Sequence[MethodCentroid],
    tau_m: float = DEFAULT_TAU_M,
) -> float:
    """Greedy one-to-one matching of centroids under the cdg threshold.

    Candidate cross pairs are ranked by ascending cdg (ties by the pair of
    method ids); a pair is accepted iff both methods are still unmatched.
    The score is the matched share of total statement weight on both sides.
    """
    if not left and not right:
        return 1.0
    if not left or not right:
        return 0.0

    candidates = []
    for cl in left:
        for cr in right:
            d = cdg(cl, cr)
            if d <= tau_m:
                candidates.append((d, cl.method_id, cr.method_id, cl.weight, cr.weight))
    candidates.sort()

    matched_left: set[str] = set()
    matched_right: set[str] = set()
    matched_weight = 0
    for _d, lid, rid, lw, rw in candidates:
        if lid in matched_left or rid in matched_right:
            continue
        matched_left.add(lid)
        matched_right.add(rid)
        matched_weight += lw + rw

    total = sum(c.weight for c in left) + sum(c.weight for c in right)
    return matched_weight / total


def code_similarity(a: AppRecord, b: AppRecord, tau_m: float = DEFAULT_TAU_M) -> SimilarityScore:
    if tau_m <= 0:
        raise ValueError("tau_m must be > 0")
    return SimilarityScore("code_sim", matched_weight_similarity(centroids_of(a), centroids_of(b), tau_m))


def market_similarity(m1: Collection[str], m2: Collection[str]) -> SimilarityScore:
    """Commonality of two markets' app sets (by sha256)."""
    return SimilarityScore("mark_sim", jaccard(m1, m2))
