"""Fact extraction over the built graph.

Three fact families: suspicious apps (piggybacked pairs and update-attack
lineages), market correlation (replication ratios and pairwise sharing), and
malicious-code localization (method-centroid clusters characteristic of a
malware family and rare among benign apps). All extractors are read-only
over the immutable graph and deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .attributes import MethodCentroid, compute_centroid, is_malware
from .graph import EntityKind, Graph, UnknownEntityError
from .records import AppRecord

DEFAULT_SIGMA = 0.5
DEFAULT_BETA = 0.01


@dataclass(frozen=True)
class PiggybackFact:
    """Two apps sharing (package_name, version_code) but signed by different
    certificates; the earlier-compiled one is taken as the original."""

    package_name: str
    version_code: int
    original: str
    variant: str
    cert_original: str
    cert_variant: str
    code_sim: float | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "package_name": self.package_name,
            "version_code": self.version_code,
            "original": self.original,
            "variant": self.variant,
            "cert_original": self.cert_original,
            "cert_variant": self.cert_variant,
        }
        if self.code_sim is not None:
            out["code_sim"] = self.code_sim
        return out


@dataclass(frozen=True)
class ChainLink:
    sha256: str
    version_code: int
    is_malware: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "sha256": self.sha256,
            "version_code": self.version_code,
            "is_malware": self.is_malware,
        }


@dataclass(frozen=True)
class UpdateAttackFact:
    """A package lineage under one certificate that turns from benign to
    malware-flagged across versions."""

    package_name: str
    fingerprint: str | None
    chain: tuple[ChainLink, ...]
    first_malicious_version: int

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "package_name": self.package_name,
            "chain": [link.to_dict() for link in self.chain],
            "first_malicious_version": self.first_malicious_version,
        }
        if self.fingerprint is not None:
            out["fingerprint"] = self.fingerprint
        return out


@dataclass(frozen=True)
class MarketReplicationFact:
    market: str
    app_count: int
    replicated_count: int
    replication_ratio: float
    shared: tuple[tuple[str, int], ...]  # (peer market, shared app count), nonzero only

    def to_dict(self) -> dict[str, Any]:
        return {
            "market": self.market,
            "app_count": self.app_count,
            "replicated_count": self.replicated_count,
            "replication_ratio": self.replication_ratio,
            "shared": {peer: count for peer, count in self.shared},
        }


@dataclass(frozen=True)
class SignatureCluster:
    representative_app: str
    representative: MethodCentroid
    support_in_family: float
    support_in_benign: float
    members: tuple[tuple[str, str], ...]  # (sha256, method_id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "representative": {
                "app": self.representative_app,
                "method_id": self.representative.method_id,
                "cx": self.representative.cx,
                "cy": self.representative.cy,
                "cz": self.representative.cz,
                "weight": self.representative.weight,
            },
            "support_in_family": self.support_in_family,
            "support_in_benign": self.support_in_benign,
            "members": [list(m) for m in self.members],
        }


@dataclass(frozen=True)
class FamilySignature:
    family: str
    clusters: tuple[SignatureCluster, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "clusters": [c.to_dict() for c in self.clusters],
        }


def find_piggybacked(g: Graph) -> list[PiggybackFact]:
    """One fact per unordered certificate-distinct pair within each
    (package_name, version_code) group."""
    groups: dict[tuple[str, int], list[AppRecord]] = {}
    for r in g.records.values():
        groups.setdefault((r.package_name, r.version_code), []).append(r)

    facts = []
    for (pkg, version), members in groups.items():
        members.sort(key=lambda r: r.sha256)
        for a, b in itertools.combinations(members, 2):
            if a.certificate.fingerprint == b.certificate.fingerprint:
                continue
            original, variant = sorted((a, b), key=lambda r: (r.compile_date, r.sha256))
            facts.append(
                PiggybackFact(
                    package_name=pkg,
                    version_code=version,
                    original=original.sha256,
                    variant=variant.sha256,
                    cert_original=original.certificate.fingerprint,
                    cert_variant=variant.certificate.fingerprint,
                    code_sim=g.code_sim_value(original.sha256, variant.sha256),
                )
            )
    facts.sort(key=lambda f: (f.package_name, f.version_code, f.original, f.variant))
    return facts


def find_update_attacks(g: Graph, ignore_cert: bool = False) -> list[UpdateAttackFact]:
    """Version-ordered lineages (package + certificate, or package only with
    ignore_cert) where a benign version precedes a malware-flagged one.

    Records sharing a version code are collapsed into one chain link: flagged
    if any of them is flagged, represented by the smallest sha256.
    """
    groups: dict[Any, list[AppRecord]] = {}
    for r in g.records.values():
        key = r.package_name if ignore_cert else (r.package_name, r.certificate.fingerprint)
        groups.setdefault(key, []).append(r)

    facts = []
    for key, members in groups.items():
        by_version: dict[int, list[AppRecord]] = {}
        for r in members:
            by_version.setdefault(r.version_code, []).append(r)
        chain = tuple(
            ChainLink(
                sha256=min(r.sha256 for r in group),
                version_code=version,
                is_malware=any(is_malware(r.detections) for r in group),
            )
            for version, group in sorted(by_version.items())
        )
        first_malicious = None
        seen_benign = False
        for link in chain:
            if not link.is_malware:
                seen_benign = True
            elif seen_benign:
                first_malicious = link.version_code
                break
        if first_malicious is None:
            continue
        facts.append(
            UpdateAttackFact(
                package_name=key if ignore_cert else key[0],
                fingerprint=None if ignore_cert else key[1],
                chain=chain,
                first_malicious_version=first_malicious,
            )
        )
    facts.sort(key=lambda f: (f.package_name, f.fingerprint or ""))
    return facts


def market_replication(g: Graph) -> list[MarketReplicationFact]:
    """Per market: how many hosted apps also appear in at least one other
    market, plus the pairwise shared-app counts."""
    members = g.market_members()
    hosting_count = {sha: len(r.hosting_markets) for sha, r in g.records.items()}

    facts = []
    for market in sorted(members):
        shas = members[market]
        replicated = sum(1 for sha in shas if hosting_count[sha] >= 2)
        shared = tuple(
            (peer, len(shas & members[peer]))
            for peer in sorted(members)
            if peer != market and shas & members[peer]
        )
        facts.append(
            MarketReplicationFact(
                market=market,
                app_count=len(shas),
                replicated_count=replicated,
                replication_ratio=replicated / len(shas) if shas else 0.0,
                shared=shared,
            )
        )
    return facts


def _single_linkage_clusters(
    items: Sequence[tuple[str, MethodCentroid]], tau_m: float
) -> list[list[int]]:
    """Connected components of the graph joining centroids at cdg <= tau_m."""
    from .similarity import cdg

    parent = list(range(len(items)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if cdg(items[i][1], items[j][1]) <= tau_m:
                union(i, j)

    clusters: dict[int, list[int]] = {}
    for i in range(len(items)):
        clusters.setdefault(find(i), []).append(i)
    return [clusters[root] for root in sorted(clusters)]


def localize_malicious_code(
    g: Graph,
    family: str,
    benign_sample: Iterable[str] | None = None,
    sigma: float = DEFAULT_SIGMA,
    beta: float = DEFAULT_BETA,
) -> FamilySignature:
    """Single-linkage clusters of the family's method centroids under the
    graph's cdg threshold, kept when prevalent in the family (support >=
    sigma) and rare in the benign sample (support <= beta).

    benign_sample defaults to every app in the graph with no detections.
    """
    if not 0.0 < sigma <= 1.0:
        raise ValueError("sigma must be in (0, 1]")
    if not 0.0 <= beta < 1.0:
        raise ValueError("beta must be in [0, 1)")
    members = g.families().get(family)
    if members is None:
        if (EntityKind.FAMILY.value, family) not in g.entities:
            raise UnknownEntityError(EntityKind.FAMILY, family)
        members = []
    if not members:
        return FamilySignature(family=family, clusters=())

    tau_m = g.manifest.tau_m
    if benign_sample is None:
        benign_sample = [
            sha for sha, r in g.records.items() if not is_malware(r.detections)
        ]
    benign_shas = sorted(set(benign_sample))

    items: list[tuple[str, MethodCentroid]] = []
    for sha in members:
        for m in g.records[sha].methods:
            items.append((sha, compute_centroid(m)))

    from .similarity import cdg

    benign_centroids = {
        sha: [compute_centroid(m) for m in g.records[sha].methods] for sha in benign_shas
    }

    clusters = []
    for indexes in _single_linkage_clusters(items, tau_m):
        cluster_items = [items[i] for i in indexes]
        rep_sha, rep = min(
            cluster_items, key=lambda it: (-it[1].weight, it[1].method_id, it[0])
        )
        support_family = len({sha for sha, _ in cluster_items}) / len(members)
        if support_family < sigma:
            continue
        if benign_shas:
            hits = sum(
                1
                for sha in benign_shas
                if any(cdg(c, rep) <= tau_m for c in benign_centroids[sha])
            )
            support_benign = hits / len(benign_shas)
        else:
            support_benign = 0.0
        if support_benign > beta:
            continue
        clusters.append(
            SignatureCluster(
                representative_app=rep_sha,
                representative=rep,
                support_in_family=support_family,
                support_in_benign=support_benign,
                members=tuple(sorted((sha, c.method_id) for sha, c in cluster_items)),
            )
        )
    clusters.sort(
        key=lambda c: (-c.support_in_family, c.representative_app, c.representative.method_id)
    )
    return FamilySignature(family=family, clusters=tuple(clusters))
