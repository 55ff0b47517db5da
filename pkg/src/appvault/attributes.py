"""Attributes derived from raw records: method centroids, normalized malware
family labels, the malware flag, and author identity.

A method centroid condenses one control-flow graph into three weighted means
(position in a deterministic traversal, branching, loop depth) plus the total
statement count as weight. Two structurally identical methods always produce
identical centroids regardless of input block/edge order.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

from .records import AppRecord, MethodCfg

DEFAULT_STOPLIST = frozenset(
    {"trojan", "virus", "malware", "android", "andr", "generic", "riskware", "adware", "win32"}
)

_TOKEN_RE = re.compile(r"[0-9a-z]+")


@dataclass(frozen=True)
class MethodCentroid:
    method_id: str
    cx: float  # weighted mean traversal index (1-based)
    cy: float  # weighted mean out-degree
    cz: float  # weighted mean loop depth
    weight: int  # total statement count

    def coords(self) -> tuple[float, float, float]:
        return (self.cx, self.cy, self.cz)


class FamilyLabel(NamedTuple):
    name: str | None
    vote_count: int

    @property
    def is_labeled(self) -> bool:
        return self.name is not None


UNLABELED = FamilyLabel(None, 0)


def _traversal_order(m: MethodCfg) -> list[int]:
    """Deterministic block order: depth-first preorder from the entry block
    (lowest block id), children visited in ascending block id; blocks not
    reachable from the entry follow in ascending block id order."""
    successors: dict[int, list[int]] = {b: [] for b in m.block_ids}
    for a, b in m.edges:
        successors[a].append(b)
    for succ in successors.values():
        succ.sort()

    entry = min(m.block_ids)
    order: list[int] = []
    seen: set[int] = set()
    stack = [entry]
    while stack:
        block = stack.pop()
        if block in seen:
            continue
        seen.add(block)
        order.append(block)
        stack.extend(reversed(successors[block]))
    order.extend(b for b in sorted(m.block_ids) if b not in seen)
    return order


def compute_centroid(m: MethodCfg) -> MethodCentroid:
    """Weighted means over blocks: index in the deterministic traversal,
    out-degree (self-edges count), loop depth; weights are statement counts."""
    stmt = dict(m.blocks)
    depth = m.depth_of()
    out_degree = Counter(a for a, _ in m.edges)

    sx = sy = sz = 0
    total = 0
    for index, block in enumerate(_traversal_order(m), start=1):
        w = stmt[block]
        sx += w * index
        sy += w * out_degree[block]
        sz += w * depth[block]
        total += w
    return MethodCentroid(
        method_id=m.id,
        cx=sx / total,
        cy=sy / total,
        cz=sz / total,
        weight=total,
    )


def centroids_of(record: AppRecord) -> list[MethodCentroid]:
    return [compute_centroid(m) for m in record.methods]


def normalize_family(
    detections: Iterable[tuple[str, str]],
    stoplist: frozenset[str] = DEFAULT_STOPLIST,
) -> FamilyLabel:
    """Plurality vote over label tokens.

    Each label is tokenized on non-alphanumerics and lowercased; generic
    tokens in the stoplist are dropped; each detection votes once per
    remaining distinct token. The most-voted token wins, ties broken by
    lexicographic order; no surviving tokens means UNLABELED.
    """
    votes: Counter[str] = Counter()
    for _engine, label in detections:
        tokens = set(_TOKEN_RE.findall(label.lower())) - stoplist
        votes.update(tokens)
    if not votes:
        return UNLABELED
    best = min(votes, key=lambda t: (-votes[t], t))
    return FamilyLabel(best, votes[best])


def is_malware(detections: Iterable[tuple[str, str]]) -> bool:
    """Flagged by at least one detection engine."""
    return len(list(detections)) >= 1


def author_of(record: AppRecord) -> str:
    """Author identity is the signing certificate fingerprint."""
    return record.certificate.fingerprint


def load_stoplist(path: str | Path) -> frozenset[str]:
    """Stoplist file: one token per line; blank lines and '#' comments ignored."""
    tokens = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            token = line.strip().lower()
            if token and not token.startswith("#"):
                tokens.add(token)
    return frozenset(tokens)
