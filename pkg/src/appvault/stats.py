"""Corpus distribution reports: apps and malware counted by year, API level,
category, market, family, and malware-authorship buckets."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Any

from .attributes import is_malware
from .graph import Graph

DIMENSIONS = ("year", "api_level", "category", "market", "family", "authorship_bucket")

AUTHORSHIP_BUCKETS = ("1-10", "11-100", "101-500", "501-1000", ">1000")


@dataclass(frozen=True)
class DistributionRow:
    bucket: str
    app_count: int
    malware_count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "bucket": self.bucket,
            "app_count": self.app_count,
            "malware_count": self.malware_count,
        }


@dataclass(frozen=True)
class DistributionReport:
    dimension: str
    rows: tuple[DistributionRow, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"dimension": self.dimension, "rows": [r.to_dict() for r in self.rows]}

    def to_csv(self) -> str:
        import csv

        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["bucket", "app_count", "malware_count"])
        for row in self.rows:
            writer.writerow([row.bucket, row.app_count, row.malware_count])
        return buf.getvalue()


def authorship_bucket(malware_count: int) -> str:
    if malware_count <= 10:
        return "1-10"
    if malware_count <= 100:
        return "11-100"
    if malware_count <= 500:
        return "101-500"
    if malware_count <= 1000:
        return "501-1000"
    return ">1000"


def _partition_rows(counts: dict[str, tuple[int, int]], key=None) -> tuple[DistributionRow, ...]:
    labels = sorted(counts, key=key)
    return tuple(DistributionRow(b, counts[b][0], counts[b][1]) for b in labels)


def distribution(g: Graph, dimension: str) -> DistributionReport:
    """Bucketed (app_count, malware_count) rows for one dimension.

    year/api_level/category/market partition the corpus (an app lacking the
    attribute lands in "unknown"), so app counts sum to the corpus size.
    family rows are sorted by descending malware count; authorship buckets
    count malware authors (app_count is the number of authors in the range,
    malware_count their total malware).
    """
    if dimension not in DIMENSIONS:
        raise ValueError(f"unknown dimension {dimension!r}")

    if dimension == "family":
        rows = [
            DistributionRow(name, len(members), len(members))
            for name, members in g.families().items()
        ]
        rows.sort(key=lambda r: (-r.malware_count, r.bucket))
        return DistributionReport(dimension, tuple(rows))

    if dimension == "authorship_bucket":
        per_author: dict[str, int] = {}
        for r in g.records.values():
            if is_malware(r.detections):
                fp = r.certificate.fingerprint
                per_author[fp] = per_author.get(fp, 0) + 1
        buckets: dict[str, tuple[int, int]] = {}
        for count in per_author.values():
            label = authorship_bucket(count)
            authors, malware = buckets.get(label, (0, 0))
            buckets[label] = (authors + 1, malware + count)
        rows = tuple(
            DistributionRow(label, *buckets[label])
            for label in AUTHORSHIP_BUCKETS
            if label in buckets
        )
        return DistributionReport(dimension, rows)

    counts: dict[str, tuple[int, int]] = {}
    for r in g.records.values():
        if dimension == "year":
            bucket = str(r.compile_date.year) if r.compile_date else "unknown"
        elif dimension == "api_level":
            bucket = str(r.target_sdk) if r.target_sdk is not None else "unknown"
        elif dimension == "category":
            bucket = r.crawl.category if r.crawl is not None else "unknown"
        else:  # market
            bucket = r.market
        apps, malware = counts.get(bucket, (0, 0))
        counts[bucket] = (apps + 1, malware + (1 if is_malware(r.detections) else 0))

    if dimension == "api_level":
        key = lambda b: (b == "unknown", int(b) if b.isdigit() else 0, b)
    else:
        key = None
    return DistributionReport(dimension, _partition_rows(counts, key))
