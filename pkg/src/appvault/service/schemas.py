"""Pydantic request/response models for the HTTP API.

These mirror the canonical wire dictionaries produced by the library; the
response layer re-serializes validated models with the canonical encoder so
bodies stay byte-deterministic.
"""

from __future__ import annotations

from pydantic import BaseModel


class CertModel(BaseModel):
    fingerprint: str
    issuer: str
    subject: str
    public_key_hash: str


class ComponentsModel(BaseModel):
    activities: list[str]
    services: list[str]
    receivers: list[str]
    providers: list[str]


class CrawlModel(BaseModel):
    category: str
    description: str
    screenshots: list[str]
    reviews: list[str]
    score: float
    whats_new: str
    updated_date: str
    file_size: int
    install_count: int
    version: str
    required_android_version: str
    price: float
    content_rating: str
    developer: str
    similar_apps: list[str]
    market: str


class MethodModel(BaseModel):
    id: str
    blocks: list[tuple[int, int]]
    edges: list[tuple[int, int]]
    loop_depth: list[tuple[int, int]]


class AppRecordModel(BaseModel):
    sha256: str
    package_name: str
    app_name: str
    version_code: int
    version_name: str
    certificate: CertModel
    compile_date: str
    components: ComponentsModel
    declared_permissions: list[str]
    requested_permissions: list[str]
    libraries: list[str]
    invoked_apis: list[str]
    strings: list[str]
    invoked_packages: list[str]
    files: list[tuple[str, str]]
    methods: list[MethodModel]
    detections: list[tuple[str, str]]
    market: str
    min_sdk: int | None = None
    max_sdk: int | None = None
    target_sdk: int | None = None
    crawl: CrawlModel | None = None
    markets: list[str] | None = None


class ManifestModel(BaseModel):
    theta: float
    tau_m: float
    blocking: bool
    enabled_kinds: list[str]
    stoplist: list[str]
    corpus_digest: str
    record_count: int
    built_at: str


class HealthModel(ManifestModel):
    status: str


class NodeModel(BaseModel):
    id: str
    kind: str


class EdgeModel(BaseModel):
    rel: str
    src: str
    src_kind: str
    dst: str
    dst_kind: str
    prob: float | None = None


class SubgraphModel(BaseModel):
    nodes: list[NodeModel]
    edges: list[EdgeModel]


class PiggybackModel(BaseModel):
    package_name: str
    version_code: int
    original: str
    variant: str
    cert_original: str
    cert_variant: str
    code_sim: float | None = None


class ChainLinkModel(BaseModel):
    sha256: str
    version_code: int
    is_malware: bool


class UpdateAttackModel(BaseModel):
    package_name: str
    fingerprint: str | None = None
    chain: list[ChainLinkModel]
    first_malicious_version: int


class MarketReplicationModel(BaseModel):
    market: str
    app_count: int
    replicated_count: int
    replication_ratio: float
    shared: dict[str, int]


class CentroidModel(BaseModel):
    app: str
    method_id: str
    cx: float
    cy: float
    cz: float
    weight: int


class SignatureClusterModel(BaseModel):
    representative: CentroidModel
    support_in_family: float
    support_in_benign: float
    members: list[tuple[str, str]]


class FamilySignatureModel(BaseModel):
    family: str
    clusters: list[SignatureClusterModel]


class DistributionRowModel(BaseModel):
    bucket: str
    app_count: int
    malware_count: int


class DistributionModel(BaseModel):
    dimension: str
    rows: list[DistributionRowModel]


class IngestResultModel(BaseModel):
    ingested: int
    record_count: int
