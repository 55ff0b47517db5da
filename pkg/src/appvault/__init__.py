"""appvault: a knowledge-graph engine for app-metadata corpora.

Ingests newline-delimited app records, builds a graph of apps, markets,
malware families, authors, libraries, and categories connected by
deterministic and probabilistic (similarity) relationships, extracts facts
(piggybacked apps, update attacks, market replication, family code
signatures), and serves it all over HTTP and a CLI.
"""

from .attributes import (
    DEFAULT_STOPLIST,
    FamilyLabel,
    MethodCentroid,
    UNLABELED,
    author_of,
    compute_centroid,
    is_malware,
    normalize_family,
)
from .facts import (
    FamilySignature,
    MarketReplicationFact,
    PiggybackFact,
    UpdateAttackFact,
    find_piggybacked,
    find_update_attacks,
    localize_malicious_code,
    market_replication,
)
from .graph import (
    BuildConfig,
    Edge,
    Entity,
    EntityKind,
    Graph,
    Manifest,
    Subgraph,
    UnknownEntityError,
    build_graph,
)
from .query import Conjunct, FilterQuery, QueryError, evaluate, parse_filter
from .records import (
    AppRecord,
    CertIdentity,
    CorpusError,
    CrawlInfo,
    MethodCfg,
    RecordError,
    canonical_serialize,
    parse_corpus,
)
from .similarity import (
    SimilarityScore,
    attribute_similarity,
    cdg,
    code_similarity,
    jaccard,
    market_similarity,
)
from .stats import DistributionReport, distribution
from .synthgen import Profile, ProfileError, generate

__version__ = "0.1.0"
