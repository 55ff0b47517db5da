import pytest

from appvault.graph import BuildConfig, build_graph
from appvault.synthgen import Profile, generate

# Profile used by the acceptance fact-recovery criterion: 500 apps, 4 markets,
# 25 piggyback pairs, 15 update-attack chains, 5 families with payloads.
ACCEPTANCE_PROFILE = Profile()

THRESHOLD_PROFILE = Profile(
    apps=40,
    markets=1,
    families=0,
    piggyback_pairs=0,
    update_attack_chains=0,
    clone_similarities=(0.85, 0.9, 0.95),
    replicated_fraction=0.0,
    malware_noise_fraction=0.0,
)


@pytest.fixture(scope="session")
def seed1():
    return generate(1, ACCEPTANCE_PROFILE)


@pytest.fixture(scope="session")
def seed1_graph(seed1):
    records, _ = seed1
    return build_graph(records, BuildConfig())


@pytest.fixture(scope="session")
def threshold_corpus():
    return generate(7, THRESHOLD_PROFILE)


@pytest.fixture(scope="session")
def threshold_graph(threshold_corpus):
    records, _ = threshold_corpus
    return build_graph(records, BuildConfig())
