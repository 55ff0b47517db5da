"""Seeded synthetic-corpus generator with machine-readable ground truth.

Every planted structure (piggyback pair, update-attack chain, clone pair,
family payload method, market overlap) is recorded in a ground-truth object
so extractors can be checked for exact precision and recall. Clone pairs are
constructed by copying a method and fixing the shared/total statement-weight
ratio, so the expected code similarity is an exact rational, not a sample.

Collision freedom is structural, not statistical:

* plain methods are single chains (mean out-degree < 1) whose (length,
  loop-depth) class comes from a geometrically spaced grid, so chains from
  different cells always differ by more than the matching threshold;
* each app's chain methods use a cell combination unique to that app (shared
  only with its own planted copies), and no chain carries more than ~60% of
  an app's weight, so accidental matches never reach the retention threshold;
* planted payloads and clone-shared methods are "branchy" loop CFGs (mean
  out-degree > 1.2), unreachable by any chain under the threshold, and each
  plant gets its own diamond-count/loop-depth signature.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
from dataclasses import dataclass
from datetime import date, timedelta
from fractions import Fraction
from pathlib import Path
from typing import Any

from .canon import canonical_line
from .records import AppRecord, CertIdentity, Components, CrawlInfo, MethodCfg, write_corpus

FAMILY_POOL = (
    "kuguo",
    "airpush",
    "dowgin",
    "smsreg",
    "secapk",
    "gappusin",
    "revmob",
    "leadbolt",
    "youmi",
    "domob",
)

CATEGORY_POOL = (
    "books",
    "communication",
    "education",
    "entertainment",
    "finance",
    "games",
    "lifestyle",
    "music",
    "productivity",
    "social",
    "tools",
    "travel",
)

_NAME_HEADS = ("Photo", "Chat", "Note", "Music", "File", "Map", "Game", "Cloud", "News", "Task")
_NAME_TAILS = ("Box", "Mate", "Hub", "Pro", "Lite", "Go", "Master", "Plus", "Now", "Keeper")

_API_POOL = tuple(f"android.api.Service{i:02d}" for i in range(40))
_PERM_POOL = tuple(f"android.permission.PERM_{i:02d}" for i in range(15))
_LIB_POOL = tuple(f"lib.vendor.sdk{i:02d}" for i in range(12))

# Chain-method cell grid; adjacent classes are spaced so that two chains from
# different cells always have cdg > 0.01.
_CHAIN_LENGTHS = (2, 3, 4, 6, 8, 12, 16, 24, 32)
_CHAIN_DEPTHS = (0, 1, 2, 4, 8, 16, 32, 64)
_CELLS = tuple(itertools.product(_CHAIN_LENGTHS, _CHAIN_DEPTHS))

_MAX_PLANTS = 40  # branchy-signature separation degrades beyond this


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class Profile:
    """Counts for the generated corpus and its planted structures."""

    apps: int = 500
    markets: int = 4
    families: int = 5
    family_samples: int = 10
    piggyback_pairs: int = 25
    update_attack_chains: int = 15
    chain_length: int = 3
    clone_similarities: tuple[float, ...] = ()
    replicated_fraction: float = 0.2
    malware_noise_fraction: float = 0.1

    def __post_init__(self):
        counts = {
            "apps": self.apps,
            "markets": self.markets,
            "families": self.families,
            "family_samples": self.family_samples,
            "piggyback_pairs": self.piggyback_pairs,
            "update_attack_chains": self.update_attack_chains,
        }
        for name, value in counts.items():
            if value < 0:
                raise ProfileError(f"{name} must be >= 0")
        if self.markets < 1:
            raise ProfileError("markets must be >= 1")
        if self.chain_length < 2:
            raise ProfileError("chain_length must be >= 2")
        if self.families > 0 and self.family_samples < 1:
            raise ProfileError("family_samples must be >= 1")
        for frac in (self.replicated_fraction, self.malware_noise_fraction):
            if not 0.0 <= frac <= 1.0:
                raise ProfileError("fractions must be in [0, 1]")
        for s in self.clone_similarities:
            if not 0.0 < s <= 1.0:
                raise ProfileError(f"clone similarity {s} outside (0, 1]")
        if self.planted_apps > self.apps:
            raise ProfileError(
                f"planted structures need {self.planted_apps} apps, profile allows {self.apps}"
            )
        if self.families + len(self.clone_similarities) > _MAX_PLANTS:
            raise ProfileError(f"at most {_MAX_PLANTS} planted payloads/clone pairs supported")

    @property
    def planted_apps(self) -> int:
        return (
            2 * self.piggyback_pairs
            + self.update_attack_chains * self.chain_length
            + self.families * self.family_samples
            + 2 * len(self.clone_similarities)
        )

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Profile":
        known = {
            "apps",
            "markets",
            "families",
            "family_samples",
            "piggyback_pairs",
            "update_attack_chains",
            "chain_length",
            "clone_similarities",
            "replicated_fraction",
            "malware_noise_fraction",
        }
        unknown = set(d) - known
        if unknown:
            raise ProfileError(f"unknown profile keys: {sorted(unknown)}")
        kwargs = dict(d)
        if "clone_similarities" in kwargs:
            kwargs["clone_similarities"] = tuple(kwargs["clone_similarities"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "Profile":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict[str, Any]:
        return {
            "apps": self.apps,
            "markets": self.markets,
            "families": self.families,
            "family_samples": self.family_samples,
            "piggyback_pairs": self.piggyback_pairs,
            "update_attack_chains": self.update_attack_chains,
            "chain_length": self.chain_length,
            "clone_similarities": list(self.clone_similarities),
            "replicated_fraction": self.replicated_fraction,
            "malware_noise_fraction": self.malware_noise_fraction,
        }


def _spread(total: int, parts: int) -> list[int]:
    """Split total into `parts` positive integers, deterministic."""
    base, rem = divmod(total, parts)
    return [base + 1] * rem + [base] * (parts - rem)


def chain_method(method_id: str, cell: tuple[int, int], weight: int) -> MethodCfg:
    """Linear chain CFG: length and uniform loop depth come from the cell."""
    length, depth = cell
    counts = _spread(weight, length)
    return MethodCfg(
        id=method_id,
        blocks=tuple((i, counts[i]) for i in range(length)),
        edges=tuple((i, i + 1) for i in range(length - 1)),
        loop_depth=tuple((i, depth) for i in range(length)),
    )


def branchy_method(method_id: str, plant_index: int, weight: int) -> MethodCfg:
    """Looping diamond-chain CFG with mean out-degree > 1.2; each plant index
    yields a distinct diamond-count/loop-depth signature."""
    diamonds = 2 + plant_index
    depth = 3 + 2 * plant_index
    n = 3 * diamonds + 1
    counts = _spread(weight, n)
    edges = []
    for i in range(diamonds):
        head, left, right, nxt = 3 * i, 3 * i + 1, 3 * i + 2, 3 * (i + 1)
        edges += [(head, left), (head, right), (left, nxt), (right, nxt), (nxt, head)]
    return MethodCfg(
        id=method_id,
        blocks=tuple((i, counts[i]) for i in range(n)),
        edges=tuple(edges),
        loop_depth=tuple((i, depth) for i in range(n)),
    )


_GENERIC_DETECTIONS = (("scanner.alpha", "Android.Generic"), ("scanner.beta", "Trojan"))


def _family_detections(family: str) -> tuple[tuple[str, str], ...]:
    pretty = family.capitalize()
    return (
        ("scanner.alpha", f"Trojan.{pretty}.A"),
        ("scanner.beta", f"Android/{pretty}"),
    )


class _Generator:
    def __init__(self, seed: int, profile: Profile):
        self.seed = seed
        self.profile = profile
        self.rng = random.Random(seed)
        self.records: list[AppRecord] = []
        self.market_names = [f"market{i:02d}" for i in range(profile.markets)]
        self.market_members: dict[str, list[str]] = {m: [] for m in self.market_names}
        self.packages: list[str] = []
        self._counter = 0
        self._cell_pairs = itertools.combinations(range(len(_CELLS)), 2)
        self.truth: dict[str, Any] = {
            "seed": seed,
            "profile": profile.to_dict(),
            "piggyback_pairs": [],
            "update_attack_chains": [],
            "clone_pairs": [],
            "families": {},
            "family_labels": {},
            "market_members": {},
        }

    # -- identities ---------------------------------------------------------

    def _sha(self) -> str:
        self._counter += 1
        return hashlib.sha256(f"app:{self.seed}:{self._counter}".encode()).hexdigest()

    def _cert(self, name: str) -> CertIdentity:
        fingerprint = hashlib.sha256(f"cert:{self.seed}:{name}".encode()).hexdigest()
        return CertIdentity(
            fingerprint=fingerprint,
            issuer=f"CN={name} CA",
            subject=f"CN={name}",
            public_key_hash=hashlib.sha256(f"pk:{self.seed}:{name}".encode()).hexdigest()[:40],
        )

    def _next_cell_pair(self) -> tuple[int, int]:
        try:
            return next(self._cell_pairs)
        except StopIteration:
            raise ProfileError("profile too large: chain-cell combinations exhausted") from None

    def _app_name(self) -> str:
        return f"{self.rng.choice(_NAME_HEADS)} {self.rng.choice(_NAME_TAILS)}"

    def _compile_date(self) -> date:
        return date(2012, 1, 1) + timedelta(days=self.rng.randrange(0, 3650))

    def _pick_markets(self, replicate: bool | None = None, fixed: str | None = None):
        primary = fixed if fixed is not None else self.rng.choice(self.market_names)
        if replicate is None:
            replicate = (
                len(self.market_names) > 1
                and self.rng.random() < self.profile.replicated_fraction
            )
        hosted = None
        if replicate and len(self.market_names) > 1:
            secondary = self.rng.choice([m for m in self.market_names if m != primary])
            hosted = frozenset({primary, secondary})
        return primary, hosted

    # -- record assembly ----------------------------------------------------

    def _crawl_for(self, app_name: str, compile_date: date, market: str, developer: str) -> CrawlInfo:
        rng = self.rng
        return CrawlInfo(
            category=rng.choice(CATEGORY_POOL),
            description=f"{app_name} keeps your day organized.",
            screenshots=(f"https://img.example.org/{app_name.replace(' ', '').lower()}/0.png",),
            reviews=(rng.choice(("Works great", "Could be better", "Love it", "Crashes sometimes")),),
            score=round(rng.uniform(1.0, 5.0), 1),
            whats_new="Bug fixes and performance improvements.",
            updated_date=compile_date + timedelta(days=rng.randrange(1, 200)),
            file_size=rng.randrange(500_000, 50_000_000),
            install_count=rng.randrange(100, 5_000_000),
            version=f"{rng.randrange(1, 9)}.{rng.randrange(0, 10)}",
            required_android_version="5.0 and up",
            price=0.0 if rng.random() < 0.9 else round(rng.uniform(0.5, 9.5), 2),
            content_rating=rng.choice(("Everyone", "Teen", "Mature 17+")),
            developer=developer,
            similar_apps=frozenset(self.rng.sample(self.packages, k=min(2, len(self.packages)))),
            market=market,
        )

    def _make_record(
        self,
        package: str,
        version_code: int,
        cert_name: str,
        methods: tuple[MethodCfg, ...],
        detections: tuple[tuple[str, str], ...] = (),
        market: str | None = None,
        replicate: bool | None = None,
        compile_date: date | None = None,
        app_name: str | None = None,
        invoked_packages: frozenset[str] = frozenset(),
    ) -> AppRecord:
        rng = self.rng
        sha = self._sha()
        primary, hosted = self._pick_markets(replicate=replicate, fixed=market)
        name = app_name if app_name is not None else self._app_name()
        compiled = compile_date if compile_date is not None else self._compile_date()
        cert = self._cert(cert_name)

        apis = frozenset(rng.sample(_API_POOL, k=rng.randrange(3, 9))) | frozenset(
            f"api.app.{sha[:12]}.{i}" for i in range(10)
        )
        perms = frozenset(rng.sample(_PERM_POOL, k=rng.randrange(2, 6))) | frozenset(
            f"app.permission.{sha[:10]}.{i}" for i in range(6)
        )
        libs = frozenset(rng.sample(_LIB_POOL, k=rng.randrange(1, 3))) | frozenset(
            {f"lib.app.{sha[:10]}"}
        )
        record = AppRecord(
            sha256=sha,
            package_name=package,
            app_name=name,
            version_code=version_code,
            version_name=f"{version_code}.0",
            certificate=cert,
            compile_date=compiled,
            min_sdk=rng.choice((16, 19, 21, 23)),
            max_sdk=None,
            target_sdk=rng.choice((23, 26, 28, 30, 33)),
            components=Components(
                activities=frozenset({f"{package}.MainActivity", f"{package}.SettingsActivity"}),
                services=frozenset({f"{package}.SyncService"}),
                receivers=frozenset({f"{package}.BootReceiver"}),
                providers=frozenset(),
            ),
            declared_permissions=frozenset({f"{package}.permission.ACCESS"}),
            requested_permissions=perms,
            libraries=libs,
            invoked_apis=apis,
            strings=frozenset({f"str.{sha[:10]}.{i}" for i in range(4)} | {"https://example.org"}),
            invoked_packages=invoked_packages,
            files=frozenset(
                {
                    ("classes.dex", hashlib.sha256(f"dex:{sha}".encode()).hexdigest()),
                    (f"res/{package}/layout.xml", hashlib.sha256(f"res:{sha}".encode()).hexdigest()),
                }
            ),
            methods=methods,
            detections=detections,
            crawl=(
                self._crawl_for(name, compiled, primary, cert.subject)
                if primary == self.market_names[0]
                else None
            ),
            market=primary,
            markets=hosted,
        )
        self.records.append(record)
        self.packages.append(package)
        for m in record.hosting_markets:
            self.market_members[m].append(sha)
        return record

    def _noise_methods(self) -> tuple[MethodCfg, ...]:
        """Two chains from a cell pair unique to this app, each carrying
        40-60% of the app's weight, so cross-app matches stay under 0.9."""
        i, j = self._next_cell_pair()
        total = self.rng.randrange(160, 241)
        w1 = total * self.rng.randrange(40, 61) // 100
        return (
            chain_method("m0", _CELLS[i], w1),
            chain_method("m1", _CELLS[j], total - w1),
        )

    # -- planted structures --------------------------------------------------

    def plant_piggybacks(self) -> None:
        for p in range(self.profile.piggyback_pairs):
            package = f"com.pig{p:03d}.app"
            version = self.rng.randrange(1, 60)
            name = self._app_name()
            i, j = self._next_cell_pair()
            core = (
                chain_method("core0", _CELLS[i], 55),
                chain_method("core1", _CELLS[j], 45),
            )
            extra_cell = _CELLS[(i + j) % len(_CELLS)]
            original_date = self._compile_date()
            original = self._make_record(
                package, version, f"pig{p:03d}-original", core,
                compile_date=original_date, app_name=name,
            )
            variant = self._make_record(
                package, version, f"pig{p:03d}-variant",
                core + (chain_method("extra", extra_cell, 10),),
                compile_date=original_date + timedelta(days=self.rng.randrange(30, 400)),
                app_name=name,
            )
            self.truth["piggyback_pairs"].append(
                {
                    "package_name": package,
                    "version_code": version,
                    "original": original.sha256,
                    "variant": variant.sha256,
                    "cert_original": original.certificate.fingerprint,
                    "cert_variant": variant.certificate.fingerprint,
                }
            )

    def plant_update_chains(self) -> None:
        for c in range(self.profile.update_attack_chains):
            package = f"com.upd{c:03d}.app"
            cert_name = f"upd{c:03d}"
            name = self._app_name()
            i, j = self._next_cell_pair()
            methods = (
                chain_method("m0", _CELLS[i], 60),
                chain_method("m1", _CELLS[j], 60),
            )
            benign_until = self.rng.randrange(1, self.profile.chain_length)
            base_date = self._compile_date()
            chain = []
            for version in range(1, self.profile.chain_length + 1):
                malicious = version > benign_until
                record = self._make_record(
                    package, version, cert_name, methods,
                    detections=_GENERIC_DETECTIONS if malicious else (),
                    compile_date=base_date + timedelta(days=90 * (version - 1)),
                    app_name=name,
                )
                chain.append(
                    {
                        "sha256": record.sha256,
                        "version_code": version,
                        "is_malware": malicious,
                    }
                )
            self.truth["update_attack_chains"].append(
                {
                    "package_name": package,
                    "fingerprint": self._cert(cert_name).fingerprint,
                    "chain": chain,
                    "first_malicious_version": benign_until + 1,
                }
            )

    def plant_families(self) -> None:
        for f in range(self.profile.families):
            family = FAMILY_POOL[f] if f < len(FAMILY_POOL) else f"family{f:02d}"
            payload_id = f"payload_{family}"
            payload = branchy_method(payload_id, plant_index=f, weight=120)
            members = []
            for s in range(self.profile.family_samples):
                cell = _CELLS[(f * self.profile.family_samples + s) % len(_CELLS)]
                noise = chain_method("filler", cell, self.rng.randrange(60, 101))
                record = self._make_record(
                    f"com.{family}.s{s:02d}", self.rng.randrange(1, 40),
                    f"{family}-dev{s:02d}", (payload, noise),
                    detections=_family_detections(family),
                )
                members.append(record.sha256)
                self.truth["family_labels"][record.sha256] = family
            self.truth["families"][family] = {
                "members": members,
                "payload_method": payload_id,
            }

    def plant_clone_pairs(self) -> None:
        plant_base = self.profile.families
        for p, requested in enumerate(self.profile.clone_similarities):
            ratio = Fraction(str(requested)).limit_denominator(10**6)
            shared_part, total_part = ratio.numerator, ratio.denominator
            unshared_part = total_part - shared_part
            scale = 1 if unshared_part == 0 else -(-40 // unshared_part)  # ceil
            total = total_part * scale
            shared_weight = shared_part * scale
            shared = branchy_method(f"shared{p}", plant_index=plant_base + p, weight=shared_weight)

            market = self.rng.choice(self.market_names)
            shas = []
            for side in ("a", "b"):
                methods: tuple[MethodCfg, ...] = (shared,)
                if unshared_part:
                    i, j = self._next_cell_pair()
                    cell = _CELLS[i if side == "a" else j]
                    methods += (chain_method("only", cell, total - shared_weight),)
                record = self._make_record(
                    f"com.clone{p:03d}.{side}", self.rng.randrange(1, 40),
                    f"clone{p:03d}-{side}", methods, market=market, replicate=False,
                )
                shas.append(record.sha256)
            a, b = sorted(shas)
            self.truth["clone_pairs"].append(
                {"a": a, "b": b, "code_sim": (2 * shared_weight) / (2 * total)}
            )

    def fill_noise(self) -> None:
        noise_count = self.profile.apps - self.profile.planted_apps
        planted_packages = list(self.packages)
        for n in range(noise_count):
            invoked = frozenset()
            if planted_packages and self.rng.random() < 0.05:
                invoked = frozenset({self.rng.choice(planted_packages)})
            detections = (
                _GENERIC_DETECTIONS
                if self.rng.random() < self.profile.malware_noise_fraction
                else ()
            )
            self._make_record(
                f"com.noise{n:04d}.app", self.rng.randrange(1, 100),
                f"noise{n:04d}", self._noise_methods(),
                detections=detections, invoked_packages=invoked,
            )

    def run(self) -> tuple[list[AppRecord], dict[str, Any]]:
        self.plant_piggybacks()
        self.plant_update_chains()
        self.plant_families()
        self.plant_clone_pairs()
        self.fill_noise()
        self.truth["market_members"] = {
            m: sorted(shas) for m, shas in self.market_members.items()
        }
        return self.records, self.truth


def generate(seed: int, profile: Profile) -> tuple[list[AppRecord], dict[str, Any]]:
    """Deterministic for a fixed seed: same records, same ground truth."""
    return _Generator(seed, profile).run()


def write_outputs(
    records: list[AppRecord], truth: dict[str, Any], out_dir: str | Path
) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus_path = out / "corpus.ndjson"
    truth_path = out / "ground_truth.json"
    write_corpus(records, corpus_path)
    with open(truth_path, "wb") as fh:
        fh.write(canonical_line(truth))
    return corpus_path, truth_path
