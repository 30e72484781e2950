"""Engine configuration.

Everything tunable lives here as plain dataclasses with the defaults used
throughout the test suite. A single JSON file can override any subset of
fields (`EngineConfig.from_file`); unknown keys are rejected so typos in a
deployment config fail loudly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

# Closed enumeration of dynasty labels with year ranges, used for the
# era-based candidate filter and for clustering sealers in element stats.
DEFAULT_DYNASTIES: dict[str, tuple[int, int]] = {
    "Tang": (618, 907),
    "FiveDynasties": (907, 960),
    "Song": (960, 1279),
    "Jin": (1115, 1234),
    "Yuan": (1271, 1368),
    "Ming": (1368, 1644),
    "Qing": (1636, 1912),
    "Modern": (1912, 2100),
}


@dataclass(frozen=True)
class TaggerConfig:
    """Sliding-window defaults for long-inscription tagging."""

    window: int = 126
    stride: int = 63  # 50% overlap: every interior character gets >= 2 votes


@dataclass(frozen=True)
class LshConfig:
    tables: int = 8
    bits: int = 16
    # Probe candidates taken in code-distance order before exact re-ranking.
    candidate_budget: int = 500


@dataclass(frozen=True)
class LayoutConfig:
    gradient_weight: float = 0.7  # alpha
    saliency_weight: float = 0.3  # beta
    text_min_ratio: float = 0.75
    block_max_width: int = 128
    core_fraction: float = 1.0 / 3.0
    # Strip top maps to the outer radius by default (longer circumference).
    top_to_outer: bool = True
    # Second semicircle follows the angular-continuity convention; set to
    # True to mirror it instead.
    mirror_second_half: bool = False


@dataclass(frozen=True)
class ScoringConfig:
    pioneer_score: float = 10.0  # r0 for school pioneers
    representative_score: float = 5.0  # r0 for school representatives
    collector_score: float = 10.0
    literati_score: float = 10.0
    official_rank_max: float = 20.0
    qing_damping: float = 0.5  # multiplies w1..w3 for Qing-dynasty figures
    relevance_weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    lambdas: tuple[float, float, float] = (1.0, 1.0, 1.0)
    # Tier cut points as descending quantiles of the score distribution.
    tier_quantiles: tuple[float, ...] = (0.75, 0.5, 0.25)


@dataclass(frozen=True)
class EngineConfig:
    dynasties: dict[str, tuple[int, int]] = field(
        default_factory=lambda: dict(DEFAULT_DYNASTIES)
    )
    tagger: TaggerConfig = field(default_factory=TaggerConfig)
    lsh: LshConfig = field(default_factory=LshConfig)
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)

    def dynasty_range(self, label: str) -> tuple[int, int] | None:
        return self.dynasties.get(label)

    def content_hash(self) -> str:
        """Stable hash of the configuration, used to key layout caches."""
        blob = json.dumps(asdict(self), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_file(cls, path: str | Path) -> "EngineConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "EngineConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = set(raw) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs: dict = {}
        for name, value in raw.items():
            if name == "dynasties":
                kwargs[name] = {k: (int(a), int(b)) for k, (a, b) in value.items()}
                continue
            sub_types = {
                "tagger": TaggerConfig,
                "lsh": LshConfig,
                "layout": LayoutConfig,
                "scoring": ScoringConfig,
            }
            cls_ = sub_types[name]
            sub_known = {f.name for f in fields(cls_)}
            bad = set(value) - sub_known
            if bad:
                raise ValueError(f"unknown config keys in {name!r}: {sorted(bad)}")
            coerced = {
                k: tuple(v) if isinstance(v, list) else v for k, v in value.items()
            }
            kwargs[name] = cls_(**coerced)
        return cls(**kwargs)
