"""Importance scoring and chronological biography assembly.

A handscroll's biography lists every figure who touched it (painter,
sealers, inscription authors, historian-added ones), each with dated and
undated seal/inscription aggregates, an importance score, and a rank
tier; plus the events those figures shared. Importance combines painting
relevance, degree of discussion in ancient literature, and social
identity, each term weighted by a historian-adjustable coefficient.

Biographies are immutable values: ``customize`` returns a new version
and appends to the audit log, so historian edits always stay traceable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import EngineConfig, ScoringConfig
from .corpus import Corpus, Identity, NotFoundError, canonical_dumps


class BiographyError(ValueError):
    pass


KIND_PAINTER = "painter"
KIND_COLLECTOR = "collector_appreciator"
KIND_ADDED = "historian_added"


# ---------------------------------------------------------------------------
# Scoring primitives


@dataclass(frozen=True)
class ImportanceInputs:
    """Raw material for one figure's score.

    r0 encodes pioneer/representative standing of the figure's painting
    school; r1..r3 are counts (paintings authored, times his paintings
    were appreciated, paintings he appreciated). ``literature_mentions``
    is the count of mentions in ancient literature.
    """

    r0: float = 0.0
    r1: int = 0
    r2: int = 0
    r3: int = 0
    literature_mentions: int = 0
    identities: tuple[Identity, ...] = ()
    dynasty: str | None = None

    def __post_init__(self):
        for name in ("r1", "r2", "r3", "literature_mentions"):
            if getattr(self, name) < 0:
                raise BiographyError(f"{name} must be >= 0")
        if self.r0 < 0:
            raise BiographyError("r0 must be >= 0")


def painting_relevance(inputs: ImportanceInputs, cfg: ScoringConfig | None = None) -> float:
    """R = w0*r0 + sum_i w_i * log(1 + r_i) for i in 1..3.

    The guarded logarithm keeps zero counts well-defined (they are the
    common case). Qing-dynasty figures get w1..w3 damped to balance the
    era's sheer volume of surviving material.
    """
    cfg = cfg or ScoringConfig()
    w0, w1, w2, w3 = cfg.relevance_weights
    damp = cfg.qing_damping if inputs.dynasty == "Qing" else 1.0
    return (
        w0 * inputs.r0
        + damp * w1 * math.log1p(inputs.r1)
        + damp * w2 * math.log1p(inputs.r2)
        + damp * w3 * math.log1p(inputs.r3)
    )


def discussion_degree(mention_count: int | float) -> float:
    """D = log(1 + d), d = mentions in ancient literature."""
    if mention_count < 0:
        raise BiographyError("mention count must be >= 0")
    return math.log1p(mention_count)


def identity_score(identities: tuple[Identity, ...], cfg: ScoringConfig | None = None) -> float:
    """I = sum of identity values: collector 10, literati 10, official 0..20."""
    cfg = cfg or ScoringConfig()
    total = 0.0
    for ident in identities:
        if ident.kind == "collector":
            total += cfg.collector_score
        elif ident.kind == "literati":
            total += cfg.literati_score
        elif ident.kind == "official":
            if ident.rank is None or not 0 <= ident.rank <= cfg.official_rank_max:
                raise BiographyError(f"official rank out of range: {ident.rank}")
            total += ident.rank
    return total


def importance(
    relevance: float,
    discussion: float,
    identity: float,
    lambdas: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> float:
    """S = l1*R + l2*D + l3*I; all coefficients default to 1."""
    l1, l2, l3 = lambdas
    return l1 * relevance + l2 * discussion + l3 * identity


# ---------------------------------------------------------------------------
# Biography assembly


@dataclass(frozen=True)
class BiographyEntry:
    figure_id: str
    name: str
    kind: str  # painter | collector_appreciator | historian_added
    birth_year: int | None
    death_year: int | None
    dated_seals: tuple[tuple[int, int], ...]  # (year, count), year ascending
    undated_seal_count: int
    dated_inscriptions: tuple[tuple[int, int], ...]  # (year, char count)
    undated_inscription_count: int
    relevance: float
    discussion: float
    identity: float
    importance: float
    rank_tier: int
    manual_tier: int | None = None
    lifespan_flags: tuple[str, ...] = ()
    audit_note: str | None = None

    def first_activity_year(self) -> int | None:
        years = [y for y, _ in self.dated_seals] + [y for y, _ in self.dated_inscriptions]
        return min(years) if years else None

    def to_json(self) -> dict:
        return {
            "figure_id": self.figure_id,
            "name": self.name,
            "kind": self.kind,
            "birth_year": self.birth_year,
            "death_year": self.death_year,
            "dated_seals": [list(t) for t in self.dated_seals],
            "undated_seal_count": self.undated_seal_count,
            "dated_inscriptions": [list(t) for t in self.dated_inscriptions],
            "undated_inscription_count": self.undated_inscription_count,
            "relevance": self.relevance,
            "discussion": self.discussion,
            "identity": self.identity,
            "importance": self.importance,
            "rank_tier": self.rank_tier,
            "manual_tier": self.manual_tier,
            "lifespan_flags": list(self.lifespan_flags),
            "audit_note": self.audit_note,
        }


@dataclass(frozen=True)
class SharedEvent:
    figure_a: str
    figure_b: str
    type: str
    year: int | None
    event_id: str

    def to_json(self) -> dict:
        return {
            "figure_a": self.figure_a,
            "figure_b": self.figure_b,
            "type": self.type,
            "year": self.year,
            "event_id": self.event_id,
        }


@dataclass(frozen=True)
class Biography:
    handscroll_id: str
    entries: tuple[BiographyEntry, ...]
    shared_events: tuple[SharedEvent, ...]
    event_histogram: dict[str, int]
    lambdas: tuple[float, float, float]
    version: int = 1
    audit_log: tuple[str, ...] = ()

    def entry(self, figure_id: str) -> BiographyEntry:
        for e in self.entries:
            if e.figure_id == figure_id:
                return e
        raise NotFoundError(figure_id)

    def to_json(self) -> dict:
        return {
            "handscroll_id": self.handscroll_id,
            "entries": [e.to_json() for e in self.entries],
            "shared_events": [e.to_json() for e in self.shared_events],
            "event_histogram": dict(sorted(self.event_histogram.items())),
            "lambdas": list(self.lambdas),
            "version": self.version,
            "audit_log": list(self.audit_log),
        }

    def serialize(self) -> str:
        return canonical_dumps(self.to_json())


def figure_inputs(corpus: Corpus, figure_id: str, cfg: ScoringConfig) -> ImportanceInputs:
    """Derive r0..r3 and the rest from the corpus for one figure."""
    person = corpus.dbs.persons.get(figure_id)
    if person is None:
        raise NotFoundError(figure_id)
    r0 = {
        None: 0.0,
        "representative": cfg.representative_score,
        "pioneer": cfg.pioneer_score,
    }[person.school_role]

    authored = appreciated_by_others = appreciated = 0
    for rec in corpus.handscrolls.values():
        if rec.painter_id == figure_id:
            authored += 1
            appreciated_by_others += sum(
                1 for s in rec.seals if s.sealer_id not in (None, figure_id)
            )
            appreciated_by_others += sum(
                1 for i in rec.inscriptions if i.author_id not in (None, figure_id)
            )
        else:
            touched = any(s.sealer_id == figure_id for s in rec.seals) or any(
                i.author_id == figure_id for i in rec.inscriptions
            )
            if touched:
                appreciated += 1

    return ImportanceInputs(
        r0=r0,
        r1=authored,
        r2=appreciated_by_others,
        r3=appreciated,
        literature_mentions=person.literature_mentions,
        identities=person.identities,
        dynasty=person.dynasty,
    )


def _assign_tiers(
    scores: list[float], quantiles: tuple[float, ...]
) -> list[int]:
    """Tier 1 is the top band; cut points are score quantiles."""
    if not scores:
        return []
    cuts = [float(np.quantile(scores, q)) for q in sorted(quantiles, reverse=True)]
    tiers = []
    for s in scores:
        tier = 1
        for c in cuts:
            if s >= c:
                break
            tier += 1
        tiers.append(tier)
    return tiers


def _entry_sort_key(entry: BiographyEntry):
    # Known births first in year order; unknown births fall to the back,
    # ordered by first dated activity, then id for stability.
    if entry.birth_year is not None:
        return (0, entry.birth_year, entry.figure_id)
    first = entry.first_activity_year()
    return (1, first if first is not None else 10**9, entry.figure_id)


def _build_entry(
    corpus: Corpus,
    handscroll_id: str,
    figure_id: str,
    kind: str,
    cfg: ScoringConfig,
    lambdas: tuple[float, float, float],
    audit_note: str | None = None,
) -> BiographyEntry:
    rec = corpus.handscroll(handscroll_id)
    person = corpus.dbs.persons.get(figure_id)
    if person is None:
        raise NotFoundError(figure_id)

    dated_seals: dict[int, int] = {}
    undated_seals = 0
    for s in rec.seals:
        if s.sealer_id != figure_id:
            continue
        if s.timestamp_year is None:
            undated_seals += 1
        else:
            dated_seals[s.timestamp_year] = dated_seals.get(s.timestamp_year, 0) + 1

    dated_ins: list[tuple[int, int]] = []
    undated_ins = 0
    for ins in rec.inscriptions:
        if ins.author_id != figure_id:
            continue
        if ins.timestamp_year is None:
            undated_ins += 1
        else:
            dated_ins.append((ins.timestamp_year, len(ins.text)))

    flags = []
    if person.birth_year is not None and person.death_year is not None:
        for year in sorted(set(dated_seals) | {y for y, _ in dated_ins}):
            if not person.birth_year <= year <= person.death_year:
                flags.append(
                    f"dated activity {year} outside lifespan "
                    f"({person.birth_year}-{person.death_year})"
                )

    inputs = figure_inputs(corpus, figure_id, cfg)
    r = painting_relevance(inputs, cfg)
    d = discussion_degree(inputs.literature_mentions)
    i = identity_score(inputs.identities, cfg)
    return BiographyEntry(
        figure_id=figure_id,
        name=person.name,
        kind=kind,
        birth_year=person.birth_year,
        death_year=person.death_year,
        dated_seals=tuple(sorted(dated_seals.items())),
        undated_seal_count=undated_seals,
        dated_inscriptions=tuple(sorted(dated_ins)),
        undated_inscription_count=undated_ins,
        relevance=r,
        discussion=d,
        identity=i,
        importance=importance(r, d, i, lambdas),
        rank_tier=0,  # filled by _finalize
        lifespan_flags=tuple(flags),
        audit_note=audit_note,
    )


def _finalize(
    corpus: Corpus,
    handscroll_id: str,
    entries: list[BiographyEntry],
    lambdas: tuple[float, float, float],
    cfg: ScoringConfig,
    version: int,
    audit_log: tuple[str, ...],
) -> Biography:
    entries = sorted(entries, key=_entry_sort_key)
    scores = [e.importance for e in entries]
    tiers = _assign_tiers(scores, cfg.tier_quantiles)
    entries = [
        replace(e, rank_tier=e.manual_tier if e.manual_tier is not None else t)
        for e, t in zip(entries, tiers)
    ]

    present = {e.figure_id for e in entries}
    shared: list[SharedEvent] = []
    histogram: dict[str, int] = {}
    for event in corpus.dbs.events:
        members = sorted(set(event.participants) & present)
        if len(members) < 2:
            continue
        histogram[event.type] = histogram.get(event.type, 0) + 1
        for ai in range(len(members)):
            for bi in range(ai + 1, len(members)):
                shared.append(SharedEvent(
                    figure_a=members[ai], figure_b=members[bi],
                    type=event.type, year=event.year, event_id=event.id,
                ))
    shared.sort(key=lambda s: (s.figure_a, s.figure_b, s.event_id))

    return Biography(
        handscroll_id=handscroll_id,
        entries=tuple(entries),
        shared_events=tuple(shared),
        event_histogram=histogram,
        lambdas=lambdas,
        version=version,
        audit_log=audit_log,
    )


def assemble_biography(
    corpus: Corpus,
    handscroll_id: str,
    config: EngineConfig | None = None,
    lambdas: tuple[float, float, float] | None = None,
) -> Biography:
    """Build the biography of one handscroll from its annotations.

    Figures are the painter plus every matched sealer and inscription
    author. Historian additions enter later through ``customize``.
    """
    config = config or EngineConfig()
    cfg = config.scoring
    lambdas = lambdas or cfg.lambdas
    rec = corpus.handscroll(handscroll_id)

    figure_ids: list[str] = []
    if rec.painter_id is not None:
        figure_ids.append(rec.painter_id)
    for s in rec.seals:
        if s.sealer_id is not None and s.sealer_id not in figure_ids:
            figure_ids.append(s.sealer_id)
    for ins in rec.inscriptions:
        if ins.author_id is not None and ins.author_id not in figure_ids:
            figure_ids.append(ins.author_id)

    entries = [
        _build_entry(
            corpus, handscroll_id, fid,
            KIND_PAINTER if fid == rec.painter_id else KIND_COLLECTOR,
            cfg, lambdas,
        )
        for fid in figure_ids
    ]
    return _finalize(corpus, handscroll_id, entries, lambdas, cfg, 1, ())


# ---------------------------------------------------------------------------
# Historian customization


@dataclass(frozen=True)
class CustomizeAction:
    kind: str  # add_figure | remove_figure | set_lambda | set_manual_tier
    figure_id: str | None = None
    lambdas: tuple[float, float, float] | None = None
    tier: int | None = None
    note: str = ""

    @classmethod
    def from_json(cls, raw: dict) -> "CustomizeAction":
        kind = raw.get("kind")
        if kind not in ("add_figure", "remove_figure", "set_lambda", "set_manual_tier"):
            raise BiographyError(f"unknown customize action {kind!r}")
        lambdas = raw.get("lambdas")
        return cls(
            kind=kind,
            figure_id=raw.get("figure_id"),
            lambdas=tuple(float(v) for v in lambdas) if lambdas is not None else None,
            tier=raw.get("tier"),
            note=raw.get("note", ""),
        )


def customize(
    corpus: Corpus,
    biography: Biography,
    action: CustomizeAction,
    config: EngineConfig | None = None,
) -> Biography:
    """Apply one historian action and return the next biography version."""
    config = config or EngineConfig()
    cfg = config.scoring
    rec = corpus.handscroll(biography.handscroll_id)
    entries = list(biography.entries)
    lambdas = biography.lambdas

    if action.kind == "add_figure":
        if action.figure_id is None:
            raise BiographyError("add_figure needs a figure_id")
        if any(e.figure_id == action.figure_id for e in entries):
            raise BiographyError(f"figure {action.figure_id!r} already present")
        note = action.note or "added by historian"
        entries.append(_build_entry(
            corpus, biography.handscroll_id, action.figure_id, KIND_ADDED,
            cfg, lambdas, audit_note=note,
        ))
        log_line = f"add_figure {action.figure_id}"
    elif action.kind == "remove_figure":
        if action.figure_id == rec.painter_id:
            raise BiographyError("refusing to remove the painter from the biography")
        before = len(entries)
        entries = [e for e in entries if e.figure_id != action.figure_id]
        if len(entries) == before:
            raise NotFoundError(action.figure_id)
        log_line = f"remove_figure {action.figure_id}"
    elif action.kind == "set_lambda":
        if action.lambdas is None:
            raise BiographyError("set_lambda needs three coefficients")
        lambdas = action.lambdas
        entries = [
            replace(e, importance=importance(e.relevance, e.discussion, e.identity, lambdas))
            for e in entries
        ]
        log_line = f"set_lambda {lambdas}"
    elif action.kind == "set_manual_tier":
        if action.figure_id is None or action.tier is None:
            raise BiographyError("set_manual_tier needs figure_id and tier")
        found = False
        for idx, e in enumerate(entries):
            if e.figure_id == action.figure_id:
                entries[idx] = replace(e, manual_tier=action.tier)
                found = True
        if not found:
            raise NotFoundError(action.figure_id)
        log_line = f"set_manual_tier {action.figure_id} -> {action.tier}"
    else:
        raise BiographyError(f"unknown customize action {action.kind!r}")

    return _finalize(
        corpus, biography.handscroll_id, entries, lambdas, cfg,
        biography.version + 1, biography.audit_log + (log_line,),
    )
