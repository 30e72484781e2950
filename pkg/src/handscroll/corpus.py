"""Canonical data model and persistence for handscrolls and the five
reference databases (persons, places, eras, events, seal gallery).

Storage is newline-delimited JSON, one file per entity kind, plus a
manifest; feature vectors live in sidecar binary files (see
``handscroll.vectors``). Files are written in canonical form (sorted
keys, compact separators, all schema fields present) so that
save(load(corpus)) is byte-identical and fixtures diff cleanly.

Ids are strings namespaced by source, e.g. ``cbdb:12345`` or
``npm:hs-0001``, so multi-database provenance stays visible. Years are
signed integers in the proleptic Gregorian calendar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from PIL import Image

from .carve import RegionAnnotation
from .chrono import EraTable
from .config import EngineConfig
from .entities import TAGS, EntityMention
from .vectors import read_vectors, write_vectors

SOURCE_LABELS = ("CBDB", "CHFSD", "PerAD", "PlaAD", "TAD")
IDENTITY_KINDS = ("collector", "literati", "official")
MANIFEST_NAME = "manifest.json"


class CorpusError(ValueError):
    pass


class SchemaError(CorpusError):
    def __init__(self, file: str, record_id: str, field_name: str, message: str):
        super().__init__(f"{file}: record {record_id!r}, field {field_name!r}: {message}")
        self.file = file
        self.record_id = record_id
        self.field = field_name


class DanglingReferenceError(CorpusError):
    def __init__(self, dangling: list[tuple[str, str, str]]):
        lines = [f"  {where}: {fieldname} -> {ref!r}" for where, fieldname, ref in dangling]
        super().__init__("dangling references:\n" + "\n".join(lines))
        self.dangling = dangling


class NotFoundError(KeyError):
    pass


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Records


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise CorpusError(f"degenerate rectangle {self}")

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}

    @classmethod
    def from_json(cls, raw: dict) -> "Rect":
        return cls(int(raw["x"]), int(raw["y"]), int(raw["w"]), int(raw["h"]))


@dataclass(frozen=True)
class SealAnnotation:
    box: Rect
    feature_index: int
    matched_seal_id: str | None = None
    sealer_id: str | None = None
    timestamp_year: int | None = None
    feature: np.ndarray | None = field(default=None, compare=False, repr=False)

    def to_json(self) -> dict:
        return {
            "box": self.box.to_json(),
            "feature_index": self.feature_index,
            "matched_seal_id": self.matched_seal_id,
            "sealer_id": self.sealer_id,
            "timestamp_year": self.timestamp_year,
        }


@dataclass(frozen=True)
class InscriptionRecord:
    id: str
    text: str
    author_id: str | None = None
    mentions: tuple[EntityMention, ...] = ()
    timestamp_year: int | None = None

    def __post_init__(self):
        last_end = 0
        for m in sorted(self.mentions, key=lambda m: m.start):
            if m.end > len(self.text):
                raise CorpusError(
                    f"inscription {self.id!r}: mention span ({m.start}, {m.end}) "
                    f"outside text of length {len(self.text)}"
                )
            if m.start < last_end:
                raise CorpusError(f"inscription {self.id!r}: overlapping mention spans")
            last_end = m.end

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "author_id": self.author_id,
            "timestamp_year": self.timestamp_year,
            "mentions": [
                {"start": m.start, "end": m.end, "tag": m.tag, "confidence": m.confidence}
                for m in self.mentions
            ],
        }


@dataclass(frozen=True)
class HandscrollRecord:
    id: str
    title: str
    image_ref: str
    core_region: Rect
    painter_id: str | None = None
    seals: tuple[SealAnnotation, ...] = ()
    inscriptions: tuple[InscriptionRecord, ...] = ()
    regions: tuple[RegionAnnotation, ...] = ()
    theme_text: str = ""
    painting_feature_index: int | None = None
    painting_feature: np.ndarray | None = field(default=None, compare=False, repr=False)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "image_ref": self.image_ref,
            "core_region": self.core_region.to_json(),
            "painter_id": self.painter_id,
            "seals": [s.to_json() for s in self.seals],
            "inscriptions": [i.to_json() for i in self.inscriptions],
            "regions": [{"x": r.x, "width": r.width, "kind": r.kind} for r in self.regions],
            "theme_text": self.theme_text,
            "painting_feature_index": self.painting_feature_index,
        }


@dataclass(frozen=True)
class Alias:
    name: str
    sources: frozenset[str]

    def to_json(self) -> dict:
        return {"name": self.name, "sources": sorted(self.sources)}


@dataclass(frozen=True)
class Identity:
    kind: str
    rank: float | None = None  # officials only, 0..20

    def __post_init__(self):
        if self.kind not in IDENTITY_KINDS:
            raise CorpusError(f"unknown identity kind {self.kind!r}")
        if self.kind == "official":
            if self.rank is None or not 0 <= self.rank <= 20:
                raise CorpusError(f"official rank must be in [0, 20], got {self.rank}")
        elif self.rank is not None:
            raise CorpusError(f"{self.kind} identity carries no rank")

    def to_json(self) -> dict:
        return {"kind": self.kind, "rank": self.rank}


@dataclass(frozen=True)
class Person:
    id: str
    name: str
    sources: frozenset[str]
    aliases: tuple[Alias, ...] = ()
    birth_year: int | None = None
    death_year: int | None = None
    dynasty: str | None = None
    identities: tuple[Identity, ...] = ()
    literature_mentions: int = 0
    school_role: str | None = None  # None | "representative" | "pioneer"

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "sources": sorted(self.sources),
            "aliases": [a.to_json() for a in self.aliases],
            "birth_year": self.birth_year,
            "death_year": self.death_year,
            "dynasty": self.dynasty,
            "identities": [i.to_json() for i in self.identities],
            "literature_mentions": self.literature_mentions,
            "school_role": self.school_role,
        }


@dataclass(frozen=True)
class PlaceRecord:
    id: str
    name: str
    sources: frozenset[str]
    aliases: tuple[Alias, ...] = ()
    modern_name: str | None = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "sources": sorted(self.sources),
            "aliases": [a.to_json() for a in self.aliases],
            "modern_name": self.modern_name,
        }


@dataclass(frozen=True)
class EventRecord:
    id: str
    participants: tuple[str, ...]
    type: str
    source: str
    year: int | None = None
    description: str = ""

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "participants": list(self.participants),
            "type": self.type,
            "source": self.source,
            "year": self.year,
            "description": self.description,
        }


@dataclass(frozen=True)
class SealGalleryEntry:
    id: str
    feature_index: int
    sealer_id: str | None = None
    content: str = ""
    feature: np.ndarray | None = field(default=None, compare=False, repr=False)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "feature_index": self.feature_index,
            "sealer_id": self.sealer_id,
            "content": self.content,
        }


# ---------------------------------------------------------------------------
# Reference databases


@dataclass(frozen=True)
class ReferenceDatabases:
    """Five source-tagged stores behind one lookup interface."""

    persons: dict[str, Person]
    places: dict[str, PlaceRecord]
    eras: EraTable
    events: tuple[EventRecord, ...]
    seal_gallery: dict[str, SealGalleryEntry]
    _person_alias: dict[str, list[tuple[str, frozenset[str]]]] = field(
        init=False, repr=False, compare=False)
    _place_alias: dict[str, list[tuple[str, frozenset[str]]]] = field(
        init=False, repr=False, compare=False)

    def __post_init__(self):
        person_alias: dict[str, list[tuple[str, frozenset[str]]]] = {}
        for p in self.persons.values():
            person_alias.setdefault(p.name.casefold(), []).append((p.id, p.sources))
            for a in p.aliases:
                person_alias.setdefault(a.name.casefold(), []).append((p.id, a.sources))
        place_alias: dict[str, list[tuple[str, frozenset[str]]]] = {}
        for pl in self.places.values():
            place_alias.setdefault(pl.name.casefold(), []).append((pl.id, pl.sources))
            for a in pl.aliases:
                place_alias.setdefault(a.name.casefold(), []).append((pl.id, a.sources))
        object.__setattr__(self, "_person_alias", person_alias)
        object.__setattr__(self, "_place_alias", place_alias)

    # -- entities.ReferenceLookup protocol -----------------------------------

    def person_alias_hits(self, alias: str) -> list[tuple[str, frozenset[str]]]:
        return list(self._person_alias.get(alias.casefold(), []))

    def place_alias_hits(self, alias: str) -> list[tuple[str, frozenset[str]]]:
        return list(self._place_alias.get(alias.casefold(), []))

    def person_display(self, person_id: str) -> tuple[str, frozenset[str]]:
        p = self.persons.get(person_id)
        if p is None:
            raise NotFoundError(person_id)
        return p.name, p.sources

    def place_display(self, place_id: str) -> tuple[str, frozenset[str]]:
        pl = self.places.get(place_id)
        if pl is None:
            raise NotFoundError(place_id)
        return pl.name, pl.sources

    def person_era_info(self, person_id: str) -> tuple[str | None, int | None, int | None]:
        p = self.persons.get(person_id)
        if p is None:
            raise NotFoundError(person_id)
        return p.dynasty, p.birth_year, p.death_year

    # -- event graph ----------------------------------------------------------

    def events_between(self, a: str, b: str) -> list[EventRecord]:
        return [
            e for e in self.events
            if a in e.participants and b in e.participants and a != b
        ]

    def events_of(self, person_id: str) -> list[EventRecord]:
        return [e for e in self.events if person_id in e.participants]

    def connection_counts(
        self, candidates: Iterable[str], confirmed: Iterable[str]
    ) -> dict[str, int]:
        """Per candidate: number of events shared with any confirmed figure."""
        confirmed_set = set(confirmed)
        out: dict[str, int] = {}
        for cand in candidates:
            n = 0
            for e in self.events:
                if cand in e.participants and (
                    confirmed_set.intersection(e.participants) - {cand}
                ):
                    n += 1
            out[cand] = n
        return out


# ---------------------------------------------------------------------------
# Corpus


@dataclass(frozen=True)
class Corpus:
    """Immutable handle over one loaded data directory."""

    root: Path
    handscrolls: dict[str, HandscrollRecord]
    dbs: ReferenceDatabases
    vector_arrays: dict[str, np.ndarray]  # store name -> (count, dim) float32

    def handscroll(self, handscroll_id: str) -> HandscrollRecord:
        rec = self.handscrolls.get(handscroll_id)
        if rec is None:
            raise NotFoundError(handscroll_id)
        return rec

    def image_path(self, rec: HandscrollRecord) -> Path:
        return self.root / rec.image_ref

    def load_image(self, handscroll_id: str) -> np.ndarray:
        rec = self.handscroll(handscroll_id)
        with Image.open(self.image_path(rec)) as im:
            return np.asarray(im.convert("RGB"))


@dataclass(frozen=True)
class ElementStats:
    """Word-cloud style aggregates for one handscroll."""

    handscroll_id: str
    seal_counts: dict[str, int]  # sealer id -> seals on this handscroll
    corpus_seal_counts: dict[str, int]  # sealer id -> seals across the corpus
    inscription_counts: dict[str, int]  # author id -> inscriptions here
    sealer_dynasty: dict[str, str | None]
    word_frequencies: dict[str, dict[str, int]]  # tag -> surface -> count

    def to_json(self) -> dict:
        return {
            "handscroll_id": self.handscroll_id,
            "seal_counts": dict(sorted(self.seal_counts.items())),
            "corpus_seal_counts": dict(sorted(self.corpus_seal_counts.items())),
            "inscription_counts": dict(sorted(self.inscription_counts.items())),
            "sealer_dynasty": dict(sorted(self.sealer_dynasty.items())),
            "word_frequencies": {
                tag: dict(sorted(freqs.items()))
                for tag, freqs in sorted(self.word_frequencies.items())
            },
        }


def aggregate_element_stats(corpus: Corpus, handscroll_id: str) -> ElementStats:
    """Direct enumeration over the record's annotations."""
    rec = corpus.handscroll(handscroll_id)

    seal_counts: dict[str, int] = {}
    for seal in rec.seals:
        if seal.sealer_id is not None:
            seal_counts[seal.sealer_id] = seal_counts.get(seal.sealer_id, 0) + 1

    corpus_counts: dict[str, int] = {}
    for other in corpus.handscrolls.values():
        for seal in other.seals:
            if seal.sealer_id in seal_counts:
                corpus_counts[seal.sealer_id] = corpus_counts.get(seal.sealer_id, 0) + 1

    inscription_counts: dict[str, int] = {}
    for ins in rec.inscriptions:
        if ins.author_id is not None:
            inscription_counts[ins.author_id] = inscription_counts.get(ins.author_id, 0) + 1

    dynasty = {
        sid: corpus.dbs.persons[sid].dynasty if sid in corpus.dbs.persons else None
        for sid in seal_counts
    }

    freqs: dict[str, dict[str, int]] = {tag: {} for tag in TAGS}
    for ins in rec.inscriptions:
        for m in ins.mentions:
            bucket = freqs[m.tag]
            bucket[m.surface] = bucket.get(m.surface, 0) + 1

    return ElementStats(
        handscroll_id=handscroll_id,
        seal_counts=seal_counts,
        corpus_seal_counts=corpus_counts,
        inscription_counts=inscription_counts,
        sealer_dynasty=dynasty,
        word_frequencies=freqs,
    )


# ---------------------------------------------------------------------------
# Loading


def _read_jsonl(path: Path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SchemaError(path.name, f"line {lineno}", "-", f"bad JSON: {exc}")
    return out


def _req(raw: dict, file: str, rid: str, key: str, typ,
         optional: bool = False, label: str | None = None):
    label = label or key
    if key not in raw or raw[key] is None:
        if optional:
            return None
        raise SchemaError(file, rid, label, "missing required field")
    val = raw[key]
    if typ is int and isinstance(val, bool):
        raise SchemaError(file, rid, label, "expected integer, got bool")
    if typ is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, typ):
        raise SchemaError(file, rid, label, f"expected {typ.__name__}, got {type(val).__name__}")
    return val


def _sources(raw, file, rid, name) -> frozenset[str]:
    vals = _req(raw, file, rid, name, list)
    for s in vals:
        if s not in SOURCE_LABELS:
            raise SchemaError(file, rid, name, f"unknown source label {s!r}")
    if not vals:
        raise SchemaError(file, rid, name, "needs at least one source label")
    return frozenset(vals)


def _aliases(raw, file, rid) -> tuple[Alias, ...]:
    out = []
    for a in raw.get("aliases") or []:
        name = _req(a, file, rid, "name", str, label="aliases.name")
        out.append(Alias(name=name, sources=_sources(a, file, rid, "sources")))
    return tuple(out)


def load_corpus(root: str | Path, config: EngineConfig | None = None) -> Corpus:
    """Load and validate a corpus directory.

    Schema violations raise ``SchemaError`` naming file, record id, and
    field; unresolved cross-references are collected and raised together
    as one ``DanglingReferenceError``.
    """
    root = Path(root)
    config = config or EngineConfig()
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.exists():
        return Corpus(root=root, handscrolls={}, vector_arrays={},
                      dbs=ReferenceDatabases({}, {}, EraTable(()), (), {}))

    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    files = manifest.get("files", {})
    vector_files = manifest.get("vector_files", {})

    def rows(kind: str) -> list[dict]:
        if kind not in files:
            return []
        path = root / files[kind]
        if not path.exists():
            raise CorpusError(f"manifest lists {files[kind]!r} but the file is missing")
        return _read_jsonl(path)

    vector_arrays: dict[str, np.ndarray] = {}
    for store, fname in vector_files.items():
        vector_arrays[store] = read_vectors(root / fname)

    def vec(store: str, index: int | None, file: str, rid: str) -> np.ndarray | None:
        if index is None:
            return None
        arr = vector_arrays.get(store)
        if arr is None:
            raise SchemaError(file, rid, "feature_index",
                              f"no vector file declared for store {store!r}")
        if not 0 <= index < arr.shape[0]:
            raise SchemaError(file, rid, "feature_index",
                              f"index {index} outside vector file of {arr.shape[0]} rows")
        return arr[index]

    # persons
    persons: dict[str, Person] = {}
    fname = files.get("persons", "persons.jsonl")
    for raw in rows("persons"):
        pid = _req(raw, fname, raw.get("id", "?"), "id", str)
        if pid in persons:
            raise SchemaError(fname, pid, "id", "duplicate person id")
        identities = []
        for ident in raw.get("identities") or []:
            kind = _req(ident, fname, pid, "kind", str, label="identities.kind")
            rank = ident.get("rank")
            try:
                identities.append(Identity(kind=kind, rank=rank))
            except CorpusError as exc:
                raise SchemaError(fname, pid, "identities", str(exc))
        dynasty = _req(raw, fname, pid, "dynasty", str, optional=True)
        if dynasty is not None and dynasty not in config.dynasties:
            raise SchemaError(fname, pid, "dynasty",
                              f"label {dynasty!r} not in the configured enumeration")
        role = _req(raw, fname, pid, "school_role", str, optional=True)
        if role is not None and role not in ("representative", "pioneer"):
            raise SchemaError(fname, pid, "school_role", f"unknown role {role!r}")
        lit = raw.get("literature_mentions", 0)
        if not isinstance(lit, int) or isinstance(lit, bool) or lit < 0:
            raise SchemaError(fname, pid, "literature_mentions", "must be a count >= 0")
        persons[pid] = Person(
            id=pid,
            name=_req(raw, fname, pid, "name", str),
            sources=_sources(raw, fname, pid, "sources"),
            aliases=_aliases(raw, fname, pid),
            birth_year=_req(raw, fname, pid, "birth_year", int, optional=True),
            death_year=_req(raw, fname, pid, "death_year", int, optional=True),
            dynasty=dynasty,
            identities=tuple(identities),
            literature_mentions=lit,
            school_role=role,
        )

    # places
    places: dict[str, PlaceRecord] = {}
    fname = files.get("places", "places.jsonl")
    for raw in rows("places"):
        pid = _req(raw, fname, raw.get("id", "?"), "id", str)
        if pid in places:
            raise SchemaError(fname, pid, "id", "duplicate place id")
        places[pid] = PlaceRecord(
            id=pid,
            name=_req(raw, fname, pid, "name", str),
            sources=_sources(raw, fname, pid, "sources"),
            aliases=_aliases(raw, fname, pid),
            modern_name=_req(raw, fname, pid, "modern_name", str, optional=True),
        )

    # eras
    fname = files.get("eras", "eras.jsonl")
    era_rows = rows("eras")
    for raw in era_rows:
        _req(raw, fname, raw.get("name", "?"), "name", str)
        _req(raw, fname, raw.get("name", "?"), "dynasty", str)
        _req(raw, fname, raw.get("name", "?"), "start_year", int)
        _req(raw, fname, raw.get("name", "?"), "end_year", int)
    eras = EraTable.from_records(era_rows)

    # events
    events: list[EventRecord] = []
    fname = files.get("events", "events.jsonl")
    for raw in rows("events"):
        eid = _req(raw, fname, raw.get("id", "?"), "id", str)
        parts = _req(raw, fname, eid, "participants", list)
        if not parts or not all(isinstance(p, str) for p in parts):
            raise SchemaError(fname, eid, "participants", "must be a non-empty id list")
        source = _req(raw, fname, eid, "source", str)
        if source not in SOURCE_LABELS:
            raise SchemaError(fname, eid, "source", f"unknown source label {source!r}")
        events.append(EventRecord(
            id=eid,
            participants=tuple(parts),
            type=_req(raw, fname, eid, "type", str),
            source=source,
            year=_req(raw, fname, eid, "year", int, optional=True),
            description=raw.get("description", ""),
        ))

    # seal gallery
    gallery: dict[str, SealGalleryEntry] = {}
    fname = files.get("seal_gallery", "seal_gallery.jsonl")
    for raw in rows("seal_gallery"):
        sid = _req(raw, fname, raw.get("id", "?"), "id", str)
        if sid in gallery:
            raise SchemaError(fname, sid, "id", "duplicate seal id")
        idx = _req(raw, fname, sid, "feature_index", int)
        gallery[sid] = SealGalleryEntry(
            id=sid,
            feature_index=idx,
            sealer_id=_req(raw, fname, sid, "sealer_id", str, optional=True),
            content=raw.get("content", ""),
            feature=vec("seal_gallery", idx, fname, sid),
        )

    gallery_dim = None
    if "seal_gallery" in vector_arrays and vector_arrays["seal_gallery"].size:
        gallery_dim = vector_arrays["seal_gallery"].shape[1]

    # handscrolls
    handscrolls: dict[str, HandscrollRecord] = {}
    fname = files.get("handscrolls", "handscrolls.jsonl")
    for raw in rows("handscrolls"):
        hid = _req(raw, fname, raw.get("id", "?"), "id", str)
        if hid in handscrolls:
            raise SchemaError(fname, hid, "id", "duplicate handscroll id")
        image_ref = _req(raw, fname, hid, "image_ref", str)
        image_path = root / image_ref
        if not image_path.exists():
            raise SchemaError(fname, hid, "image_ref", f"image file {image_ref!r} missing")
        with Image.open(image_path) as im:
            img_w, img_h = im.size

        try:
            core = Rect.from_json(_req(raw, fname, hid, "core_region", dict))
        except CorpusError as exc:
            raise SchemaError(fname, hid, "core_region", str(exc))
        if core.x < 0 or core.y < 0 or core.x + core.w > img_w or core.y + core.h > img_h:
            raise SchemaError(fname, hid, "core_region",
                              f"{core} outside image bounds {img_w}x{img_h}")

        seals = []
        for si, rawseal in enumerate(raw.get("seals") or []):
            try:
                box = Rect.from_json(_req(rawseal, fname, hid, "box", dict, label=f"seals[{si}].box"))
            except CorpusError as exc:
                raise SchemaError(fname, hid, f"seals[{si}].box", str(exc))
            if box.x < 0 or box.y < 0 or box.x + box.w > img_w or box.y + box.h > img_h:
                raise SchemaError(fname, hid, f"seals[{si}].box",
                                  f"{box} outside image bounds {img_w}x{img_h}")
            idx = _req(rawseal, fname, hid, "feature_index", int, label=f"seals[{si}].feature_index")
            feature = vec("handscroll_seals", idx, fname, hid)
            if feature is not None and gallery_dim is not None and len(feature) != gallery_dim:
                raise SchemaError(fname, hid, f"seals[{si}].feature_index",
                                  f"dimension {len(feature)} != gallery dimension {gallery_dim}")
            seals.append(SealAnnotation(
                box=box,
                feature_index=idx,
                matched_seal_id=rawseal.get("matched_seal_id"),
                sealer_id=rawseal.get("sealer_id"),
                timestamp_year=rawseal.get("timestamp_year"),
                feature=feature,
            ))

        inscriptions = []
        for raw_ins in raw.get("inscriptions") or []:
            iid = _req(raw_ins, fname, hid, "id", str, label="inscriptions.id")
            text = _req(raw_ins, fname, iid, "text", str)
            mentions = []
            for m in raw_ins.get("mentions") or []:
                try:
                    mentions.append(EntityMention(
                        start=m["start"], end=m["end"],
                        surface=text[m["start"]:m["end"]],
                        tag=m["tag"], confidence=m.get("confidence", 1.0),
                    ))
                except (KeyError, TypeError, ValueError) as exc:
                    raise SchemaError(fname, iid, "mentions", str(exc))
            try:
                inscriptions.append(InscriptionRecord(
                    id=iid, text=text,
                    author_id=raw_ins.get("author_id"),
                    mentions=tuple(mentions),
                    timestamp_year=raw_ins.get("timestamp_year"),
                ))
            except CorpusError as exc:
                raise SchemaError(fname, iid, "mentions", str(exc))

        regions = []
        for r in raw.get("regions") or []:
            try:
                regions.append(RegionAnnotation(x=r["x"], width=r["width"], kind=r["kind"]))
            except (KeyError, ValueError) as exc:
                raise SchemaError(fname, hid, "regions", str(exc))

        pf_idx = _req(raw, fname, hid, "painting_feature_index", int, optional=True)
        handscrolls[hid] = HandscrollRecord(
            id=hid,
            title=_req(raw, fname, hid, "title", str),
            image_ref=image_ref,
            core_region=core,
            painter_id=raw.get("painter_id"),
            seals=tuple(seals),
            inscriptions=tuple(inscriptions),
            regions=tuple(regions),
            theme_text=raw.get("theme_text", ""),
            painting_feature_index=pf_idx,
            painting_feature=vec("paintings", pf_idx, fname, hid),
        )

    dbs = ReferenceDatabases(
        persons=persons, places=places, eras=eras,
        events=tuple(events), seal_gallery=gallery,
    )
    _check_references(handscrolls, dbs)
    return Corpus(root=root, handscrolls=handscrolls, dbs=dbs, vector_arrays=vector_arrays)


def _check_references(
    handscrolls: Mapping[str, HandscrollRecord], dbs: ReferenceDatabases
) -> None:
    dangling: list[tuple[str, str, str]] = []

    def check_person(where: str, fieldname: str, pid: str | None):
        if pid is not None and pid not in dbs.persons:
            dangling.append((where, fieldname, pid))

    for rec in handscrolls.values():
        check_person(f"handscroll {rec.id}", "painter_id", rec.painter_id)
        for i, seal in enumerate(rec.seals):
            check_person(f"handscroll {rec.id}", f"seals[{i}].sealer_id", seal.sealer_id)
            if seal.matched_seal_id is not None and seal.matched_seal_id not in dbs.seal_gallery:
                dangling.append(
                    (f"handscroll {rec.id}", f"seals[{i}].matched_seal_id", seal.matched_seal_id)
                )
        for ins in rec.inscriptions:
            check_person(f"inscription {ins.id}", "author_id", ins.author_id)
    for entry in dbs.seal_gallery.values():
        check_person(f"seal {entry.id}", "sealer_id", entry.sealer_id)
    for e in dbs.events:
        for pid in e.participants:
            check_person(f"event {e.id}", "participants", pid)

    if dangling:
        raise DanglingReferenceError(dangling)


# ---------------------------------------------------------------------------
# Saving


def save_corpus(corpus: Corpus, out_dir: str | Path) -> None:
    """Write the corpus in canonical form (stable across save/load cycles).

    Image files are copied alongside so the output directory loads on its
    own.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    for rec in corpus.handscrolls.values():
        src = corpus.root / rec.image_ref
        dst = out / rec.image_ref
        if src.exists() and src.resolve() != dst.resolve():
            dst.parent.mkdir(parents=True, exist_ok=True)
            dst.write_bytes(src.read_bytes())

    files = {}
    tables: list[tuple[str, str, Iterable]] = [
        ("handscrolls", "handscrolls.jsonl",
         sorted(corpus.handscrolls.values(), key=lambda r: r.id)),
        ("persons", "persons.jsonl",
         sorted(corpus.dbs.persons.values(), key=lambda r: r.id)),
        ("places", "places.jsonl", sorted(corpus.dbs.places.values(), key=lambda r: r.id)),
        ("events", "events.jsonl", sorted(corpus.dbs.events, key=lambda r: r.id)),
        ("seal_gallery", "seal_gallery.jsonl",
         sorted(corpus.dbs.seal_gallery.values(), key=lambda r: r.id)),
    ]
    for kind, fname, records in tables:
        path = out / fname
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(canonical_dumps(rec.to_json()) + "\n")
        files[kind] = fname

    with open(out / "eras.jsonl", "w", encoding="utf-8") as fh:
        for e in sorted(corpus.dbs.eras.entries, key=lambda e: (e.era_name, e.dynasty)):
            fh.write(canonical_dumps({
                "name": e.era_name, "dynasty": e.dynasty,
                "start_year": e.start_year, "end_year": e.end_year,
            }) + "\n")
    files["eras"] = "eras.jsonl"

    vector_files = {}
    for store, arr in sorted(corpus.vector_arrays.items()):
        fname = f"{store}_features.sfv"
        write_vectors(out / fname, arr)
        vector_files[store] = fname

    manifest = {
        "format": "handscroll-corpus",
        "version": 1,
        "files": files,
        "vector_files": vector_files,
    }
    (out / MANIFEST_NAME).write_text(canonical_dumps(manifest) + "\n", encoding="utf-8")
