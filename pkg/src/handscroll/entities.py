"""Entity tagging post-processing and database-grounded resolution.

External taggers cap their input length, so long inscriptions are tagged
through a sliding window and the overlapping chunk outputs are merged by
per-character majority vote. Tagged figure/location surfaces are then
validated against the reference stores: exact alias lookup first, then
reverse-order sliding segments of the surface, then era and social-network
disambiguation when several persons share the winning alias.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Mapping, Protocol, Sequence

TAGS = ("Time", "Location", "Figure", "Thing")

METHOD_DIRECT = "direct"
METHOD_SEGMENT = "segment"
METHOD_ERA = "era_filter"
METHOD_SOCIAL = "social_rank"
METHOD_MANUAL = "manual"


class TaggerError(RuntimeError):
    def __init__(self, message: str, chunk_start: int, chunk_end: int):
        super().__init__(message)
        self.chunk_start = chunk_start
        self.chunk_end = chunk_end


@dataclass(frozen=True)
class EntityMention:
    start: int
    end: int
    surface: str
    tag: str
    confidence: float = 1.0

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad span ({self.start}, {self.end})")
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of [0,1]: {self.confidence}")


# A tagger maps one text chunk to mentions with chunk-relative offsets.
TaggerPort = Callable[[str], list[EntityMention]]


class DictionaryTagger:
    """Deterministic tagger backed by a surface-string dictionary.

    Ships for tests and offline runs; real deployments plug an external
    model through the same callable contract. Longer surfaces win at a
    given position; matches never overlap.
    """

    def __init__(self, entries: Mapping[str, str], confidence: float = 0.9):
        for surface, tag in entries.items():
            if tag not in TAGS:
                raise ValueError(f"unknown tag {tag!r} for {surface!r}")
            if not surface:
                raise ValueError("empty dictionary surface")
        self._entries = sorted(entries.items(), key=lambda kv: -len(kv[0]))
        self._confidence = confidence

    def __call__(self, text: str) -> list[EntityMention]:
        out: list[EntityMention] = []
        i = 0
        while i < len(text):
            for surface, tag in self._entries:
                if text.startswith(surface, i):
                    out.append(
                        EntityMention(i, i + len(surface), surface, tag, self._confidence)
                    )
                    i += len(surface)
                    break
            else:
                i += 1
        return out


def _chunk_spans(text_len: int, window: int, stride: int) -> list[tuple[int, int]]:
    """Chunk [i*stride, i*stride+window); generation stops with the first
    chunk that reaches the end of the text."""
    spans = []
    i = 0
    while True:
        start = i * stride
        end = min(start + window, text_len)
        spans.append((start, end))
        if start + window >= text_len:
            break
        i += 1
    return spans


def tag_long_text(
    text: str,
    tagger: TaggerPort,
    window: int = 126,
    stride: int = 63,
) -> list[EntityMention]:
    """Tag text of any length through a sliding window plus voting.

    Each character's final tag is the majority vote among the chunks that
    cover it (a chunk that tags nothing there votes "none"). A 1-1 tie is
    broken by the chunk whose center lies nearest the character, since
    tagger output is least reliable at chunk edges. Maximal runs of equal
    tags become the output mentions.
    """
    if not 0 < stride <= window:
        raise ValueError(f"need 0 < stride <= window, got stride={stride} window={window}")
    if not text:
        return []

    n = len(text)
    # votes[p] = list of (tag_or_none, confidence, center_distance, chunk_index)
    votes: list[list[tuple[str | None, float, float, int]]] = [[] for _ in range(n)]
    for ci, (start, end) in enumerate(_chunk_spans(n, window, stride)):
        chunk = text[start:end]
        try:
            mentions = tagger(chunk)
        except Exception as exc:  # propagate with chunk coordinates
            raise TaggerError(
                f"tagger failed on chunk [{start}, {end}): {exc}", start, end
            ) from exc
        tags: list[str | None] = [None] * len(chunk)
        confs = [0.0] * len(chunk)
        for m in mentions:
            if m.end > len(chunk):
                raise TaggerError(
                    f"tagger returned span ({m.start}, {m.end}) outside chunk "
                    f"[{start}, {end})", start, end,
                )
            for p in range(m.start, m.end):
                tags[p] = m.tag
                confs[p] = m.confidence
        center = (start + end - 1) / 2.0
        for p in range(start, end):
            votes[p].append((tags[p - start], confs[p - start], abs(center - p), ci))

    final: list[tuple[str | None, float]] = []
    for p in range(n):
        counts: dict[str | None, int] = {}
        for tag, _, _, _ in votes[p]:
            counts[tag] = counts.get(tag, 0) + 1
        top = max(counts.values())
        tied = {t for t, c in counts.items() if c == top}
        if len(tied) == 1:
            winner = tied.pop()
        else:
            winner = min(
                (v for v in votes[p] if v[0] in tied),
                key=lambda v: (v[2], v[3]),
            )[0]
        conf = max((c for tag, c, _, _ in votes[p] if tag == winner), default=0.0)
        final.append((winner, conf))

    out: list[EntityMention] = []
    p = 0
    while p < n:
        tag = final[p][0]
        if tag is None:
            p += 1
            continue
        q = p
        while q < n and final[q][0] == tag:
            q += 1
        conf = sum(final[i][1] for i in range(p, q)) / (q - p)
        out.append(EntityMention(p, q, text[p:q], tag, round(conf, 6)))
        p = q
    return out


def evaluate_f1(
    predicted: Sequence[EntityMention], gold: Sequence[EntityMention]
) -> dict[str, float]:
    """Exact span-and-tag matching. F1 defined as 0 when P + R == 0."""
    def keyed(mentions):
        counts: dict[tuple[int, int, str], int] = {}
        for m in mentions:
            k = (m.start, m.end, m.tag)
            counts[k] = counts.get(k, 0) + 1
        return counts

    pred, gld = keyed(predicted), keyed(gold)
    tp = sum(min(c, gld.get(k, 0)) for k, c in pred.items())
    precision = tp / len(predicted) if predicted else 0.0
    recall = tp / len(gold) if gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


# ---------------------------------------------------------------------------
# Name resolution against the reference stores


def generate_name_segments(name: Sequence) -> list:
    """Contiguous substrings of length n-1 down to 2, rightmost-first
    within each length. The full name is excluded (already tried). Works
    on strings and on token sequences alike."""
    n = len(name)
    if n < 2:
        raise ValueError("name must have at least 2 characters")
    out = []
    for length in range(n - 1, 1, -1):
        for start in range(n - length, -1, -1):
            out.append(name[start:start + length])
    return out


class ReferenceLookup(Protocol):
    """What resolution needs from the reference databases."""

    def person_alias_hits(self, alias: str) -> list[tuple[str, frozenset[str]]]: ...
    def place_alias_hits(self, alias: str) -> list[tuple[str, frozenset[str]]]: ...
    def person_display(self, person_id: str) -> tuple[str, frozenset[str]]: ...
    def place_display(self, place_id: str) -> tuple[str, frozenset[str]]: ...
    def person_era_info(self, person_id: str) -> tuple[str | None, int | None, int | None]: ...


@dataclass(frozen=True)
class Resolution:
    """Outcome of grounding one surface form in the reference stores.

    Unresolved is a value, not an error: it feeds the uncertainty view.
    """

    kind: str  # "person" | "place"
    surface: str
    entity_id: str | None = None
    canonical_name: str | None = None
    matched_alias: str | None = None
    sources: frozenset[str] = frozenset()
    method: str | None = None
    candidates_considered: tuple[str, ...] = ()
    ambiguous: bool = False

    def __post_init__(self):
        if self.entity_id is not None and not self.sources:
            raise ValueError("resolved entity must carry database provenance")

    @property
    def resolved(self) -> bool:
        return self.entity_id is not None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "surface": self.surface,
            "entity_id": self.entity_id,
            "canonical_name": self.canonical_name,
            "matched_alias": self.matched_alias,
            "sources": sorted(self.sources),
            "method": self.method,
            "candidates_considered": list(self.candidates_considered),
            "ambiguous": self.ambiguous,
        }


def _resolve_surface(
    kind: str,
    surface: str,
    hits_fn: Callable[[str], list[tuple[str, frozenset[str]]]],
    display_fn: Callable[[str], tuple[str, frozenset[str]]],
) -> Resolution:
    matched_alias = None
    method = None
    hits = hits_fn(surface)
    if hits:
        matched_alias, method = surface, METHOD_DIRECT
    elif len(surface) >= 2:
        for segment in generate_name_segments(surface):
            seg_hits = hits_fn(segment)
            if seg_hits:
                hits, matched_alias, method = seg_hits, segment, METHOD_SEGMENT
                break
    if not hits:
        return Resolution(kind=kind, surface=surface)

    ids = sorted({pid for pid, _ in hits})
    if len(ids) == 1:
        pid = ids[0]
        name, _ = display_fn(pid)
        sources = frozenset().union(*(src for hid, src in hits if hid == pid))
        return Resolution(
            kind=kind, surface=surface, entity_id=pid, canonical_name=name,
            matched_alias=matched_alias, sources=sources, method=method,
            candidates_considered=(pid,),
        )
    # Several entities share the winning alias: defer to disambiguation.
    return Resolution(
        kind=kind, surface=surface, matched_alias=matched_alias,
        candidates_considered=tuple(ids), ambiguous=True,
    )


def resolve_person(surface: str, dbs: ReferenceLookup) -> Resolution:
    """Alias cascade over the person stores; see module docstring."""
    return _resolve_surface("person", surface, dbs.person_alias_hits, dbs.person_display)


def resolve_location(surface: str, dbs: ReferenceLookup) -> Resolution:
    """Same lookup cascade as persons, over the place stores."""
    return _resolve_surface("place", surface, dbs.place_alias_hits, dbs.place_display)


def disambiguate_same_name(
    candidates: Sequence[str],
    context_era: str | None,
    graph: Mapping[str, int],
    dbs: ReferenceLookup,
    dynasties: Mapping[str, tuple[int, int]],
) -> Resolution:
    """Pick one person among same-alias candidates.

    Filters to candidates alive/active in the context era (dropping the
    filter, flagged, if it would empty the set), then ranks by the count
    of events shared with already-confirmed figures. An exact tie at the
    top keeps the lexicographically smallest id and flags the result for
    manual selection; the flag, not the winner, is the contract.
    """
    if not candidates:
        raise ValueError("need at least one candidate")
    ids = sorted(set(candidates))

    filter_dropped = False
    if context_era is not None:
        era_range = dynasties.get(context_era)
        kept = [pid for pid in ids if _active_in_era(dbs, pid, context_era, era_range)]
        if kept:
            ids_filtered = kept
        else:
            ids_filtered = ids
            filter_dropped = True
    else:
        ids_filtered = ids

    ranked = sorted(ids_filtered, key=lambda pid: (-graph.get(pid, 0), pid))
    winner = ranked[0]
    if len(ranked) == 1:
        method = METHOD_ERA
        tie = False
    else:
        top, second = graph.get(ranked[0], 0), graph.get(ranked[1], 0)
        method = METHOD_SOCIAL
        tie = top == second

    name, sources = dbs.person_display(winner)
    return Resolution(
        kind="person", surface=name, entity_id=winner, canonical_name=name,
        matched_alias=None, sources=sources, method=method,
        candidates_considered=tuple(ranked), ambiguous=tie or filter_dropped,
    )


def _active_in_era(
    dbs: ReferenceLookup,
    person_id: str,
    era_label: str,
    era_range: tuple[int, int] | None,
) -> bool:
    dynasty, birth, death = dbs.person_era_info(person_id)
    if dynasty is not None:
        return dynasty == era_label
    # Dynasty label missing: fall back to lifespan overlap with the era range.
    if era_range is None or birth is None:
        return False
    lo, hi = era_range
    return birth <= hi and (death is None or death >= lo)


def resolve_person_in_context(
    surface: str,
    dbs: ReferenceLookup,
    context_era: str | None = None,
    graph: Mapping[str, int] | None = None,
    dynasties: Mapping[str, tuple[int, int]] | None = None,
) -> Resolution:
    """Full cascade: alias lookup, then disambiguation when needed."""
    res = resolve_person(surface, dbs)
    if not res.ambiguous or len(res.candidates_considered) < 2:
        return res
    picked = disambiguate_same_name(
        res.candidates_considered, context_era, graph or {}, dbs, dynasties or {}
    )
    return replace(picked, surface=surface, matched_alias=res.matched_alias)
