import hypothesis.strategies as st
import pytest
from hypothesis import given

from handscroll.entities import (
    DictionaryTagger,
    EntityMention,
    Resolution,
    TaggerError,
    disambiguate_same_name,
    evaluate_f1,
    generate_name_segments,
    resolve_location,
    resolve_person,
    resolve_person_in_context,
    tag_long_text,
)

TAGGER = DictionaryTagger({
    "Zhao Mengfu": "Figure",
    "Gong Jin": "Figure",
    "Qizhou": "Location",
    "Que Mountain": "Location",
})


# ---------------------------------------------------------------------------
# sliding window + voting


def test_single_chunk_passthrough():
    text = "Zhao Mengfu went to Qizhou"
    out = tag_long_text(text, TAGGER, window=len(text) + 10, stride=5)
    assert out == TAGGER(text)


def test_stride_equals_window_matches_concatenation():
    unit = "Zhao Mengfu painted this. "
    text = unit * 4
    w = len(unit)
    out = tag_long_text(text, TAGGER, window=w, stride=w)
    expected = []
    for i in range(4):
        for m in TAGGER(unit):
            expected.append((m.start + i * w, m.end + i * w, m.tag))
    assert [(m.start, m.end, m.tag) for m in out] == expected


def test_unanimous_vote_matches_single_chunk():
    text = "Qizhou and Qizhou and Qizhou end"
    overlapped = tag_long_text(text, TAGGER, window=len(text), stride=7)
    single = [(m.start, m.end, m.tag) for m in TAGGER(text)]
    assert [(m.start, m.end, m.tag) for m in overlapped] == single


class ScriptedTagger:
    """Returns preset mentions keyed by the exact chunk text."""

    def __init__(self, script):
        self.script = script

    def __call__(self, chunk):
        return self.script.get(chunk, [])


def test_majority_vote_two_against_one():
    # Chunks "xxA", "xAy", "Ayy" all cover character 2 ("A"); two tag it
    # Figure, one Location.
    text = "xxAyy"
    tagger = ScriptedTagger({
        "xxA": [EntityMention(2, 3, "A", "Figure")],
        "xAy": [EntityMention(1, 2, "A", "Figure")],
        "Ayy": [EntityMention(0, 1, "A", "Location")],
    })
    out = tag_long_text(text, tagger, window=3, stride=1)
    assert [(m.start, m.end, m.tag) for m in out] == [(2, 3, "Figure")]


def test_tie_breaks_to_nearest_chunk_center():
    # Character 2 is covered by chunks [0,3) and [2,5): centers 1.0 and 3.0.
    # One votes Location, the other Figure; the nearer center (chunk 2,
    # distance 1.0 vs 1.0... both distance 1) -- use asymmetric chunks.
    text = "abcde"
    tagger = ScriptedTagger({
        "abcd": [EntityMention(3, 4, "d", "Figure")],   # chunk [0,4), center 1.5
        "cde": [EntityMention(1, 2, "d", "Location")],  # chunk [2,5), center 3.0
    })
    out = tag_long_text(text, tagger, window=4, stride=2)
    # char 3: distance to centers |1.5-3|=1.5 vs |3.0-3|=0.0 -> Location wins
    assert [(m.start, m.end, m.tag) for m in out] == [(3, 4, "Location")]


def test_tagger_failure_carries_chunk_offsets():
    def boom(chunk):
        raise RuntimeError("model unavailable")

    with pytest.raises(TaggerError) as exc:
        tag_long_text("some text here", boom, window=6, stride=3)
    assert exc.value.chunk_start == 0
    assert exc.value.chunk_end == 6


def test_span_outside_chunk_rejected():
    tagger = ScriptedTagger({"abc": [EntityMention(2, 9, "x", "Thing")]})
    with pytest.raises(TaggerError):
        tag_long_text("abc", tagger, window=3, stride=3)


def test_bad_window_params():
    with pytest.raises(ValueError):
        tag_long_text("abc", TAGGER, window=4, stride=0)
    with pytest.raises(ValueError):
        tag_long_text("abc", TAGGER, window=4, stride=5)


@given(st.integers(min_value=1, max_value=30), st.integers(min_value=1, max_value=30))
def test_voting_covers_every_character(window, stride):
    if stride > window:
        stride = window
    text = "Qizhou meets Zhao Mengfu near Que Mountain today"
    out = tag_long_text(text, TAGGER, window=window, stride=stride)
    for m in out:
        assert 0 <= m.start < m.end <= len(text)
        assert m.surface == text[m.start:m.end]


# ---------------------------------------------------------------------------
# name segmentation


def test_four_token_name_order():
    name = ("Han", "Lin", "Qian", "Pu")
    assert generate_name_segments(name) == [
        ("Lin", "Qian", "Pu"),
        ("Han", "Lin", "Qian"),
        ("Qian", "Pu"),
        ("Lin", "Qian"),
        ("Han", "Lin"),
    ]


def test_two_char_name_has_no_segments():
    assert generate_name_segments("ab") == []


def test_three_char_name():
    assert generate_name_segments("ABC") == ["BC", "AB"]


def test_short_name_rejected():
    with pytest.raises(ValueError):
        generate_name_segments("a")


@given(st.text(min_size=2, max_size=12))
def test_segment_ordering_properties(name):
    segments = generate_name_segments(name)
    lengths = [len(s) for s in segments]
    assert lengths == sorted(lengths, reverse=True)
    starts_by_len = {}
    for s in segments:
        starts_by_len.setdefault(len(s), []).append(name.index(s) if s in name else None)
    for length, group in starts_by_len.items():
        assert all(2 <= length <= len(name) - 1 for _ in group)


# ---------------------------------------------------------------------------
# resolution against a fake reference store


class FakeDbs:
    def __init__(self, persons, places=None):
        # persons: id -> (name, sources, aliases{alias: sources}, dynasty, birth, death)
        self.persons = persons
        self.places = places or {}

    def _hits(self, store, alias):
        hits = []
        for pid, (name, sources, aliases, *_rest) in store.items():
            if alias.casefold() == name.casefold():
                hits.append((pid, frozenset(sources)))
            for a, srcs in aliases.items():
                if alias.casefold() == a.casefold():
                    hits.append((pid, frozenset(srcs)))
        return hits

    def person_alias_hits(self, alias):
        return self._hits(self.persons, alias)

    def place_alias_hits(self, alias):
        return self._hits(self.places, alias)

    def person_display(self, pid):
        name, sources, *_ = self.persons[pid]
        return name, frozenset(sources)

    def place_display(self, pid):
        name, sources, *_ = self.places[pid]
        return name, frozenset(sources)

    def person_era_info(self, pid):
        entry = self.persons[pid]
        return entry[3], entry[4], entry[5]


DBS = FakeDbs(
    persons={
        "p:zhao": ("Zhao Mengfu", {"CBDB", "PerAD"}, {}, "Yuan", 1254, 1322),
        "p:queen": ("Queen Mother of the West", {"PerAD"},
                    {"Jin Mu": {"PerAD"}}, None, None, None),
        "p:qianpu": ("Qian Pu", {"CBDB"}, {"錢溥": {"CBDB"}}, "Ming", 1408, 1488),
    },
    places={
        "l:qizhou": ("Qizhou", {"PlaAD", "CBDB"}, {}),
        "l:que": ("Que Mountain", {"PlaAD"}, {}),
    },
)


def test_direct_hit_dual_source():
    res = resolve_person("Zhao Mengfu", DBS)
    assert res.resolved
    assert res.entity_id == "p:zhao"
    assert res.sources == frozenset({"CBDB", "PerAD"})
    assert res.method == "direct"


def test_alias_hit_single_source():
    res = resolve_person("Jin Mu", DBS)
    assert res.entity_id == "p:queen"
    assert res.canonical_name == "Queen Mother of the West"
    assert res.sources == frozenset({"PerAD"})
    assert res.method == "direct"


def test_unknown_surface_unresolved():
    res = resolve_person("Totally Unknown", DBS)
    assert not res.resolved
    assert res.candidates_considered == ()


def test_segment_fallback():
    res = resolve_person("翰林錢溥", DBS)
    assert res.entity_id == "p:qianpu"
    assert res.method == "segment"
    assert res.matched_alias == "錢溥"
    assert res.matched_alias in "翰林錢溥"


def test_location_cascade():
    dual = resolve_location("Qizhou", DBS)
    assert dual.sources == frozenset({"PlaAD", "CBDB"})
    single = resolve_location("Que Mountain", DBS)
    assert single.sources == frozenset({"PlaAD"})
    assert not resolve_location("Atlantis", DBS).resolved


# ---------------------------------------------------------------------------
# disambiguation


DYNASTIES = {"Yuan": (1271, 1368), "Ming": (1368, 1644)}


def _same_name_dbs():
    persons = {
        "p:zhou-mi": ("Zhou Mi", {"CBDB"}, {"Gong Jin": {"CBDB"}}, "Yuan", 1232, 1298),
        "p:li-kezhong": ("Li Kezhong", {"CBDB"}, {"Gong Jin": {"CBDB"}}, "Yuan", 1250, 1320),
    }
    for i in range(20):
        persons[f"p:other-{i:02d}"] = (
            f"Other {i}", {"CBDB"}, {"Gong Jin": {"CBDB"}}, "Ming", 1400 + i, 1460 + i,
        )
    return FakeDbs(persons)


def test_era_filter_then_social_rank():
    dbs = _same_name_dbs()
    candidates = [pid for pid, _ in dbs.person_alias_hits("Gong Jin")]
    assert len(candidates) > 20
    graph = {"p:zhou-mi": 23, "p:li-kezhong": 0}
    res = disambiguate_same_name(candidates, "Yuan", graph, dbs, DYNASTIES)
    assert res.entity_id == "p:zhou-mi"
    assert res.method == "social_rank"
    assert not res.ambiguous
    assert set(res.candidates_considered) == {"p:zhou-mi", "p:li-kezhong"}


def test_single_candidate_is_era_filter():
    dbs = _same_name_dbs()
    res = disambiguate_same_name(["p:zhou-mi"], "Yuan", {}, dbs, DYNASTIES)
    assert res.entity_id == "p:zhou-mi"
    assert res.method == "era_filter"
    assert not res.ambiguous


def test_exact_tie_flags_ambiguous_deterministically():
    dbs = _same_name_dbs()
    res = disambiguate_same_name(
        ["p:zhou-mi", "p:li-kezhong"], "Yuan", {"p:zhou-mi": 3, "p:li-kezhong": 3},
        dbs, DYNASTIES,
    )
    assert res.ambiguous
    assert res.entity_id == "p:li-kezhong"  # lexicographically smallest id


def test_filter_dropped_when_it_empties_the_set():
    dbs = _same_name_dbs()
    res = disambiguate_same_name(
        ["p:zhou-mi", "p:li-kezhong"], "Ming", {"p:zhou-mi": 5}, dbs, DYNASTIES,
    )
    assert res.entity_id == "p:zhou-mi"
    assert res.ambiguous  # era filter was overridden, flag for review


def test_lifespan_overlap_used_when_dynasty_missing():
    dbs = FakeDbs({
        "p:a": ("A", {"CBDB"}, {"X": {"CBDB"}}, None, 1300, 1360),
        "p:b": ("B", {"CBDB"}, {"X": {"CBDB"}}, None, 1500, 1560),
    })
    res = disambiguate_same_name(["p:a", "p:b"], "Yuan", {}, dbs, DYNASTIES)
    assert res.entity_id == "p:a"
    assert res.method == "era_filter"


def test_full_cascade_defers_to_disambiguation():
    dbs = _same_name_dbs()
    graph = {"p:zhou-mi": 23, "p:li-kezhong": 0}
    res = resolve_person_in_context(
        "Gong Jin", dbs, context_era="Yuan", graph=graph, dynasties=DYNASTIES,
    )
    assert res.entity_id == "p:zhou-mi"
    assert res.surface == "Gong Jin"
    assert res.method == "social_rank"


def test_resolution_invariant():
    with pytest.raises(ValueError):
        Resolution(kind="person", surface="x", entity_id="p:1", sources=frozenset())


def test_disambiguation_is_deterministic():
    dbs = _same_name_dbs()
    candidates = [pid for pid, _ in dbs.person_alias_hits("Gong Jin")]
    graph = {"p:zhou-mi": 23}
    first = disambiguate_same_name(candidates, "Yuan", graph, dbs, DYNASTIES)
    for _ in range(3):
        again = disambiguate_same_name(list(reversed(candidates)), "Yuan", graph,
                                       dbs, DYNASTIES)
        assert again == first


# ---------------------------------------------------------------------------
# F1


def _m(start, end, tag):
    return EntityMention(start, end, "x" * (end - start), tag)


def test_f1_perfect():
    gold = [_m(0, 2, "Figure"), _m(5, 8, "Location")]
    assert evaluate_f1(gold, gold) == {"precision": 1.0, "recall": 1.0, "f1": 1.0}


def test_f1_disjoint():
    pred = [_m(0, 2, "Figure")]
    gold = [_m(5, 8, "Location")]
    assert evaluate_f1(pred, gold) == {"precision": 0.0, "recall": 0.0, "f1": 0.0}


def test_f1_half():
    pred = [_m(0, 2, "Figure"), _m(3, 4, "Thing")]
    gold = [_m(0, 2, "Figure"), _m(9, 12, "Time")]
    out = evaluate_f1(pred, gold)
    assert out == {"precision": 0.5, "recall": 0.5, "f1": 0.5}


def test_f1_empty_both():
    assert evaluate_f1([], [])["f1"] == 0.0


def test_f1_tag_must_match():
    pred = [_m(0, 2, "Figure")]
    gold = [_m(0, 2, "Location")]
    assert evaluate_f1(pred, gold)["f1"] == 0.0
