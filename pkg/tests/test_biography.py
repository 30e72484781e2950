import json
import math

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

from handscroll.biography import (
    Biography,
    BiographyError,
    CustomizeAction,
    ImportanceInputs,
    assemble_biography,
    customize,
    discussion_degree,
    identity_score,
    importance,
    painting_relevance,
)
from handscroll.config import ScoringConfig
from handscroll.corpus import Identity, NotFoundError

CFG = ScoringConfig()


# ---------------------------------------------------------------------------
# scoring primitives


def test_relevance_all_zero():
    assert painting_relevance(ImportanceInputs()) == 0.0


def test_relevance_guarded_log():
    # w=(1,1,1,1), r=(2, e-1, 0, 0): 2 + log(1 + (e-1)) = 3
    inputs = ImportanceInputs(r0=2.0, r1=round(math.e - 1))
    # integer counts: use exact continuous check through the formula
    val = painting_relevance(ImportanceInputs(r0=2.0), CFG) + math.log1p(math.e - 1)
    assert val == pytest.approx(3.0)
    assert painting_relevance(inputs, CFG) == pytest.approx(
        2.0 + math.log1p(round(math.e - 1))
    )


def test_relevance_qing_damping_halves_log_terms():
    base = ImportanceInputs(r0=4.0, r1=5, r2=3, r3=2, dynasty="Yuan")
    qing = ImportanceInputs(r0=4.0, r1=5, r2=3, r3=2, dynasty="Qing")
    log_part = math.log1p(5) + math.log1p(3) + math.log1p(2)
    assert painting_relevance(base, CFG) == pytest.approx(4.0 + log_part)
    assert painting_relevance(qing, CFG) == pytest.approx(4.0 + 0.5 * log_part)


def test_negative_inputs_rejected():
    with pytest.raises(BiographyError):
        ImportanceInputs(r1=-1)
    with pytest.raises(BiographyError):
        discussion_degree(-2)


def test_discussion_examples():
    assert discussion_degree(0) == 0.0
    assert discussion_degree(math.e - 1) == pytest.approx(1.0)
    assert discussion_degree(100) == pytest.approx(math.log(101))


def test_identity_examples():
    assert identity_score(()) == 0.0
    assert identity_score((Identity("collector"), Identity("literati"))) == 20.0
    assert identity_score(
        (Identity("collector"), Identity("official", 15.0))
    ) == 25.0


def test_identity_rank_bounds():
    with pytest.raises(Exception):
        identity_score((Identity("official", 25.0),))


def test_importance_sum():
    assert importance(0, 0, 0) == 0.0
    assert importance(3.0, math.log(101), 25.0) == pytest.approx(3 + math.log(101) + 25)
    assert importance(3.0, 4.0, 25.0, lambdas=(0.0, 0.0, 1.0)) == 25.0


@given(
    st.floats(0, 20), st.integers(0, 500), st.integers(0, 500), st.integers(0, 500),
    st.integers(0, 500),
    st.integers(0, 3),
    st.integers(0, 3), st.integers(0, 500),
)
@settings(max_examples=100)
def test_importance_monotone(r0, r1, r2, r3, d, which, bump_ident, bump):
    base_inputs = ImportanceInputs(r0=r0, r1=r1, r2=r2, r3=r3, literature_mentions=d)
    base = importance(
        painting_relevance(base_inputs, CFG), discussion_degree(d), 0.0,
    )
    bumped_kwargs = dict(r0=r0, r1=r1, r2=r2, r3=r3)
    key = ("r0", "r1", "r2", "r3")[which]
    bumped_kwargs[key] = bumped_kwargs[key] + bump
    bumped_inputs = ImportanceInputs(literature_mentions=d + bump, **bumped_kwargs)
    idents = (Identity("collector"),) * min(bump_ident, 1)
    bumped = importance(
        painting_relevance(bumped_inputs, CFG),
        discussion_degree(d + bump),
        identity_score(idents, CFG),
    )
    assert bumped >= base - 1e-12


def test_lambda_scaling_preserves_ranking():
    rng = np.random.default_rng(4)
    parts = rng.random((30, 3)) * 20
    for scale in (0.5, 2.0, 17.0):
        s1 = [importance(r, d, i, (1, 1, 1)) for r, d, i in parts]
        s2 = [importance(r, d, i, (scale, scale, scale)) for r, d, i in parts]
        assert list(np.argsort(s1)) == list(np.argsort(s2))


# ---------------------------------------------------------------------------
# assembly over the demo fixture


def test_case_fixture_assembles_fifteen_entries(demo_corpus, config):
    b = assemble_biography(demo_corpus, "npm:hs-0001", config)
    assert len(b.entries) == 15
    emperor = b.entry("cbdb:qianlong")
    assert sum(n for _, n in emperor.dated_seals) + emperor.undated_seal_count == 33
    total_ins = len(emperor.dated_inscriptions) + emperor.undated_inscription_count
    assert total_ins == 9
    assert emperor.kind == "collector_appreciator"
    assert b.entry("cbdb:zhao-mengfu").kind == "painter"


def test_assembly_deterministic(demo_corpus, config):
    a = assemble_biography(demo_corpus, "npm:hs-0001", config)
    b = assemble_biography(demo_corpus, "npm:hs-0001", config)
    assert a.serialize() == b.serialize()


def test_entries_sorted_by_birth_year(demo_corpus, config):
    b = assemble_biography(demo_corpus, "npm:hs-0001", config)
    births = [e.birth_year for e in b.entries if e.birth_year is not None]
    assert births == sorted(births)


def test_shared_events_restricted_to_present_pairs(demo_corpus, config):
    b = assemble_biography(demo_corpus, "npm:hs-0001", config)
    present = {e.figure_id for e in b.entries}
    for ev in b.shared_events:
        assert ev.figure_a in present and ev.figure_b in present
    # Zhou Mi is not on the scroll, so his 23 events stay out.
    assert all("zhou-mi" not in ev.figure_a and "zhou-mi" not in ev.figure_b
               for ev in b.shared_events)


def test_event_histogram_and_link_thickness(demo_corpus, config):
    b = assemble_biography(demo_corpus, "npm:hs-0001", config)
    pair = [
        ev for ev in b.shared_events
        if {ev.figure_a, ev.figure_b} == {"cbdb:dong-qichang", "cbdb:xiang-yuanbian"}
    ]
    assert len(pair) == 3  # link thickness
    types = {}
    for ev in pair:
        types[ev.type] = types.get(ev.type, 0) + 1
    assert types == {"Academic": 2, "Paint": 1}
    assert b.event_histogram["Academic"] >= 2
    assert b.event_histogram["Paint"] >= 1


def test_lifespan_violation_flagged_not_dropped(demo_corpus, config):
    b = assemble_biography(demo_corpus, "npm:hs-0001", config)
    entry = b.entry("cbdb:song-luo")
    assert entry.lifespan_flags  # seal dated after death
    assert sum(n for _, n in entry.dated_seals) + entry.undated_seal_count == 1


def test_tiers_monotone_in_score(demo_corpus, config):
    b = assemble_biography(demo_corpus, "npm:hs-0001", config)
    ranked = sorted(b.entries, key=lambda e: -e.importance)
    tiers = [e.rank_tier for e in ranked]
    assert tiers == sorted(tiers)
    assert tiers[0] == 1


def test_painter_only_scroll(demo_corpus, config):
    from handscroll.corpus import Corpus, HandscrollRecord

    src = demo_corpus.handscrolls["npm:hs-0002"]
    rec = HandscrollRecord(
        id="npm:solo", title="solo", image_ref=src.image_ref,
        core_region=src.core_region, painter_id="cbdb:huang-gongwang",
    )
    mini = Corpus(root=demo_corpus.root, handscrolls={"npm:solo": rec},
                  dbs=demo_corpus.dbs, vector_arrays={})
    b = assemble_biography(mini, "npm:solo", config)
    assert len(b.entries) == 1
    assert b.entries[0].kind == "painter"
    assert b.shared_events == ()


def test_unknown_handscroll(demo_corpus, config):
    with pytest.raises(NotFoundError):
        assemble_biography(demo_corpus, "npm:nope", config)


# ---------------------------------------------------------------------------
# customization


def _strip_mutable(b: Biography) -> dict:
    data = json.loads(b.serialize())
    data.pop("audit_log")
    data.pop("version")
    return data


def test_add_then_remove_restores_biography(demo_corpus, config):
    original = assemble_biography(demo_corpus, "npm:hs-0001", config)
    added = customize(demo_corpus, original,
                      CustomizeAction(kind="add_figure", figure_id="cbdb:zhou-mi"),
                      config)
    assert added.entry("cbdb:zhou-mi").kind == "historian_added"
    assert added.entry("cbdb:zhou-mi").audit_note
    # Zhou Mi's 23 events with the painter now surface as shared events.
    assert any("cbdb:zhou-mi" in (ev.figure_a, ev.figure_b) for ev in added.shared_events)
    removed = customize(demo_corpus, added,
                        CustomizeAction(kind="remove_figure", figure_id="cbdb:zhou-mi"),
                        config)
    assert _strip_mutable(removed) == _strip_mutable(original)
    assert removed.version == 3
    assert len(removed.audit_log) == 2


def test_set_lambda_identity_is_noop(demo_corpus, config):
    original = assemble_biography(demo_corpus, "npm:hs-0001", config)
    updated = customize(demo_corpus, original,
                        CustomizeAction(kind="set_lambda", lambdas=(1.0, 1.0, 1.0)),
                        config)
    assert _strip_mutable(updated) == _strip_mutable(original)


def test_set_lambda_projects_identity_term(demo_corpus, config):
    original = assemble_biography(demo_corpus, "npm:hs-0001", config)
    updated = customize(demo_corpus, original,
                        CustomizeAction(kind="set_lambda", lambdas=(0.0, 0.0, 1.0)),
                        config)
    for entry in updated.entries:
        assert entry.importance == pytest.approx(entry.identity)


def test_manual_tier_changes_only_that_entry(demo_corpus, config):
    original = assemble_biography(demo_corpus, "npm:hs-0001", config)
    target = "cbdb:qianlong"
    updated = customize(
        demo_corpus, original,
        CustomizeAction(kind="set_manual_tier", figure_id=target, tier=4), config,
    )
    for entry in updated.entries:
        before = original.entry(entry.figure_id)
        if entry.figure_id == target:
            assert entry.rank_tier == 4
            assert entry.manual_tier == 4
        else:
            assert entry.rank_tier == before.rank_tier


def test_manual_tier_survives_lambda_change(demo_corpus, config):
    original = assemble_biography(demo_corpus, "npm:hs-0001", config)
    pinned = customize(
        demo_corpus, original,
        CustomizeAction(kind="set_manual_tier", figure_id="cbdb:qianlong", tier=4),
        config,
    )
    relambda = customize(demo_corpus, pinned,
                         CustomizeAction(kind="set_lambda", lambdas=(2.0, 1.0, 0.5)),
                         config)
    assert relambda.entry("cbdb:qianlong").rank_tier == 4


def test_remove_painter_refused(demo_corpus, config):
    b = assemble_biography(demo_corpus, "npm:hs-0001", config)
    with pytest.raises(BiographyError, match="painter"):
        customize(demo_corpus, b,
                  CustomizeAction(kind="remove_figure", figure_id="cbdb:zhao-mengfu"),
                  config)


def test_unknown_figure_rejected(demo_corpus, config):
    b = assemble_biography(demo_corpus, "npm:hs-0001", config)
    with pytest.raises(NotFoundError):
        customize(demo_corpus, b,
                  CustomizeAction(kind="add_figure", figure_id="cbdb:ghost"), config)
    with pytest.raises(NotFoundError):
        customize(demo_corpus, b,
                  CustomizeAction(kind="remove_figure", figure_id="cbdb:ghost"), config)


def test_duplicate_add_rejected(demo_corpus, config):
    b = assemble_biography(demo_corpus, "npm:hs-0001", config)
    with pytest.raises(BiographyError, match="already"):
        customize(demo_corpus, b,
                  CustomizeAction(kind="add_figure", figure_id="cbdb:qianlong"), config)
