"""HTTP JSON facade composing the engine for the browser client and
external scripts.

One ``ApiSession`` owns the loaded corpus, the built similarity indexes,
and the biography version store; the FastAPI app and the batch CLI share
it so both frontends run the same code path. GET routes are pure reads;
biography mutations go through optimistic versioning (a stale
``expected_version`` gets 409, never a silent overwrite) and every
applied action is appended to an on-disk audit log that replays on the
next session.
"""

from __future__ import annotations

import json
import logging
import threading
from math import pi
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse, JSONResponse
from PIL import Image
from pydantic import BaseModel, Field

from . import biography as bio
from .carve import PlanningError, SegmentPlan, compose_strip, plan_segments
from .config import EngineConfig
from .corpus import (
    Corpus,
    HandscrollRecord,
    NotFoundError,
    aggregate_element_stats,
    load_corpus,
)
from .energy import fused_energy
from .entities import (
    METHOD_MANUAL,
    Resolution,
    resolve_location,
    resolve_person_in_context,
)
from .ring import RingGeometry, RingGeometryError, RingLayout, _plan_arcs, project_ring
from .similarity import LshIndex, ThemeIndex, build_lsh

log = logging.getLogger("handscroll.service")

CUSTOMIZATIONS_FILE = "customizations.jsonl"


class VersionConflict(RuntimeError):
    def __init__(self, current: int):
        super().__init__(f"stale version; current is {current}")
        self.current = current


class ApiSession:
    """Corpus + indexes + biography versions behind one object.

    The corpus and indexes are immutable after construction; biography
    customization is serialized per session by a lock, so concurrent
    readers never see a half-applied edit.
    """

    def __init__(self, data_dir: str | Path, config: EngineConfig | None = None):
        self.config = config or EngineConfig()
        self.root = Path(data_dir)
        self.corpus: Corpus = load_corpus(self.root, self.config)
        self.theme_index = ThemeIndex.build(
            {hid: rec.theme_text for hid, rec in self.corpus.handscrolls.items()}
        )
        lsh = self.config.lsh
        self.painting_index: LshIndex = build_lsh(
            {
                hid: rec.painting_feature
                for hid, rec in self.corpus.handscrolls.items()
                if rec.painting_feature is not None
            },
            tables=lsh.tables, bits=lsh.bits, seed=0,
        )
        self.gallery_index: LshIndex = build_lsh(
            {
                sid: entry.feature
                for sid, entry in self.corpus.dbs.seal_gallery.items()
                if entry.feature is not None
            },
            tables=lsh.tables, bits=lsh.bits, seed=0,
        )
        self.cache_dir = self.root / ".cache" / "rings"
        self._biographies: dict[str, list[bio.Biography]] = {}
        self._lock = threading.Lock()
        self._replay_customizations()

    # -- biographies ---------------------------------------------------------

    def _versions(self, handscroll_id: str) -> list[bio.Biography]:
        if handscroll_id not in self._biographies:
            built = bio.assemble_biography(self.corpus, handscroll_id, self.config)
            self._biographies[handscroll_id] = [built]
        return self._biographies[handscroll_id]

    def biography(self, handscroll_id: str, version: int | None = None) -> bio.Biography:
        versions = self._versions(handscroll_id)
        if version is None:
            return versions[-1]
        for b in versions:
            if b.version == version:
                return b
        raise NotFoundError(f"{handscroll_id} version {version}")

    def customize(
        self,
        handscroll_id: str,
        action: bio.CustomizeAction,
        expected_version: int | None,
        record: bool = True,
    ) -> bio.Biography:
        with self._lock:
            versions = self._versions(handscroll_id)
            latest = versions[-1]
            if expected_version is not None and expected_version != latest.version:
                raise VersionConflict(latest.version)
            updated = bio.customize(self.corpus, latest, action, self.config)
            versions.append(updated)
            if record:
                self._append_customization(handscroll_id, action)
            return updated

    def _append_customization(self, handscroll_id: str, action: bio.CustomizeAction):
        entry = {
            "handscroll_id": handscroll_id,
            "action": {
                "kind": action.kind,
                "figure_id": action.figure_id,
                "lambdas": list(action.lambdas) if action.lambdas else None,
                "tier": action.tier,
                "note": action.note,
            },
        }
        with open(self.root / CUSTOMIZATIONS_FILE, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def _replay_customizations(self):
        path = self.root / CUSTOMIZATIONS_FILE
        if not path.exists():
            return
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            try:
                self.customize(
                    entry["handscroll_id"],
                    bio.CustomizeAction.from_json(entry["action"]),
                    expected_version=None,
                    record=False,
                )
            except (bio.BiographyError, NotFoundError) as exc:
                log.warning("skipping stale customization %r: %s", entry, exc)

    # -- layout ---------------------------------------------------------------

    def plan(self, handscroll_id: str, target: int) -> SegmentPlan:
        rec = self.corpus.handscroll(handscroll_id)
        with Image.open(self.corpus.image_path(rec)) as im:
            width = im.size[0]
        return plan_segments(
            image_width=width,
            core_x=rec.core_region.x,
            core_width=rec.core_region.w,
            regions=rec.regions,
            target_length=target,
            text_min_ratio=self.config.layout.text_min_ratio,
            block_max_width=self.config.layout.block_max_width,
            core_fraction=self.config.layout.core_fraction,
        )

    def ring_geometry(self, handscroll_id: str, target: int) -> RingGeometry:
        rec = self.corpus.handscroll(handscroll_id)
        with Image.open(self.corpus.image_path(rec)) as im:
            height = im.size[1]
        outer = target / (2.0 * pi)
        thickness = min(float(height), 0.6 * outer)
        return RingGeometry(outer_radius=outer, thickness=thickness)

    def layout(self, handscroll_id: str, target: int) -> tuple[SegmentPlan, RingLayout]:
        """Plan + ring layout without rendering (cheap path for the UI)."""
        plan = self.plan(handscroll_id, target)
        geometry = self.ring_geometry(handscroll_id, target)
        rec = self.corpus.handscroll(handscroll_id)
        with Image.open(self.corpus.image_path(rec)) as im:
            height = im.size[1]
        strip_w = target + (target % 2)
        return plan, RingLayout(
            strip_width=strip_w,
            strip_height=height,
            geometry=geometry,
            arcs=_plan_arcs(plan, strip_w, geometry),
            top_to_outer=self.config.layout.top_to_outer,
            mirror_second_half=self.config.layout.mirror_second_half,
        )

    def render_ring(self, handscroll_id: str, target: int) -> Path:
        """Render (or reuse) the ring PNG for one handscroll."""
        key = f"{handscroll_id.replace(':', '_')}-{target}-{self.config.content_hash()}.png"
        out = self.cache_dir / key
        if out.exists():
            return out
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        plan = self.plan(handscroll_id, target)
        img = self.corpus.load_image(handscroll_id)
        strip = compose_strip(img, plan, energy_fn=fused_energy)
        geometry = self.ring_geometry(handscroll_id, target)
        _, rgba = project_ring(
            strip, geometry, plan,
            top_to_outer=self.config.layout.top_to_outer,
            mirror_second_half=self.config.layout.mirror_second_half,
        )
        Image.fromarray(rgba).save(out)
        return out

    # -- figures ---------------------------------------------------------------

    def confirmed_figures(self, handscroll_id: str | None = None) -> set[str]:
        records = (
            [self.corpus.handscroll(handscroll_id)]
            if handscroll_id is not None
            else list(self.corpus.handscrolls.values())
        )
        out: set[str] = set()
        for rec in records:
            if rec.painter_id:
                out.add(rec.painter_id)
            out.update(s.sealer_id for s in rec.seals if s.sealer_id)
            out.update(i.author_id for i in rec.inscriptions if i.author_id)
        return out

    def resolve(
        self,
        surface: str,
        kind: str,
        era_hint: str | None,
        handscroll_id: str | None,
        manual_choice: str | None = None,
    ):
        if manual_choice is not None:
            # Explicit historian selection; the only path that yields
            # method=manual.
            if kind == "place":
                name, sources = self.corpus.dbs.place_display(manual_choice)
            else:
                name, sources = self.corpus.dbs.person_display(manual_choice)
            return Resolution(
                kind=kind, surface=surface, entity_id=manual_choice,
                canonical_name=name, matched_alias=None, sources=sources,
                method=METHOD_MANUAL, candidates_considered=(manual_choice,),
            )
        if kind == "place":
            return resolve_location(surface, self.corpus.dbs)
        confirmed = self.confirmed_figures(handscroll_id)
        candidates = [pid for pid, _ in self.corpus.dbs.person_alias_hits(surface)]
        graph = self.corpus.dbs.connection_counts(candidates, confirmed)
        return resolve_person_in_context(
            surface, self.corpus.dbs,
            context_era=era_hint, graph=graph, dynasties=self.config.dynasties,
        )


# ---------------------------------------------------------------------------
# FastAPI app


class ResolveRequest(BaseModel):
    surface: str
    kind: str = "person"
    era_hint: str | None = None
    handscroll_id: str | None = None
    manual_choice: str | None = None


class CohortRequest(BaseModel):
    figure_ids: list[str] = Field(min_length=1)


class CustomizeRequest(BaseModel):
    action: dict
    expected_version: int | None = None


def _record_json(rec: HandscrollRecord) -> dict:
    data = rec.to_json()
    data["seal_count"] = len(rec.seals)
    data["inscription_count"] = len(rec.inscriptions)
    return data


def create_app(session: ApiSession) -> FastAPI:
    app = FastAPI(title="handscroll biography service")
    corpus = session.corpus
    dbs = corpus.dbs

    def get_record(handscroll_id: str) -> HandscrollRecord:
        try:
            return corpus.handscroll(handscroll_id)
        except NotFoundError:
            raise HTTPException(404, detail={"error": "unknown handscroll",
                                             "id": handscroll_id})

    @app.get("/handscrolls")
    def list_handscrolls():
        return [
            _record_json(corpus.handscrolls[hid]) for hid in sorted(corpus.handscrolls)
        ]

    @app.get("/handscrolls/{handscroll_id}")
    def get_handscroll(handscroll_id: str):
        return _record_json(get_record(handscroll_id))

    @app.get("/handscrolls/{handscroll_id}/layout")
    def get_layout(handscroll_id: str, target: int = Query(default=900, ge=1)):
        get_record(handscroll_id)
        try:
            plan, layout = session.layout(handscroll_id, target)
        except (PlanningError, RingGeometryError) as exc:
            raise HTTPException(400, detail={"error": str(exc)})
        return {"plan": plan.to_json(), "ring": layout.to_json()}

    @app.get("/handscrolls/{handscroll_id}/ring.png")
    def get_ring_png(handscroll_id: str, target: int = Query(default=900, ge=1)):
        get_record(handscroll_id)
        try:
            path = session.render_ring(handscroll_id, target)
        except (PlanningError, RingGeometryError) as exc:
            raise HTTPException(400, detail={"error": str(exc)})
        return FileResponse(path, media_type="image/png")

    @app.get("/handscrolls/{handscroll_id}/stats")
    def get_stats(handscroll_id: str):
        get_record(handscroll_id)
        return aggregate_element_stats(corpus, handscroll_id).to_json()

    @app.post("/resolve")
    def post_resolve(req: ResolveRequest):
        if req.kind not in ("person", "place"):
            raise HTTPException(400, detail={"error": f"unknown kind {req.kind!r}"})
        try:
            res = session.resolve(req.surface, req.kind, req.era_hint,
                                  req.handscroll_id, req.manual_choice)
        except NotFoundError as exc:
            raise HTTPException(404, detail={"error": "unknown figure", "id": str(exc)})
        return res.to_json()

    @app.get("/figures/{figure_id}/ego")
    def get_ego(figure_id: str):
        if figure_id not in dbs.persons:
            raise HTTPException(404, detail={"error": "unknown figure", "id": figure_id})
        neighbors: dict[str, list[dict]] = {}
        for event in dbs.events_of(figure_id):
            for other in event.participants:
                if other != figure_id:
                    neighbors.setdefault(other, []).append({
                        "event_id": event.id, "type": event.type,
                        "year": event.year, "description": event.description,
                    })
        person = dbs.persons[figure_id]
        return {
            "figure": person.to_json(),
            "neighbors": [
                {
                    "figure_id": other,
                    "name": dbs.persons[other].name if other in dbs.persons else None,
                    "shared_events": sorted(evs, key=lambda e: e["event_id"]),
                }
                for other, evs in sorted(neighbors.items())
            ],
        }

    @app.post("/cohort")
    def post_cohort(req: CohortRequest):
        ids = req.figure_ids
        unknown = [i for i in ids if i not in dbs.persons]
        if unknown:
            raise HTTPException(404, detail={"error": "unknown figures", "id": unknown})
        matrix = []
        for a in ids:
            row = []
            for b in ids:
                if a == b:
                    row.append({"total": 0, "by_type": {}})
                    continue
                events = dbs.events_between(a, b)
                by_type: dict[str, int] = {}
                for e in events:
                    by_type[e.type] = by_type.get(e.type, 0) + 1
                row.append({"total": len(events), "by_type": dict(sorted(by_type.items()))})
            matrix.append(row)
        return {"figure_ids": ids, "matrix": matrix}

    @app.get("/handscrolls/{handscroll_id}/similar")
    def get_similar(
        handscroll_id: str,
        mode: str = Query(default="theme"),
        k: int = Query(default=5, ge=1),
    ):
        rec = get_record(handscroll_id)
        if mode == "theme":
            ranked = session.theme_index.similar(handscroll_id, k)
        elif mode == "feature":
            if rec.painting_feature is None:
                raise HTTPException(400, detail={"error": "handscroll has no painting feature"})
            ranked = [
                (hid, sim)
                for hid, sim in session.painting_index.query(
                    np.asarray(rec.painting_feature), k + 1)
                if hid != handscroll_id
            ][:k]
        else:
            raise HTTPException(400, detail={"error": f"unknown mode {mode!r}"})

        def birth_year(hid: str) -> tuple[int, int, str]:
            painter = corpus.handscrolls[hid].painter_id
            if painter and painter in dbs.persons:
                birth = dbs.persons[painter].birth_year
                if birth is not None:
                    return (0, birth, hid)
            return (1, 0, hid)

        # Presentation order: author birth year; unknown authors last.
        ordered = sorted((hid for hid, _ in ranked), key=birth_year)
        sims = dict(ranked)
        return [
            {
                "handscroll_id": hid,
                "title": corpus.handscrolls[hid].title,
                "painter_id": corpus.handscrolls[hid].painter_id,
                "painter_birth_year": (
                    dbs.persons[corpus.handscrolls[hid].painter_id].birth_year
                    if corpus.handscrolls[hid].painter_id in dbs.persons else None
                ),
                "similarity": sims[hid],
            }
            for hid in ordered
        ]

    @app.get("/handscrolls/{handscroll_id}/uncertain")
    def get_uncertain(handscroll_id: str):
        rec = get_record(handscroll_id)
        unresolved_mentions = []
        for ins in rec.inscriptions:
            for m in ins.mentions:
                if m.tag != "Figure":
                    continue
                res = session.resolve(m.surface, "person", None, handscroll_id)
                if not res.resolved or res.ambiguous:
                    unresolved_mentions.append({
                        "inscription_id": ins.id,
                        "surface": m.surface,
                        "candidates": list(res.candidates_considered),
                    })
        unmatched_seals = [
            i for i, s in enumerate(rec.seals) if s.sealer_id is None
        ]

        def undated_or_unattributed(hid: str) -> bool:
            other = corpus.handscrolls[hid]
            if other.painter_id is None:
                return True
            dated = any(s.timestamp_year for s in other.seals) or any(
                i.timestamp_year for i in other.inscriptions
            )
            return not dated

        similar = session.theme_index.similar(handscroll_id, k=10)
        uncertain_similar = [
            {"handscroll_id": hid, "similarity": sim}
            for hid, sim in similar
            if undated_or_unattributed(hid)
        ]
        return {
            "unresolved_figures": unresolved_mentions,
            "unmatched_seal_indexes": unmatched_seals,
            "uncertain_similar": uncertain_similar,
        }

    @app.get("/handscrolls/{handscroll_id}/biography")
    def get_biography(handscroll_id: str, version: int | None = Query(default=None)):
        get_record(handscroll_id)
        try:
            b = session.biography(handscroll_id, version)
        except NotFoundError:
            raise HTTPException(404, detail={"error": "unknown version",
                                             "id": handscroll_id})
        return JSONResponse(content=json.loads(b.serialize()))

    @app.post("/handscrolls/{handscroll_id}/customize")
    def post_customize(handscroll_id: str, req: CustomizeRequest):
        get_record(handscroll_id)
        try:
            action = bio.CustomizeAction.from_json(req.action)
            updated = session.customize(handscroll_id, action, req.expected_version)
        except VersionConflict as exc:
            raise HTTPException(409, detail={"error": str(exc),
                                             "current_version": exc.current})
        except NotFoundError as exc:
            raise HTTPException(404, detail={"error": "unknown figure", "id": str(exc)})
        except bio.BiographyError as exc:
            raise HTTPException(400, detail={"error": str(exc)})
        return JSONResponse(content=json.loads(updated.serialize()))

    ui_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_dir.exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def create_session_app(data_dir: str | Path, config: EngineConfig | None = None) -> FastAPI:
    return create_app(ApiSession(data_dir, config))
