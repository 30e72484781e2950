"""Synthetic demonstration corpus.

Builds a small but fully cross-referenced data directory in the corpus
format: three handscrolls with synthetic raster images, a person store
with alias collisions (22 figures share the alias "Gong Jin"), a place
store with single- and dual-source entries, an era table with a
cross-dynasty homonym, an event graph dense enough for social-network
disambiguation, and a seal gallery with feature vectors.

The first handscroll mirrors the shape of a famous Yuan-dynasty case:
fifteen figures left marks on it, one emperor alone contributing 33
seals and 9 inscriptions.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .carve import RegionAnnotation
from .chrono import EraTable
from .config import EngineConfig
from .corpus import (
    Alias,
    Corpus,
    EventRecord,
    HandscrollRecord,
    Identity,
    InscriptionRecord,
    Person,
    PlaceRecord,
    Rect,
    ReferenceDatabases,
    SealAnnotation,
    SealGalleryEntry,
    save_corpus,
)
from .entities import EntityMention

FEATURE_DIM = 16

ZHAO = "cbdb:zhao-mengfu"
QIANLONG = "cbdb:qianlong"
ZHOU_MI = "cbdb:zhou-mi"
LI_KEZHONG = "cbdb:li-kezhong"
HUANG = "cbdb:huang-gongwang"
QIAN_PU = "cbdb:qian-pu"
QUEEN_MOTHER = "perad:queen-mother-west"

# The fourteen collectors/appreciators of the first scroll, in rough
# chronological order (the painter makes fifteen figures total).
COLLECTORS = [
    ("cbdb:yang-zai", "Yang Zai", "Yuan", 1271, 1323),
    ("cbdb:yu-ji", "Yu Ji", "Yuan", 1272, 1348),
    ("cbdb:wen-zhengming", "Wen Zhengming", "Ming", 1470, 1559),
    ("cbdb:xiang-yuanbian", "Xiang Yuanbian", "Ming", 1525, 1590),
    ("cbdb:dong-qichang", "Dong Qichang", "Ming", 1555, 1636),
    ("cbdb:wang-shimin", "Wang Shimin", "Qing", 1592, 1680),
    ("cbdb:liang-qingbiao", "Liang Qingbiao", "Qing", 1620, 1691),
    ("cbdb:geng-zhaozhong", "Geng Zhaozhong", "Qing", 1640, 1686),
    ("cbdb:gao-shiqi", "Gao Shiqi", "Qing", 1645, 1703),
    ("cbdb:song-luo", "Song Luo", "Qing", 1634, 1713),
    ("cbdb:bian-yongyu", "Bian Yongyu", "Qing", 1645, 1712),
    ("cbdb:an-qi", "An Qi", "Qing", 1683, 1745),
    ("cbdb:na-yancheng", "Na Yancheng", "Qing", 1764, 1833),
]


def _silk_strip(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """Tan silk background with a faint woven texture."""
    base = np.array([214, 196, 160], dtype=np.float64)
    img = np.tile(base, (height, width, 1))
    yy, xx = np.mgrid[0:height, 0:width]
    weave = 6.0 * np.sin(xx / 2.3) * np.sin(yy / 2.1)
    img += weave[..., np.newaxis]
    img += rng.normal(0, 2.0, size=(height, width, 1))
    return np.clip(img, 0, 255).astype(np.uint8)


def _paint_core(img: np.ndarray, x0: int, x1: int) -> None:
    """Blue-green mountains over a pale wash inside the core region."""
    h = img.shape[0]
    img[:, x0:x1] = (228, 222, 200)
    yy, xx = np.mgrid[0:h, 0:x1 - x0]
    for cx, cw, color in ((0.3, 0.18, (70, 105, 90)), (0.7, 0.12, (60, 80, 110))):
        center = cx * (x1 - x0)
        halfw = cw * (x1 - x0)
        ridge = h * 0.35 + (np.abs(xx - center) / halfw) * h * 0.55
        mask = yy > ridge
        for c in range(3):
            img[:, x0:x1, c][mask] = color[c]


def _paint_text(img: np.ndarray, x0: int, x1: int, rng: np.random.Generator) -> None:
    """Columns of dark strokes imitating inscription calligraphy."""
    h = img.shape[0]
    for col in range(x0 + 4, x1 - 4, 9):
        for row in range(6, h - 6, 7):
            if rng.random() < 0.8:
                img[row:row + 4, col:col + 5] = (40, 30, 25)


def _paint_seal(img: np.ndarray, box: Rect) -> None:
    img[box.y:box.y + box.h, box.x:box.x + box.w] = (180, 40, 35)
    img[box.y + 2:box.y + box.h - 2, box.x + 2:box.x + box.w - 2] = (205, 70, 60)


def _unit(rng: np.random.Generator, dim: int = FEATURE_DIM) -> np.ndarray:
    v = rng.normal(size=dim)
    return (v / np.linalg.norm(v)).astype(np.float32)


def build_demo_corpus(root: str | Path, seed: int = 7) -> Path:
    """Write the demonstration corpus under ``root`` and return it."""
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    persons: dict[str, Person] = {}

    def add_person(pid, name, dynasty, birth, death, *, sources=("CBDB",), aliases=(),
                   identities=(), lit=0, role=None):
        persons[pid] = Person(
            id=pid, name=name, sources=frozenset(sources), aliases=tuple(aliases),
            birth_year=birth, death_year=death, dynasty=dynasty,
            identities=tuple(identities), literature_mentions=lit, school_role=role,
        )

    add_person(
        ZHAO, "Zhao Mengfu", "Yuan", 1254, 1322,
        sources=("CBDB", "PerAD"),
        aliases=(Alias("Zi'ang", frozenset(["CBDB"])),
                 Alias("趙孟頫", frozenset(["CBDB", "PerAD"]))),
        identities=(Identity("literati"), Identity("official", 18.0)),
        lit=240, role="pioneer",
    )
    add_person(
        QIANLONG, "Qianlong Emperor", "Qing", 1711, 1799,
        aliases=(Alias("Hongli", frozenset(["CBDB"])),),
        identities=(Identity("collector"), Identity("official", 20.0)),
        lit=180,
    )
    add_person(
        ZHOU_MI, "Zhou Mi", "Yuan", 1232, 1298,
        sources=("CBDB", "PerAD"),
        aliases=(Alias("Gong Jin", frozenset(["CBDB"])),
                 Alias("Bianyang Laoren", frozenset(["PerAD"]))),
        identities=(Identity("literati"), Identity("collector")),
        lit=120,
    )
    add_person(
        LI_KEZHONG, "Li Kezhong", "Yuan", 1250, 1320,
        aliases=(Alias("Gong Jin", frozenset(["CBDB"])),),
    )
    # Twenty more same-alias figures outside the Yuan dynasty.
    for i in range(20):
        dynasty = ("Song", "Ming", "Qing")[i % 3]
        lo, hi = {"Song": (980, 1260), "Ming": (1370, 1630), "Qing": (1640, 1900)}[dynasty]
        birth = lo + (i * 13) % (hi - lo - 60)
        add_person(
            f"cbdb:gongjin-{i:02d}", f"Namesake {i:02d}", dynasty, birth, birth + 55,
            aliases=(Alias("Gong Jin", frozenset(["CBDB"])),),
        )
    add_person(
        HUANG, "Huang Gongwang", "Yuan", 1269, 1354,
        sources=("CBDB", "PerAD"),
        identities=(Identity("literati"),), lit=150, role="representative",
    )
    add_person(
        QIAN_PU, "Qian Pu", "Ming", 1408, 1488,
        aliases=(Alias("錢溥", frozenset(["CBDB"])),),
        identities=(Identity("official", 12.0),),
    )
    add_person(
        QUEEN_MOTHER, "Queen Mother of the West", None, None, None,
        sources=("PerAD",),
        aliases=(Alias("Jin Mu", frozenset(["PerAD"])),
                 Alias("金母", frozenset(["PerAD"]))),
        lit=60,
    )
    for pid, name, dynasty, birth, death in COLLECTORS:
        add_person(
            pid, name, dynasty, birth, death,
            identities=(Identity("collector"),), lit=10 + (birth % 30),
        )

    places = {
        "plaad:qizhou": PlaceRecord(
            id="plaad:qizhou", name="Qizhou", sources=frozenset(["PlaAD", "CBDB"]),
            modern_name="Jinan",
        ),
        "plaad:que-mountain": PlaceRecord(
            id="plaad:que-mountain", name="Que Mountain", sources=frozenset(["PlaAD"]),
            aliases=(Alias("鵲山", frozenset(["PlaAD"])),),
        ),
        "plaad:huafuzhu": PlaceRecord(
            id="plaad:huafuzhu", name="Huafuzhu Mountain", sources=frozenset(["PlaAD"]),
        ),
    }

    eras = EraTable.from_records([
        {"name": "Zhiyuan", "dynasty": "Yuan", "start_year": 1264, "end_year": 1294},
        {"name": "Yuanzhen", "dynasty": "Yuan", "start_year": 1295, "end_year": 1297},
        {"name": "Tianshun", "dynasty": "Yuan", "start_year": 1328, "end_year": 1328},
        {"name": "Tianshun", "dynasty": "Ming", "start_year": 1457, "end_year": 1464},
        {"name": "Hongwu", "dynasty": "Ming", "start_year": 1368, "end_year": 1398},
        {"name": "Kangxi", "dynasty": "Qing", "start_year": 1662, "end_year": 1722},
        {"name": "Qianlong", "dynasty": "Qing", "start_year": 1736, "end_year": 1796},
    ])

    # Event graph: Zhou Mi shares 23 events with the painter; Li Kezhong
    # shares none. A few events connect the on-scroll figures.
    events: list[EventRecord] = []
    for i in range(23):
        events.append(EventRecord(
            id=f"tad:zhoumi-{i:02d}",
            participants=(ZHAO, ZHOU_MI),
            type="Academic" if i % 3 else "Political",
            source="TAD",
            year=1290 + (i % 8),
            description="Recorded exchange between Zhao Mengfu and Zhou Mi",
        ))
    events += [
        EventRecord("cbdb:ev-resign", (ZHAO,), "Political", "CBDB", None,
                    "Resigned the Qizhou post (year missing in the source record)"),
        EventRecord("tad:ev-teacher", (ZHAO, HUANG), "Academic", "TAD", 1299,
                    "Teacher-student exchange on landscape method"),
        EventRecord("tad:ev-collect-1", (QIANLONG, "cbdb:liang-qingbiao"), "Political",
                    "TAD", 1691, "Collection entered the imperial catalogue"),
        EventRecord("tad:ev-collect-2", (QIANLONG, "cbdb:an-qi"), "Political", "TAD",
                    1742, "Acquisition from the An family"),
        EventRecord("tad:ev-lit-1", ("cbdb:dong-qichang", "cbdb:xiang-yuanbian"),
                    "Academic", "TAD", 1589, "Joint viewing and colophon session"),
        EventRecord("tad:ev-lit-2", ("cbdb:dong-qichang", "cbdb:xiang-yuanbian"),
                    "Academic", "TAD", 1590, "Second viewing session"),
        EventRecord("tad:ev-lit-3", ("cbdb:dong-qichang", "cbdb:xiang-yuanbian"),
                    "Paint", "TAD", 1591, "Copy made after the scroll"),
    ]

    # Seal gallery: two seals per known figure plus unattributed extras.
    gallery: dict[str, SealGalleryEntry] = {}
    gallery_vecs: list[np.ndarray] = []
    scroll_figures = [ZHAO] + [pid for pid, *_ in COLLECTORS] + [QIANLONG]
    for pid in scroll_figures:
        for j in range(2):
            sid = f"chfsd:{pid.split(':')[1]}-{j}"
            gallery[sid] = SealGalleryEntry(
                id=sid, feature_index=len(gallery_vecs), sealer_id=pid,
                content=f"seal of {persons[pid].name}",
            )
            gallery_vecs.append(_unit(rng))
    for j in range(8):
        sid = f"chfsd:unattributed-{j}"
        gallery[sid] = SealGalleryEntry(
            id=sid, feature_index=len(gallery_vecs), sealer_id=None,
            content="unread seal",
        )
        gallery_vecs.append(_unit(rng))

    # ----- handscroll 1: the fifteen-figure scroll -------------------------
    width, height = 840, 120
    img = _silk_strip(rng, width, height)
    core = Rect(300, 0, 280, height)
    _paint_core(img, core.x, core.x + core.w)
    _paint_text(img, 70, 190, rng)
    _paint_text(img, 640, 760, rng)
    regions = (
        RegionAnnotation(0, 70, "silk"),
        RegionAnnotation(70, 120, "text"),
        RegionAnnotation(190, 110, "silk"),
        RegionAnnotation(580, 60, "silk"),
        RegionAnnotation(640, 120, "text"),
        RegionAnnotation(760, 80, "silk"),
    )

    seal_vecs: list[np.ndarray] = []
    seals: list[SealAnnotation] = []

    def add_seal(x, y, sealer, year, matched=None):
        box = Rect(x, y, 12, 14)
        _paint_seal(img, box)
        if matched is None and sealer is not None:
            matched = f"chfsd:{sealer.split(':')[1]}-0"
        base = gallery_vecs[gallery[matched].feature_index] if matched else _unit(rng)
        noisy = base + rng.normal(0, 0.08, size=FEATURE_DIM).astype(np.float32)
        seal_vecs.append((noisy / np.linalg.norm(noisy)).astype(np.float32))
        seals.append(SealAnnotation(
            box=box, feature_index=len(seal_vecs) - 1, matched_seal_id=matched,
            sealer_id=sealer, timestamp_year=year,
        ))

    add_seal(210, 12, ZHAO, None)
    # Qianlong: 33 seals, most dated inside 1736..1795.
    for i in range(33):
        x = 600 + (i % 11) * 20
        y = 8 + (i // 11) * 34
        year = 1745 + (i % 17) if i % 5 else None
        add_seal(x, y, QIANLONG, year)
    slots = [(16, 14), (16, 48), (16, 82), (40, 14), (40, 48), (40, 82),
             (230, 44), (230, 78), (254, 12), (254, 46), (254, 80), (278, 30),
             (198, 80)]
    for (pid, _, _, birth, death), (x, y) in zip(COLLECTORS, slots):
        # Song Luo's seal is deliberately dated after his death to
        # exercise the lifespan-violation flag.
        year = death + 5 if pid == "cbdb:song-luo" else min(birth + 40, death)
        add_seal(x, y, pid, year)
    add_seal(64, 14, "cbdb:xiang-yuanbian", None)  # his second mark here
    add_seal(282, 96, None, None, matched=None)  # unread seal: uncertainty data

    zhao_text = ("Yuanzhen second year. I resigned my post in Qizhou and painted "
                 "the colors of Que Mountain and Huafuzhu Mountain for Gong Jin.")
    zhao_mentions = (
        EntityMention(0, 20, zhao_text[0:20], "Time", 0.95),
        EntityMention(44, 50, "Qizhou", "Location", 0.95),
        EntityMention(77, 89, "Que Mountain", "Location", 0.9),
        EntityMention(94, 111, "Huafuzhu Mountain", "Location", 0.9),
        EntityMention(116, 124, "Gong Jin", "Figure", 0.9),
    )
    inscriptions = [InscriptionRecord(
        id="ins:hs1-zhao", text=zhao_text, author_id=ZHAO,
        mentions=zhao_mentions, timestamp_year=1296,
    )]
    for i in range(9):
        text = (f"Inscribed on viewing no. {i + 1}: passing Qizhou again, "
                "the Que Mountain stands as painted.")
        inscriptions.append(InscriptionRecord(
            id=f"ins:hs1-qianlong-{i}", text=text, author_id=QIANLONG,
            mentions=(
                EntityMention(36, 42, "Qizhou", "Location", 0.85),
                EntityMention(54, 66, "Que Mountain", "Location", 0.85),
            ),
            timestamp_year=1748 + i,
        ))
    inscriptions.append(InscriptionRecord(
        id="ins:hs1-dong", text="A true wonder of the Yuan masters.",
        author_id="cbdb:dong-qichang", mentions=(), timestamp_year=None,
    ))

    Image.fromarray(img).save(root / "images" / "hs-0001.png")
    hs1 = HandscrollRecord(
        id="npm:hs-0001",
        title="Autumn Colors on the Que and Hua Mountains",
        image_ref="images/hs-0001.png",
        core_region=core,
        painter_id=ZHAO,
        seals=tuple(seals),
        inscriptions=tuple(inscriptions),
        regions=regions,
        theme_text="autumn colors que hua mountains landscape resignation friendship",
        painting_feature_index=0,
    )

    # ----- handscroll 2: stylistic descendant ------------------------------
    width2, height2 = 600, 100
    img2 = _silk_strip(rng, width2, height2)
    core2 = Rect(180, 0, 240, height2)
    _paint_core(img2, core2.x, core2.x + core2.w)
    _paint_text(img2, 40, 140, rng)
    seal_box2 = Rect(480, 20, 12, 14)
    _paint_seal(img2, seal_box2)
    base = gallery_vecs[gallery["chfsd:xiang-yuanbian-0"].feature_index]
    noisy = base + rng.normal(0, 0.08, size=FEATURE_DIM).astype(np.float32)
    seal_vecs.append((noisy / np.linalg.norm(noisy)).astype(np.float32))
    Image.fromarray(img2).save(root / "images" / "hs-0002.png")
    hs2 = HandscrollRecord(
        id="npm:hs-0002",
        title="Dwelling in the Autumn Mountains",
        image_ref="images/hs-0002.png",
        core_region=core2,
        painter_id=HUANG,
        seals=(SealAnnotation(
            box=seal_box2, feature_index=len(seal_vecs) - 1,
            matched_seal_id="chfsd:xiang-yuanbian-0",
            sealer_id="cbdb:xiang-yuanbian", timestamp_year=1560,
        ),),
        inscriptions=(InscriptionRecord(
            id="ins:hs2-huang", text="After the manner of my teacher.",
            author_id=HUANG, mentions=(), timestamp_year=1338,
        ),),
        regions=(RegionAnnotation(40, 100, "text"), RegionAnnotation(440, 160, "silk")),
        theme_text="autumn mountains dwelling landscape rivers mist",
        painting_feature_index=1,
    )

    # ----- handscroll 3: unattributed (uncertainty data) --------------------
    width3, height3 = 600, 100
    img3 = _silk_strip(rng, width3, height3)
    core3 = Rect(150, 0, 300, height3)
    _paint_core(img3, core3.x, core3.x + core3.w)
    Image.fromarray(img3).save(root / "images" / "hs-0003.png")
    unread_vec = _unit(rng)
    seal_vecs.append(unread_vec)
    hs3 = HandscrollRecord(
        id="npm:hs-0003",
        title="River Pavilion (painter unknown)",
        image_ref="images/hs-0003.png",
        core_region=core3,
        painter_id=None,
        seals=(SealAnnotation(
            box=Rect(500, 30, 12, 14), feature_index=len(seal_vecs) - 1,
            matched_seal_id=None, sealer_id=None, timestamp_year=None,
        ),),
        inscriptions=(),
        regions=(),
        theme_text="river pavilion boats calligraphy study",
        painting_feature_index=2,
    )

    # Painting features: scroll 2 sits near scroll 1, scroll 3 far away.
    p1 = _unit(rng)
    p2 = p1 + rng.normal(0, 0.15, size=FEATURE_DIM).astype(np.float32)
    p2 = (p2 / np.linalg.norm(p2)).astype(np.float32)
    p3 = _unit(rng)

    dbs = ReferenceDatabases(
        persons=persons, places=places, eras=eras,
        events=tuple(events), seal_gallery=gallery,
    )
    corpus = Corpus(
        root=root,
        handscrolls={h.id: h for h in (hs1, hs2, hs3)},
        dbs=dbs,
        vector_arrays={
            "seal_gallery": np.stack(gallery_vecs).astype(np.float32),
            "handscroll_seals": np.stack(seal_vecs).astype(np.float32),
            "paintings": np.stack([p1, p2, p3]).astype(np.float32),
        },
    )
    save_corpus(corpus, root)
    return root


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="write the demo corpus")
    parser.add_argument("--out", required=True, help="target directory")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)
    path = build_demo_corpus(args.out, seed=args.seed)
    cfg = EngineConfig()
    # Reload through the validator so a broken builder fails here.
    from .corpus import load_corpus

    corpus = load_corpus(path, cfg)
    print(f"demo corpus at {path}: {len(corpus.handscrolls)} handscrolls, "
          f"{len(corpus.dbs.persons)} persons, {len(corpus.dbs.events)} events")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
