"""Seam carving and block-wise width planning for handscroll strips.

Carving removes minimum-cumulative-energy vertical seams (8-connected,
one pixel per row) found by dynamic programming, recomputing the energy
map after every removal. Planning divides the strip into blocks, pins the
core painting at one third of the target length, floors over-deformable
text blocks at a minimum compression ratio, and pushes the remaining
deficit onto silk and other low-information blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, floor
from typing import Callable, Sequence

import numpy as np

from .energy import as_image, fused_energy

KIND_CORE = "core"
KIND_TEXT = "text"
KIND_SILK = "silk"
KIND_OTHER = "other"
NONCORE_KINDS = (KIND_TEXT, KIND_SILK, KIND_OTHER)

EnergyFn = Callable[[np.ndarray], np.ndarray]


class CarveError(ValueError):
    pass


class PlanningError(ValueError):
    def __init__(self, message: str, required_relaxation: int = 0):
        super().__init__(message)
        self.required_relaxation = required_relaxation


def find_min_seam(energy: np.ndarray) -> np.ndarray:
    """Column index per row of the minimum-energy vertical seam.

    Seams are 8-connected: |column step| <= 1 between rows. Ties resolve
    to the leftmost column, so carving is deterministic.
    """
    e = np.asarray(energy, dtype=np.float64)
    h, w = e.shape
    cum = e.copy()
    step = np.zeros((h, w), dtype=np.int8)
    for y in range(1, h):
        prev = cum[y - 1]
        padded = np.pad(prev, 1, constant_values=np.inf)
        window = np.stack([padded[:w], padded[1:w + 1], padded[2:w + 2]])
        choice = np.argmin(window, axis=0)  # first (leftmost) minimum wins
        step[y] = choice.astype(np.int8) - 1
        cum[y] = e[y] + window[choice, np.arange(w)]

    seam = np.zeros(h, dtype=np.int64)
    seam[h - 1] = int(np.argmin(cum[h - 1]))
    for y in range(h - 1, 0, -1):
        seam[y - 1] = seam[y] + step[y, seam[y]]
    return seam


def seam_energy(energy: np.ndarray, seam: np.ndarray) -> float:
    return float(np.asarray(energy)[np.arange(len(seam)), seam].sum())


def remove_seam(img: np.ndarray, seam: np.ndarray) -> np.ndarray:
    arr = np.asarray(img)
    h, w = arr.shape[:2]
    mask = np.ones((h, w), dtype=bool)
    mask[np.arange(h), seam] = False
    if arr.ndim == 3:
        return arr[mask].reshape(h, w - 1, arr.shape[2])
    return arr[mask].reshape(h, w - 1)


def carve_width(
    img: np.ndarray,
    energy_fn: EnergyFn | None,
    target_width: int,
) -> np.ndarray:
    """Carve vertical seams until the image is ``target_width`` wide.

    The energy map is recomputed on the carved image before every removal
    (higher fidelity than batching seams). Widening is unsupported: this
    carver never inserts seams.
    """
    arr = as_image(img)
    h, w = arr.shape[:2]
    if target_width > w:
        raise CarveError(
            f"target width {target_width} exceeds source width {w}; seam insertion unsupported"
        )
    if target_width < 1:
        raise CarveError(f"target width must be >= 1, got {target_width}")
    fn = energy_fn or fused_energy
    out = arr
    while out.shape[1] > target_width:
        e = fn(out)
        if e.shape != out.shape[:2]:
            raise CarveError(f"energy shape {e.shape} does not match image {out.shape[:2]}")
        out = remove_seam(out, find_min_seam(e))
    return out


# ---------------------------------------------------------------------------
# Segment planning


@dataclass(frozen=True)
class RegionAnnotation:
    """Upstream classifier output: an x-range of the strip and its kind."""

    x: int
    width: int
    kind: str

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("region width must be positive")
        if self.kind not in NONCORE_KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")


@dataclass(frozen=True)
class PlannedBlock:
    x: int  # left edge in the source image; -1 for synthetic padding
    natural_width: int
    assigned_width: int
    kind: str
    min_ratio: float

    def to_json(self) -> dict:
        return {
            "x": self.x,
            "natural_width": self.natural_width,
            "assigned_width": self.assigned_width,
            "kind": self.kind,
            "min_ratio": self.min_ratio,
        }


@dataclass(frozen=True)
class SegmentPlan:
    target_length: int
    blocks: tuple[PlannedBlock, ...]

    def __post_init__(self):
        assigned = sum(b.assigned_width for b in self.blocks)
        if assigned != self.target_length:
            raise PlanningError(
                f"assigned widths sum to {assigned}, target is {self.target_length}"
            )
        for b in self.blocks:
            if b.kind == KIND_TEXT and b.assigned_width < b.min_ratio * b.natural_width:
                raise PlanningError(
                    f"text block at x={b.x} assigned {b.assigned_width} "
                    f"< floor {b.min_ratio * b.natural_width:.1f}"
                )

    @property
    def core(self) -> PlannedBlock:
        return next(b for b in self.blocks if b.kind == KIND_CORE)

    def to_json(self) -> dict:
        return {
            "target_length": self.target_length,
            "blocks": [b.to_json() for b in self.blocks],
        }


def _split_span(x0: int, x1: int, max_width: int) -> list[tuple[int, int]]:
    """Chop [x0, x1) into near-equal pieces of width <= max_width."""
    span = x1 - x0
    if span <= 0:
        return []
    pieces = ceil(span / max_width)
    base, extra = divmod(span, pieces)
    out = []
    x = x0
    for i in range(pieces):
        w = base + (1 if i < extra else 0)
        out.append((x, w))
        x += w
    return out


def _classify(x: int, w: int, regions: Sequence[RegionAnnotation]) -> str:
    """Kind with the largest overlap; text wins ties (protective)."""
    overlap = {k: 0 for k in NONCORE_KINDS}
    for r in regions:
        lo, hi = max(x, r.x), min(x + w, r.x + r.width)
        if hi > lo:
            overlap[r.kind] += hi - lo
    best = max(overlap.values())
    if best == 0:
        return KIND_OTHER
    for kind in (KIND_TEXT, KIND_SILK, KIND_OTHER):
        if overlap[kind] == best:
            return kind
    raise AssertionError("unreachable")


def plan_segments(
    image_width: int,
    core_x: int,
    core_width: int,
    regions: Sequence[RegionAnnotation],
    target_length: int,
    text_min_ratio: float = 0.75,
    block_max_width: int = 128,
    core_fraction: float = 1.0 / 3.0,
) -> SegmentPlan:
    """Assign integer widths to strip blocks summing exactly to the target.

    The core painting takes ``core_fraction`` of the target (uniformly
    scaled, never carved). Non-core spans are chopped into blocks of at
    most ``block_max_width`` natural pixels, given proportional shares of
    the remaining budget, with text blocks floored at ``text_min_ratio``
    of their natural width; their deficit is redistributed proportionally
    across the unfloored blocks. Integer widths come from largest-remainder
    rounding that never touches the floors.
    """
    if not (0 <= core_x and core_x + core_width <= image_width):
        raise PlanningError("core region outside image bounds")
    if core_width < 1:
        raise PlanningError("core region must have positive width")
    if target_length < core_width / 3.0:
        raise PlanningError(
            f"target {target_length} below feasibility bound {core_width / 3.0:.1f} "
            "(core natural width / 3)"
        )

    core_share = target_length * core_fraction
    budget = target_length - core_share

    spans = [
        (x, w, _classify(x, w, regions))
        for x, w in _split_span(0, core_x, block_max_width)
    ]
    right = [
        (x, w, _classify(x, w, regions))
        for x, w in _split_span(core_x + core_width, image_width, block_max_width)
    ]

    if not spans and not right:
        # Degenerate: the core spans the whole image. The remainder becomes
        # two synthetic padding blocks so the strip still sums to target.
        pads = [(-1, 0, KIND_OTHER), (-1, 0, KIND_OTHER)]
        shares = [budget / 2.0, budget / 2.0]
        ordered = [pads[0], (core_x, core_width, KIND_CORE), pads[1]]
        real = [shares[0], core_share, shares[1]]
        floors = [0, 0, 0]
        return _integerize(ordered, real, floors, target_length, text_min_ratio)

    noncore = spans + right
    shares = _waterfill(noncore, budget, text_min_ratio)

    ordered: list[tuple[int, int, str]] = []
    real: list[float] = []
    floors: list[int] = []
    for (x, w, kind), share in zip(spans, shares[: len(spans)]):
        ordered.append((x, w, kind))
        real.append(share)
        floors.append(_floor_px(w, kind, text_min_ratio))
    ordered.append((core_x, core_width, KIND_CORE))
    real.append(core_share)
    floors.append(0)
    for (x, w, kind), share in zip(right, shares[len(spans):]):
        ordered.append((x, w, kind))
        real.append(share)
        floors.append(_floor_px(w, kind, text_min_ratio))

    return _integerize(ordered, real, floors, target_length, text_min_ratio)


def _floor_px(natural: int, kind: str, text_min_ratio: float) -> int:
    if kind != KIND_TEXT:
        return 0
    return ceil(text_min_ratio * natural - 1e-9)


def _waterfill(
    blocks: Sequence[tuple[int, int, str]], budget: float, text_min_ratio: float
) -> list[float]:
    """Proportional shares with text floors; deficit flows to unpinned blocks."""
    n = len(blocks)
    shares = [0.0] * n
    pinned = [False] * n
    remaining = budget
    active = list(range(n))
    for _ in range(n + 1):
        nat_total = sum(blocks[i][1] for i in active)
        if nat_total == 0:
            even = remaining / len(active) if active else 0.0
            for i in active:
                shares[i] = even
            break
        changed = False
        for i in active:
            shares[i] = remaining * blocks[i][1] / nat_total
        for i in list(active):
            x, w, kind = blocks[i]
            fl = text_min_ratio * w if kind == KIND_TEXT else 0.0
            if kind == KIND_TEXT and shares[i] < fl:
                shares[i] = fl
                pinned[i] = True
                active.remove(i)
                remaining -= fl
                changed = True
        if not changed:
            break
    if remaining < -1e-9:
        deficit = ceil(-remaining)
        raise PlanningError(
            f"text floors exceed the non-core budget by {deficit} px; "
            f"relax the target or the floors", required_relaxation=deficit,
        )
    return shares


def _integerize(
    ordered: list[tuple[int, int, str]],
    real: list[float],
    floors: list[int],
    target: int,
    text_min_ratio: float,
) -> SegmentPlan:
    """Largest-remainder rounding under per-block lower bounds.

    The core never drops below floor(real share): it only participates in
    the +1 round, keeping it within one largest-remainder unit of target/3.
    """
    n = len(ordered)
    assigned = [max(floor(real[i]), floors[i]) for i in range(n)]
    fractional = [real[i] - floor(real[i]) for i in range(n)]
    total = sum(assigned)

    if total > target:
        takeable = sorted(
            (i for i in range(n) if ordered[i][2] != KIND_CORE),
            key=lambda i: (fractional[i], i),
        )
        for i in takeable:
            while total > target and assigned[i] - 1 >= floors[i] and assigned[i] > 0:
                assigned[i] -= 1
                total -= 1
            if total == target:
                break
        if total > target:
            raise PlanningError(
                f"cannot meet target {target}: floors leave {total - target} px of excess",
                required_relaxation=total - target,
            )
    elif total < target:
        order = sorted(range(n), key=lambda i: (-fractional[i], i))
        idx = 0
        while total < target:
            assigned[order[idx % n]] += 1
            total += 1
            idx += 1

    blocks = tuple(
        PlannedBlock(
            x=x, natural_width=w, assigned_width=assigned[i], kind=kind,
            min_ratio=text_min_ratio if kind == KIND_TEXT else 0.0,
        )
        for i, (x, w, kind) in enumerate(ordered)
    )
    return SegmentPlan(target_length=target, blocks=blocks)


# ---------------------------------------------------------------------------
# Strip assembly


def _scale_width(img: np.ndarray, new_width: int) -> np.ndarray:
    """Uniform horizontal rescale via linear interpolation of columns."""
    arr = np.asarray(img)
    h, w = arr.shape[:2]
    if new_width == w:
        return arr.copy()
    # Sample at pixel centers of the target grid.
    xs = (np.arange(new_width) + 0.5) * (w / new_width) - 0.5
    xs = np.clip(xs, 0, w - 1)
    x0 = np.floor(xs).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    frac = (xs - x0)[np.newaxis, :, np.newaxis]
    out = arr[:, x0].astype(np.float64) * (1 - frac) + arr[:, x1].astype(np.float64) * frac
    return np.clip(np.rint(out), 0, 255).astype(arr.dtype)


def compose_strip(
    img: np.ndarray,
    plan: SegmentPlan,
    energy_fn: EnergyFn | None = None,
    pad_value: int = 255,
) -> np.ndarray:
    """Render the retargeted strip: core scaled, non-core carved (or
    scaled when a block must grow), padding blocks blank."""
    arr = as_image(img)
    h = arr.shape[0]
    pieces: list[np.ndarray] = []
    for block in plan.blocks:
        if block.assigned_width == 0:
            continue
        if block.natural_width == 0:  # synthetic padding
            pieces.append(np.full((h, block.assigned_width, 3), pad_value, dtype=arr.dtype))
            continue
        sub = arr[:, block.x:block.x + block.natural_width]
        if block.kind == KIND_CORE or block.assigned_width >= block.natural_width:
            pieces.append(_scale_width(sub, block.assigned_width))
        else:
            pieces.append(carve_width(sub, energy_fn, block.assigned_width))
    return np.concatenate(pieces, axis=1) if pieces else arr[:, :0]
