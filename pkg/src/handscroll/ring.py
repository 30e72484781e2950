"""Projection of a retargeted strip into a circular ring.

The strip is split into two equal halves; each wraps a 180-degree
semicircle and the pair concatenates into a full ring. Under the default
(angular-continuity) convention column x simply maps to angle
theta = 2*pi*x/W, with the alternative mirrored second half behind a
flag. Rows map linearly from the outer radius (strip top) to the inner
radius. Rendering walks the output raster and inverse-maps each pixel
back into the strip with bilinear sampling, so the warp never leaves
holes.

Angles are measured clockwise from twelve o'clock, matching reading
order around the ring.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import atan2, cos, hypot, pi, sin

import numpy as np

from .carve import SegmentPlan
from .energy import as_image


class RingGeometryError(ValueError):
    pass


@dataclass(frozen=True)
class RingGeometry:
    outer_radius: float
    thickness: float

    def __post_init__(self):
        if self.thickness <= 0 or self.outer_radius <= 0:
            raise RingGeometryError("radius and thickness must be positive")
        if self.thickness >= self.outer_radius:
            raise RingGeometryError(
                f"thickness {self.thickness} must be smaller than outer radius "
                f"{self.outer_radius}"
            )

    @property
    def inner_radius(self) -> float:
        return self.outer_radius - self.thickness


@dataclass(frozen=True)
class RingArc:
    """One annular trapezoid: a strip block (or half-block) on the ring."""

    block_index: int
    kind: str
    half: int  # 0 = first semicircle, 1 = second
    theta_start: float  # local to the half, in [0, pi]
    theta_end: float
    inner_radius: float
    outer_radius: float
    strip_x0: int
    strip_x1: int

    def to_json(self) -> dict:
        return {
            "block_index": self.block_index,
            "kind": self.kind,
            "half": self.half,
            "theta_start": self.theta_start,
            "theta_end": self.theta_end,
            "inner_radius": self.inner_radius,
            "outer_radius": self.outer_radius,
            "strip_x0": self.strip_x0,
            "strip_x1": self.strip_x1,
        }


@dataclass(frozen=True)
class RingLayout:
    strip_width: int  # after even-padding
    strip_height: int
    geometry: RingGeometry
    arcs: tuple[RingArc, ...]
    top_to_outer: bool = True
    mirror_second_half: bool = False

    def theta(self, x: float) -> float:
        """Global angle of strip column x; strictly increasing in x."""
        return 2.0 * pi * x / self.strip_width

    def strip_to_ring(self, x: float, y: float) -> tuple[float, float]:
        """Strip coordinates to raster (u, v) in the rendered ring image."""
        theta = self.theta(x)
        if self.mirror_second_half and x >= self.strip_width / 2.0:
            theta = 3.0 * pi - theta
        r = self._radius_of_row(y)
        cx = cy = self.geometry.outer_radius
        return cx + r * sin(theta), cy - r * cos(theta)

    def ring_to_strip(self, u: float, v: float) -> tuple[float, float] | None:
        """Inverse mapping; None when (u, v) lies outside the annulus."""
        cx = cy = self.geometry.outer_radius
        dx, dy = u - cx, cy - v
        r = hypot(dx, dy)
        g = self.geometry
        if not g.inner_radius <= r <= g.outer_radius:
            return None
        theta = atan2(dx, dy) % (2.0 * pi)
        x = theta * self.strip_width / (2.0 * pi)
        if self.mirror_second_half and theta >= pi:
            x = (3.0 * pi - theta) * self.strip_width / (2.0 * pi)
        y = self._row_of_radius(r)
        return x, y

    def _radius_of_row(self, y: float) -> float:
        g = self.geometry
        frac = y / self.strip_height
        if self.top_to_outer:
            return g.outer_radius - g.thickness * frac
        return g.inner_radius + g.thickness * frac

    def _row_of_radius(self, r: float) -> float:
        g = self.geometry
        if self.top_to_outer:
            frac = (g.outer_radius - r) / g.thickness
        else:
            frac = (r - g.inner_radius) / g.thickness
        return frac * self.strip_height

    def hit_test(self, u: float, v: float) -> RingArc | None:
        """Arc under a raster point, via the block mapping (never pixels)."""
        hit = self.ring_to_strip(u, v)
        if hit is None:
            return None
        x, _ = hit
        for arc in self.arcs:
            base = 0.0 if arc.half == 0 else pi
            t0, t1 = base + arc.theta_start, base + arc.theta_end
            x0, x1 = t0 * self.strip_width / (2 * pi), t1 * self.strip_width / (2 * pi)
            if x0 <= x < x1:
                return arc
        return None

    def to_json(self) -> dict:
        return {
            "strip_width": self.strip_width,
            "strip_height": self.strip_height,
            "outer_radius": self.geometry.outer_radius,
            "thickness": self.geometry.thickness,
            "top_to_outer": self.top_to_outer,
            "mirror_second_half": self.mirror_second_half,
            "arcs": [a.to_json() for a in self.arcs],
        }


def _plan_arcs(plan: SegmentPlan | None, width: int, geom: RingGeometry) -> tuple[RingArc, ...]:
    """Blocks to annular trapezoids, split at the half boundary."""
    if plan is None:
        edges = [(0, width, "strip")]
    else:
        edges = []
        x = 0
        for b in plan.blocks:
            edges.append((x, x + b.assigned_width, b.kind))
            x += b.assigned_width
        if x != width:  # even-padding added one column
            edges[-1] = (edges[-1][0], width, edges[-1][2])

    half_w = width / 2.0
    arcs: list[RingArc] = []
    for i, (x0, x1, kind) in enumerate(edges):
        if x1 <= x0:
            continue
        pieces = []
        if x0 < half_w and x1 > half_w:
            pieces = [(x0, half_w), (half_w, x1)]
        else:
            pieces = [(x0, x1)]
        for px0, px1 in pieces:
            half = 0 if px0 < half_w else 1
            base = 0.0 if half == 0 else pi
            arcs.append(
                RingArc(
                    block_index=i,
                    kind=kind,
                    half=half,
                    theta_start=2.0 * pi * px0 / width - base,
                    theta_end=2.0 * pi * px1 / width - base,
                    inner_radius=geom.inner_radius,
                    outer_radius=geom.outer_radius,
                    strip_x0=int(px0),
                    strip_x1=int(px1),
                )
            )
    return tuple(arcs)


def project_ring(
    strip: np.ndarray,
    geometry: RingGeometry,
    plan: SegmentPlan | None = None,
    top_to_outer: bool = True,
    mirror_second_half: bool = False,
) -> tuple[RingLayout, np.ndarray]:
    """Lay a strip onto the ring and render it.

    Odd-width strips are padded by one replicated column so the two
    halves stay equal. Returns the layout (for hit-testing and link
    drawing) and an RGBA raster of size (2R, 2R); pixels outside the
    annulus are fully transparent.
    """
    arr = as_image(strip)
    if arr.shape[1] % 2 == 1:
        arr = np.concatenate([arr, arr[:, -1:]], axis=1)
    h, w = arr.shape[:2]

    layout = RingLayout(
        strip_width=w,
        strip_height=h,
        geometry=geometry,
        arcs=_plan_arcs(plan, w, geometry),
        top_to_outer=top_to_outer,
        mirror_second_half=mirror_second_half,
    )

    size = int(np.ceil(2 * geometry.outer_radius))
    cx = cy = geometry.outer_radius
    us = (np.arange(size) + 0.5)[np.newaxis, :] - cx
    vs = cy - (np.arange(size) + 0.5)[:, np.newaxis]
    r = np.hypot(us, vs)
    inside = (r >= geometry.inner_radius) & (r <= geometry.outer_radius)

    theta = np.arctan2(us, vs) % (2.0 * pi)
    x = theta * w / (2.0 * pi)
    if mirror_second_half:
        x = np.where(theta >= pi, (3.0 * pi - theta) * w / (2.0 * pi), x)
    if top_to_outer:
        frac = (geometry.outer_radius - r) / geometry.thickness
    else:
        frac = (r - geometry.inner_radius) / geometry.thickness
    y = frac * h

    rgba = np.zeros((size, size, 4), dtype=np.uint8)
    rgba[..., :3][inside] = _bilinear_sample(arr, x[inside], y[inside], wrap_x=True)
    rgba[..., 3][inside] = 255
    return layout, rgba


def _bilinear_sample(img: np.ndarray, x: np.ndarray, y: np.ndarray, wrap_x: bool) -> np.ndarray:
    """Sample continuous strip coordinates; x wraps (the ring closes)."""
    h, w = img.shape[:2]
    xs = x - 0.5  # continuous coord -> pixel-center space
    ys = np.clip(y - 0.5, 0, h - 1)
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    fx = (xs - x0)[..., np.newaxis]
    fy = (ys - y0)[..., np.newaxis]
    if wrap_x:
        x0m, x1m = x0 % w, (x0 + 1) % w
    else:
        x0m, x1m = np.clip(x0, 0, w - 1), np.clip(x0 + 1, 0, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    p = img.astype(np.float64)
    top = p[y0, x0m] * (1 - fx) + p[y0, x1m] * fx
    bot = p[y1, x0m] * (1 - fx) + p[y1, x1m] * fx
    out = top * (1 - fy) + bot * fy
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
