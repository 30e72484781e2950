// Ring view model: rotation state, hit-testing through the served block
// mapping (never pixel colors), and link-line geometry for seals and
// inscription mentions.

import type { RingArcJson, RingLayoutJson, SealJson, SegmentPlanJson } from "./types.js";

const TAU = 2 * Math.PI;

export interface RingPoint {
  u: number;
  v: number;
}

export interface ArcOverlay {
  arc: RingArcJson;
  // global angles with the current rotation applied, ready for
  // CanvasRenderingContext2D.arc (which measures from 3 o'clock).
  startAngle: number;
  endAngle: number;
}

export interface LinkLine {
  kind: "solid" | "dashed"; // solid = seal position, dashed = mention
  from: RingPoint; // ring center
  to: RingPoint; // anchor on the ring
  stripX: number;
}

export class RingViewModel {
  private rotationAngle = 0;
  // cumulative strip offsets per plan block
  private stripOffsets: number[] = [];

  constructor(
    readonly layout: RingLayoutJson,
    readonly plan: SegmentPlanJson,
  ) {
    let offset = 0;
    for (const block of plan.blocks) {
      this.stripOffsets.push(offset);
      offset += block.assigned_width;
    }
  }

  get rotation(): number {
    return this.rotationAngle;
  }

  rotate(delta: number): void {
    this.rotationAngle = ((this.rotationAngle + delta) % TAU + TAU) % TAU;
  }

  rotateToStripX(stripX: number): void {
    // put the given strip column at twelve o'clock
    this.rotationAngle = ((-this.theta(stripX)) % TAU + TAU) % TAU;
  }

  get center(): RingPoint {
    return { u: this.layout.outer_radius, v: this.layout.outer_radius };
  }

  theta(stripX: number): number {
    return (TAU * stripX) / this.layout.strip_width;
  }

  // Original-image x -> strip x through the per-block affine mapping.
  stripXFromOriginal(originalX: number): number | null {
    for (let i = 0; i < this.plan.blocks.length; i++) {
      const b = this.plan.blocks[i];
      if (b.natural_width === 0) continue; // synthetic padding
      if (originalX >= b.x && originalX < b.x + b.natural_width) {
        const frac = (originalX - b.x) / b.natural_width;
        return this.stripOffsets[i] + frac * b.assigned_width;
      }
    }
    return null;
  }

  pointAt(stripX: number, rowFrac: number): RingPoint {
    const g = this.layout;
    const angle = this.theta(stripX) + this.rotationAngle;
    const inner = g.outer_radius - g.thickness;
    const r = g.top_to_outer
      ? g.outer_radius - g.thickness * rowFrac
      : inner + g.thickness * rowFrac;
    return {
      u: this.center.u + r * Math.sin(angle),
      v: this.center.v - r * Math.cos(angle),
    };
  }

  // Exact inverse of the served mapping, rotation removed first.
  hitTest(u: number, v: number): RingArcJson | null {
    const g = this.layout;
    const du = u - this.center.u;
    const dv = this.center.v - v;
    const r = Math.hypot(du, dv);
    if (r < g.outer_radius - g.thickness || r > g.outer_radius) return null;
    let angle = Math.atan2(du, dv) - this.rotationAngle;
    angle = ((angle % TAU) + TAU) % TAU;
    const x = (angle * g.strip_width) / TAU;
    for (const arc of this.layout.arcs) {
      const base = arc.half === 0 ? 0 : Math.PI;
      const x0 = ((base + arc.theta_start) * g.strip_width) / TAU;
      const x1 = ((base + arc.theta_end) * g.strip_width) / TAU;
      if (x >= x0 && x < x1) return arc;
    }
    return null;
  }

  // One overlay per served arc; the smoke check compares this count to
  // the layout's arc count.
  overlays(): ArcOverlay[] {
    return this.layout.arcs.map((arc) => {
      const base = arc.half === 0 ? 0 : Math.PI;
      // canvas arc() angles start at 3 o'clock; ours at 12.
      const start = base + arc.theta_start + this.rotationAngle - Math.PI / 2;
      return { arc, startAngle: start, endAngle: start + (arc.theta_end - arc.theta_start) };
    });
  }

  // Solid link lines from the ring center to each seal of one sealer.
  sealLinkLines(seals: SealJson[], sealerId: string): LinkLine[] {
    const lines: LinkLine[] = [];
    for (const seal of seals) {
      if (seal.sealer_id !== sealerId) continue;
      const cx = seal.box.x + seal.box.w / 2;
      const stripX = this.stripXFromOriginal(cx);
      if (stripX === null) continue;
      lines.push({
        kind: "solid",
        from: this.center,
        to: this.pointAt(stripX, 0),
        stripX,
      });
    }
    return lines;
  }

  // Dashed link lines to inscription-mention anchors (original-image x).
  mentionLinkLines(anchorXs: number[]): LinkLine[] {
    const lines: LinkLine[] = [];
    for (const x of anchorXs) {
      const stripX = this.stripXFromOriginal(x);
      if (stripX === null) continue;
      lines.push({ kind: "dashed", from: this.center, to: this.pointAt(stripX, 0), stripX });
    }
    return lines;
  }
}
