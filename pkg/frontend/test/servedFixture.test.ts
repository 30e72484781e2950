// Smoke checks against a layout captured verbatim from the running
// service (see test/fixtures/), so the view model is exercised on the
// real wire shape, not just hand-built geometry.

import { describe, expect, it } from "vitest";

import layoutFixture from "./fixtures/served_layout.json" with { type: "json" };
import recordFixture from "./fixtures/served_handscroll.json" with { type: "json" };
import { RingViewModel } from "../src/ringView.js";
import type { HandscrollJson, LayoutResponse } from "../src/types.js";

const layout = layoutFixture as unknown as LayoutResponse;
const record = recordFixture as unknown as HandscrollJson;

describe("served fixture smoke", () => {
  it("overlay count equals the served RingLayout arc count", () => {
    const vm = new RingViewModel(layout.ring, layout.plan);
    expect(vm.overlays().length).toBe(layout.ring.arcs.length);
    expect(layout.ring.arcs.length).toBeGreaterThanOrEqual(layout.plan.blocks.length);
  });

  it("assigned widths cover the strip exactly", () => {
    const total = layout.plan.blocks.reduce((acc, b) => acc + b.assigned_width, 0);
    expect(total).toBe(layout.plan.target_length);
  });

  it("every matched sealer's seals produce that many solid link lines", () => {
    const vm = new RingViewModel(layout.ring, layout.plan);
    const bySealer = new Map<string, number>();
    for (const seal of record.seals) {
      if (seal.sealer_id) {
        bySealer.set(seal.sealer_id, (bySealer.get(seal.sealer_id) ?? 0) + 1);
      }
    }
    // includes a 2-seal sealer (the painter-side collectors) and the
    // 33-seal emperor
    const counts = [...bySealer.values()];
    expect(counts).toContain(2);
    expect(counts).toContain(33);
    for (const [sealer, count] of bySealer) {
      const lines = vm.sealLinkLines(record.seals, sealer);
      expect(lines.length).toBe(count);
      expect(lines.every((l) => l.kind === "solid")).toBe(true);
    }
  });

  it("hit-testing lands inside the arc the point was generated from", () => {
    const vm = new RingViewModel(layout.ring, layout.plan);
    for (const arc of layout.ring.arcs) {
      if (arc.strip_x1 - arc.strip_x0 < 2) continue;
      const mid = (arc.strip_x0 + arc.strip_x1) / 2;
      const p = vm.pointAt(mid, 0.4);
      const hit = vm.hitTest(p.u, p.v);
      expect(hit).not.toBeNull();
      expect(hit!.strip_x0).toBe(arc.strip_x0);
    }
  });
});
