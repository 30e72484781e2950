import { describe, expect, it } from "vitest";

import { buildSealCloud, buildWordCloud } from "../src/wordCloud.js";

describe("word cloud encoding", () => {
  it("maps the max count to full opacity", () => {
    const items = buildWordCloud({ Qizhou: 10, "Que Mountain": 5, Huafuzhu: 1 });
    expect(items[0].text).toBe("Qizhou");
    expect(items[0].opacity).toBe(1);
    expect(items[2].opacity).toBeLessThan(items[1].opacity);
    expect(items[2].opacity).toBeGreaterThanOrEqual(0.25);
  });

  it("opacity grows with count", () => {
    const items = buildWordCloud({ a: 1, b: 2, c: 3, d: 4 });
    for (let i = 1; i < items.length; i++) {
      expect(items[i - 1].opacity).toBeGreaterThan(items[i].opacity);
    }
  });

  it("empty and zero frequencies produce nothing", () => {
    expect(buildWordCloud({})).toEqual([]);
    expect(buildWordCloud({ a: 0 })).toEqual([]);
  });

  it("seal cloud clusters by dynasty and shades frames by corpus count", () => {
    const clustered = buildSealCloud(
      { "p:a": 33, "p:b": 1 },
      { "p:a": 50, "p:b": 10 },
      { "p:a": "Qing", "p:b": "Ming" },
      { "p:a": "Emperor", "p:b": "Collector" },
    );
    expect([...clustered.keys()].sort()).toEqual(["Ming", "Qing"]);
    const qing = clustered.get("Qing")![0];
    expect(qing.text).toBe("Emperor");
    expect(qing.sealerId).toBe("p:a");
    expect(qing.frameShade).toBe(1);
    expect(qing.opacity).toBe(1);
  });
});
