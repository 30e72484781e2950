import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ResolveDialogController } from "../src/resolveDialog.js";
import type { ResolutionJson } from "../src/types.js";

// Stub server speaking the /resolve contract: ambiguous until the
// request carries manual_choice, then method=manual (mirrors the
// service's behavior, which the backend suite verifies over HTTP).
function stubFetch() {
  const calls: { url: string; body: Record<string, unknown> }[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const body = JSON.parse((init?.body as string) ?? "{}") as Record<string, unknown>;
    calls.push({ url, body });
    let payload: ResolutionJson;
    if (body.manual_choice) {
      payload = {
        kind: "person",
        surface: body.surface as string,
        entity_id: body.manual_choice as string,
        canonical_name: "Zhou Mi",
        matched_alias: null,
        sources: ["CBDB"],
        method: "manual",
        candidates_considered: [body.manual_choice as string],
        ambiguous: false,
      };
    } else {
      payload = {
        kind: "person",
        surface: body.surface as string,
        entity_id: null,
        canonical_name: null,
        matched_alias: body.surface as string,
        sources: [],
        method: null,
        candidates_considered: ["cbdb:li-kezhong", "cbdb:zhou-mi"],
        ambiguous: true,
      };
    }
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  };
  return { fetchFn, calls };
}

describe("resolve dialog", () => {
  it("manual choice round-trips through the API as method=manual (smoke)", async () => {
    const { fetchFn, calls } = stubFetch();
    const api = new ApiClient("", fetchFn);
    const dialog = new ResolveDialogController(api, "npm:hs-0001");

    const listed = await dialog.open("Gong Jin", "person", "Yuan");
    expect(listed.ambiguous).toBe(true);
    expect(dialog.needsManualChoice).toBe(true);
    expect(dialog.candidates).toEqual(["cbdb:li-kezhong", "cbdb:zhou-mi"]);

    const chosen = await dialog.chooseManual("cbdb:zhou-mi");
    expect(chosen.method).toBe("manual");
    expect(chosen.entity_id).toBe("cbdb:zhou-mi");
    expect(dialog.state).toBe("chosen");

    // the POST actually carried the manual choice
    expect(calls[1].body.manual_choice).toBe("cbdb:zhou-mi");
    expect(calls[1].url).toBe("/resolve");
  });

  it("propagates era hint and handscroll context on open", async () => {
    const { fetchFn, calls } = stubFetch();
    const dialog = new ResolveDialogController(new ApiClient("", fetchFn), "npm:hs-0001");
    await dialog.open("Gong Jin", "person", "Yuan");
    expect(calls[0].body.era_hint).toBe("Yuan");
    expect(calls[0].body.handscroll_id).toBe("npm:hs-0001");
  });

  it("surfaces API failures as error state", async () => {
    const failing = async (): Promise<Response> =>
      new Response(JSON.stringify({ detail: { error: "boom" } }), { status: 500 });
    const dialog = new ResolveDialogController(new ApiClient("", failing));
    await expect(dialog.open("x")).rejects.toThrow();
    expect(dialog.state).toBe("error");
  });
});
