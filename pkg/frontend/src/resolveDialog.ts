// Disambiguation dialog controller: fuzzy lookup, candidate listing with
// provenance, and the manual-selection path (the only way a resolution
// acquires method=manual).

import type { ApiClient } from "./api.js";
import type { ResolutionJson } from "./types.js";

export type DialogState = "idle" | "loading" | "listing" | "chosen" | "error";

export class ResolveDialogController {
  state: DialogState = "idle";
  surface = "";
  kind: "person" | "place" = "person";
  eraHint: string | null = null;
  current: ResolutionJson | null = null;
  lastError: string | null = null;

  constructor(private api: ApiClient, private handscrollId: string | null = null) {}

  async open(
    surface: string,
    kind: "person" | "place" = "person",
    eraHint: string | null = null,
  ): Promise<ResolutionJson> {
    this.state = "loading";
    this.surface = surface;
    this.kind = kind;
    this.eraHint = eraHint;
    try {
      this.current = await this.api.resolve({
        surface,
        kind,
        era_hint: eraHint,
        handscroll_id: this.handscrollId,
      });
      this.state = "listing";
      return this.current;
    } catch (err) {
      this.state = "error";
      this.lastError = String(err);
      throw err;
    }
  }

  get candidates(): string[] {
    return this.current?.candidates_considered ?? [];
  }

  get needsManualChoice(): boolean {
    return this.current !== null && (this.current.ambiguous || !this.current.entity_id);
  }

  // Post the historian's explicit pick; the server answers method=manual.
  async chooseManual(entityId: string): Promise<ResolutionJson> {
    this.current = await this.api.resolve({
      surface: this.surface,
      kind: this.kind,
      manual_choice: entityId,
    });
    this.state = "chosen";
    return this.current;
  }
}
