// Typed client over the service's JSON routes. Every number the UI
// shows comes through here; nothing is derived client-side except
// rotation angles.

import type {
  BiographyJson,
  CustomizeAction,
  HandscrollJson,
  LayoutResponse,
  ResolveRequest,
  ResolutionJson,
  StatsJson,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, public detail: unknown) {
    super(`API error ${status}`);
  }
}

export class VersionConflictError extends ApiError {
  constructor(public currentVersion: number, detail: unknown) {
    super(409, detail);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      const body = await resp.json().catch(() => null);
      const detail = body && (body as { detail?: unknown }).detail;
      if (resp.status === 409) {
        const current = (detail as { current_version?: number })?.current_version ?? -1;
        throw new VersionConflictError(current, detail);
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  listHandscrolls(): Promise<HandscrollJson[]> {
    return this.request("/handscrolls");
  }

  getHandscroll(id: string): Promise<HandscrollJson> {
    return this.request(`/handscrolls/${encodeURIComponent(id)}`);
  }

  getLayout(id: string, target: number): Promise<LayoutResponse> {
    return this.request(`/handscrolls/${encodeURIComponent(id)}/layout?target=${target}`);
  }

  ringImageUrl(id: string, target: number): string {
    return `${this.baseUrl}/handscrolls/${encodeURIComponent(id)}/ring.png?target=${target}`;
  }

  getStats(id: string): Promise<StatsJson> {
    return this.request(`/handscrolls/${encodeURIComponent(id)}/stats`);
  }

  resolve(req: ResolveRequest): Promise<ResolutionJson> {
    return this.post("/resolve", req);
  }

  getEgo(figureId: string): Promise<{
    figure: { id: string; name: string };
    neighbors: { figure_id: string; name: string | null; shared_events: unknown[] }[];
  }> {
    return this.request(`/figures/${encodeURIComponent(figureId)}/ego`);
  }

  postCohort(figureIds: string[]): Promise<{
    figure_ids: string[];
    matrix: { total: number; by_type: Record<string, number> }[][];
  }> {
    return this.post("/cohort", { figure_ids: figureIds });
  }

  getSimilar(id: string, mode: "theme" | "feature", k: number): Promise<
    {
      handscroll_id: string;
      title: string;
      painter_id: string | null;
      painter_birth_year: number | null;
      similarity: number;
    }[]
  > {
    return this.request(
      `/handscrolls/${encodeURIComponent(id)}/similar?mode=${mode}&k=${k}`,
    );
  }

  getUncertain(id: string): Promise<{
    unresolved_figures: { inscription_id: string; surface: string; candidates: string[] }[];
    unmatched_seal_indexes: number[];
    uncertain_similar: { handscroll_id: string; similarity: number }[];
  }> {
    return this.request(`/handscrolls/${encodeURIComponent(id)}/uncertain`);
  }

  getBiography(id: string, version?: number): Promise<BiographyJson> {
    const suffix = version === undefined ? "" : `?version=${version}`;
    return this.request(`/handscrolls/${encodeURIComponent(id)}/biography${suffix}`);
  }

  customize(
    id: string,
    action: CustomizeAction,
    expectedVersion: number,
  ): Promise<BiographyJson> {
    return this.post(`/handscrolls/${encodeURIComponent(id)}/customize`, {
      action,
      expected_version: expectedVersion,
    });
  }
}
