// Wire types mirroring the service's JSON contracts.

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface SealJson {
  box: Rect;
  feature_index: number;
  matched_seal_id: string | null;
  sealer_id: string | null;
  timestamp_year: number | null;
}

export interface MentionJson {
  start: number;
  end: number;
  tag: "Time" | "Location" | "Figure" | "Thing";
  confidence: number;
}

export interface InscriptionJson {
  id: string;
  text: string;
  author_id: string | null;
  timestamp_year: number | null;
  mentions: MentionJson[];
}

export interface HandscrollJson {
  id: string;
  title: string;
  image_ref: string;
  core_region: Rect;
  painter_id: string | null;
  seals: SealJson[];
  inscriptions: InscriptionJson[];
  theme_text: string;
  seal_count: number;
  inscription_count: number;
}

export interface PlanBlockJson {
  x: number;
  natural_width: number;
  assigned_width: number;
  kind: "core" | "text" | "silk" | "other";
  min_ratio: number;
}

export interface SegmentPlanJson {
  target_length: number;
  blocks: PlanBlockJson[];
}

export interface RingArcJson {
  block_index: number;
  kind: string;
  half: 0 | 1;
  theta_start: number;
  theta_end: number;
  inner_radius: number;
  outer_radius: number;
  strip_x0: number;
  strip_x1: number;
}

export interface RingLayoutJson {
  strip_width: number;
  strip_height: number;
  outer_radius: number;
  thickness: number;
  top_to_outer: boolean;
  mirror_second_half: boolean;
  arcs: RingArcJson[];
}

export interface LayoutResponse {
  plan: SegmentPlanJson;
  ring: RingLayoutJson;
}

export interface ResolutionJson {
  kind: "person" | "place";
  surface: string;
  entity_id: string | null;
  canonical_name: string | null;
  matched_alias: string | null;
  sources: string[];
  method: "direct" | "segment" | "era_filter" | "social_rank" | "manual" | null;
  candidates_considered: string[];
  ambiguous: boolean;
}

export interface ResolveRequest {
  surface: string;
  kind: "person" | "place";
  era_hint?: string | null;
  handscroll_id?: string | null;
  manual_choice?: string | null;
}

export interface StatsJson {
  handscroll_id: string;
  seal_counts: Record<string, number>;
  corpus_seal_counts: Record<string, number>;
  inscription_counts: Record<string, number>;
  sealer_dynasty: Record<string, string | null>;
  word_frequencies: Record<string, Record<string, number>>;
}

export interface BiographyEntryJson {
  figure_id: string;
  name: string;
  kind: "painter" | "collector_appreciator" | "historian_added";
  birth_year: number | null;
  death_year: number | null;
  dated_seals: [number, number][]; // [year, count]
  undated_seal_count: number;
  dated_inscriptions: [number, number][]; // [year, char count]
  undated_inscription_count: number;
  relevance: number;
  discussion: number;
  identity: number;
  importance: number;
  rank_tier: number;
  manual_tier: number | null;
  lifespan_flags: string[];
  audit_note: string | null;
}

export interface SharedEventJson {
  figure_a: string;
  figure_b: string;
  type: string;
  year: number | null;
  event_id: string;
}

export interface BiographyJson {
  handscroll_id: string;
  entries: BiographyEntryJson[];
  shared_events: SharedEventJson[];
  event_histogram: Record<string, number>;
  lambdas: [number, number, number];
  version: number;
  audit_log: string[];
}

export interface CustomizeAction {
  kind: "add_figure" | "remove_figure" | "set_lambda" | "set_manual_tier";
  figure_id?: string;
  lambdas?: [number, number, number];
  tier?: number;
  note?: string;
}
