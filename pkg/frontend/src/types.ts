/** Wire types for the /v1 API plus the client-side view state. */

export interface Box {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface PredictResult {
  roi: [number, number, number, number];
  score: number;
  label: string;
  probabilities: number[];
  model_versions?: Record<string, string | null>;
}

/** Every way a predict can come back, mapped to a user-visible state. */
export type PredictOutcome =
  | { kind: "ok"; result: PredictResult }
  | { kind: "bad-file"; message: string }
  | { kind: "no-horse"; message: string }
  | { kind: "unavailable"; message: string }
  | { kind: "error"; message: string };

export type CueSelection = Record<string, string>;

export interface Ethogram {
  order: string[];
  dimensions: Record<string, string[]>;
  profiles: Record<string, Record<string, string>>;
}

export interface AnnotationWire {
  index: number;
  image_id: string;
  box: [number, number, number, number];
  label: string | null;
  cues: CueSelection | null;
  override: boolean;
}

export interface AnnotationPayload {
  image_id: string;
  box: [number, number, number, number];
  label?: string | null;
  cues?: CueSelection | null;
  replace_index?: number;
}

export interface SaveResponse {
  annotation: AnnotationWire;
  warning: string | null;
}

export interface ModelEntry {
  kind: string;
  version: string;
  path: string;
  loaded: boolean;
  checksum: string;
}

export interface HealthResponse {
  status: string;
  models: Record<string, string | null>;
  kernel_backend: string;
}

export type Mode = "predict" | "annotate";

export interface Draft {
  box: Box | null;
  cues: Partial<CueSelection>;
  label: string | null;
}
