export interface Suggestion {
  word: string;
  prob: number;
}

export interface ApiToken {
  token: string;
  /** character offsets into the request text */
  start: number;
  end: number;
  is_error: boolean;
  p_error: number;
  suggestions: Suggestion[];
}

export interface CorrectionResponse {
  tokens: ApiToken[];
  model_version: string;
  latency_ms: number;
  truncated: boolean;
}

export interface HealthResponse {
  status: string;
  model_version?: string;
}

export type Decision =
  | { kind: "pending" }
  | { kind: "accepted"; word: string }
  | { kind: "dismissed" };
