import type { CorrectionResponse, HealthResponse } from "./types.js";

export class ServiceUnavailableError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "ServiceUnavailableError";
  }
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

export class RequestCancelled extends Error {
  constructor() {
    super("superseded by a newer check");
    this.name = "RequestCancelled";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Client for the correction service.  At most one check request is in
 * flight: firing a new one aborts the previous, whose caller sees
 * RequestCancelled.
 */
export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async check(text: string, topK = 3): Promise<CorrectionResponse> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    let resp: Response;
    try {
      resp = await this.fetchImpl(`${this.baseUrl}/api/correct`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text, top_k: topK }),
        signal: controller.signal,
      });
    } catch (err) {
      if (controller.signal.aborted) throw new RequestCancelled();
      throw err;
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
    if (resp.status === 503) {
      throw new ServiceUnavailableError("correction service is not ready");
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, `correction request failed (${resp.status})`);
    }
    return (await resp.json()) as CorrectionResponse;
  }

  async health(): Promise<HealthResponse> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/health`);
    return (await resp.json()) as HealthResponse;
  }
}
