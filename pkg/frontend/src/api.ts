/** Thin typed client over the pipeline's HTTP API. All console state flows
 * through these calls; errors surface as ApiError with the server's body. */

import type {
  ApiErrorBody,
  Candidate,
  Decision,
  EventBatch,
  Protocol,
  RunState,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(body.error ?? `HTTP ${status}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, (await resp.json()) as ApiErrorBody);
    }
    return (await resp.json()) as T;
  }

  private json(method: string, body: unknown): RequestInit {
    return {
      method,
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    };
  }

  listRuns(): Promise<{ runs: { run_id: string; stage: string; status: string }[] }> {
    return this.request("/api/runs");
  }

  createRun(protocol: unknown): Promise<{ run_id: string }> {
    return this.request("/api/runs", this.json("POST", protocol));
  }

  getRun(runId: string): Promise<RunState> {
    return this.request(`/api/runs/${runId}`);
  }

  advance(runId: string): Promise<{ stage: string; finalized: boolean }> {
    return this.request(`/api/runs/${runId}/advance`, { method: "POST" });
  }

  editProtocol(
    runId: string,
    field: string,
    value: unknown,
    editor = "console",
  ): Promise<{ protocol: Protocol }> {
    return this.request(
      `/api/runs/${runId}/protocol`,
      this.json("PATCH", { field, value, editor }),
    );
  }

  getCandidates(runId: string): Promise<{ candidates: Candidate[] }> {
    return this.request(`/api/runs/${runId}/candidates`);
  }

  getDecisions(runId: string): Promise<{ decisions: Decision[] }> {
    return this.request(`/api/runs/${runId}/decisions`);
  }

  override(
    runId: string,
    decisionId: string,
    verdict: "include" | "exclude",
    rationale: string,
    editor = "console",
  ): Promise<{ decision: Decision }> {
    return this.request(
      `/api/runs/${runId}/decisions/${decisionId}/override`,
      this.json("POST", { verdict, rationale, editor }),
    );
  }

  async getReport(runId: string): Promise<string> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/runs/${runId}/report`);
    if (!resp.ok) {
      throw new ApiError(resp.status, (await resp.json()) as ApiErrorBody);
    }
    return resp.text();
  }

  getRatings(): Promise<{ ratings: string[] }> {
    return this.request("/api/feedback/ratings");
  }

  postFeedback(
    runId: string,
    rating: string,
    comment = "",
    role = "",
  ): Promise<{ feedback: { rating: string } }> {
    return this.request(
      `/api/runs/${runId}/feedback`,
      this.json("POST", { rating, comment, role }),
    );
  }

  getEvents(runId: string, cursor = 0, timeout = 25): Promise<EventBatch> {
    return this.request(
      `/api/events/${runId}?cursor=${cursor}&timeout=${timeout}`,
    );
  }
}
