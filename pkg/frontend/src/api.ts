import type {
  ApiErrorBody,
  DiagramDoc,
  EvidenceDoc,
  MetricsResponse,
  SessionState,
} from "./types.js";

export interface MetricsQuery {
  mode?: "naive" | "full";
  method?: "1" | "2";
  decision?: string;
}

// Everything the explorer needs from the backend. Tests implement this
// with canned responses; the browser uses HttpApiClient below.
export interface ExplorerApi {
  defaultDiagram(): Promise<DiagramDoc | null>;
  createSession(doc: DiagramDoc): Promise<SessionState>;
  getDiagram(sessionId: string): Promise<DiagramDoc>;
  applyEvidence(sessionId: string, evidence: EvidenceDoc): Promise<SessionState>;
  retractEvidence(sessionId: string, node: string): Promise<SessionState>;
  reset(sessionId: string): Promise<SessionState>;
  getMetrics(sessionId: string, node: string, query: MetricsQuery): Promise<MetricsResponse>;
  registerJoint(
    sessionId: string,
    node: string,
    joint: Record<string, number>,
  ): Promise<void>;
}

export class ApiRequestError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.body = body;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class HttpApiClient implements ExplorerApi {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base = "", fetchImpl: FetchLike = (input, init) => fetch(input, init)) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let payload: ApiErrorBody;
      try {
        payload = (await response.json()) as ApiErrorBody;
      } catch {
        payload = { code: "http-error", message: `${response.status} ${response.statusText}` };
      }
      throw new ApiRequestError(response.status, payload);
    }
    return (await response.json()) as T;
  }

  async defaultDiagram(): Promise<DiagramDoc | null> {
    try {
      return await this.request<DiagramDoc>("GET", "/v1/default-diagram");
    } catch (err) {
      if (err instanceof ApiRequestError && err.status === 404) return null;
      throw err;
    }
  }

  createSession(doc: DiagramDoc): Promise<SessionState> {
    return this.request("POST", "/v1/sessions", doc);
  }

  getDiagram(sessionId: string): Promise<DiagramDoc> {
    return this.request("GET", `/v1/sessions/${sessionId}/diagram`);
  }

  applyEvidence(sessionId: string, evidence: EvidenceDoc): Promise<SessionState> {
    return this.request("POST", `/v1/sessions/${sessionId}/evidence`, evidence);
  }

  retractEvidence(sessionId: string, node: string): Promise<SessionState> {
    return this.request("DELETE", `/v1/sessions/${sessionId}/evidence/${encodeURIComponent(node)}`);
  }

  reset(sessionId: string): Promise<SessionState> {
    return this.request("POST", `/v1/sessions/${sessionId}/reset`);
  }

  getMetrics(sessionId: string, node: string, query: MetricsQuery): Promise<MetricsResponse> {
    const params = new URLSearchParams({ node });
    if (query.mode) params.set("mode", query.mode);
    if (query.method) params.set("method", query.method);
    if (query.decision) params.set("decision", query.decision);
    return this.request("GET", `/v1/sessions/${sessionId}/metrics?${params.toString()}`);
  }

  async registerJoint(
    sessionId: string,
    node: string,
    joint: Record<string, number>,
  ): Promise<void> {
    await this.request("POST", `/v1/sessions/${sessionId}/joints`, { node, joint });
  }
}
