/**
 * Thin JSON-over-HTTP client for the removal-session API.
 *
 * The client does no interpretation: it returns response bodies verbatim
 * and raises a typed error carrying the service's {error, detail} shape
 * for every non-2xx response.
 */

import type {
  ApiErrorBody,
  ChoiceResponse,
  CreateResponse,
  CreateSessionRequest,
  SessionViewPayload,
} from "./types.js";

/** A non-2xx response, with the service's typed error body attached. */
export class ApiRequestError extends Error {
  readonly status: number;
  readonly error: string;
  readonly detail: string;

  constructor(status: number, body: ApiErrorBody) {
    super(`${body.error}: ${body.detail}`);
    this.name = "ApiRequestError";
    this.status = status;
    this.error = body.error;
    this.detail = body.detail;
  }
}

export interface ClientConfig {
  /** Service base URL, e.g. "http://127.0.0.1:8000". */
  baseUrl: string;
  /** Injectable fetch for tests; defaults to the global. */
  fetchImpl?: typeof fetch;
}

export class SessionClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: typeof fetch;

  constructor(config: ClientConfig) {
    this.baseUrl = config.baseUrl.replace(/\/+$/, "");
    this.fetchImpl = config.fetchImpl ?? fetch;
  }

  private async request<T>(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let parsed: unknown;
    try {
      parsed = await response.json();
    } catch {
      throw new ApiRequestError(response.status, {
        error: "bad_response",
        detail: `service returned non-JSON (HTTP ${response.status})`,
      });
    }
    if (!response.ok) {
      const record = parsed as Partial<ApiErrorBody>;
      throw new ApiRequestError(response.status, {
        error: typeof record?.error === "string" ? record.error : "http_error",
        detail:
          typeof record?.detail === "string"
            ? record.detail
            : `HTTP ${response.status}`,
      });
    }
    return parsed as T;
  }

  /** True when GET /healthz answers ok. */
  async health(): Promise<boolean> {
    try {
      const body = await this.request<{ status?: string }>("GET", "/healthz");
      return body.status === "ok";
    } catch {
      return false;
    }
  }

  /** POST /sessions — create a session, receiving id, budget, and round 0. */
  createSession(body: CreateSessionRequest): Promise<CreateResponse> {
    return this.request<CreateResponse>("POST", "/sessions", body);
  }

  /** GET /sessions/{id} — the full read-only session view. */
  getSession(sessionId: string): Promise<SessionViewPayload> {
    return this.request<SessionViewPayload>(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}`,
    );
  }

  /** POST /sessions/{id}/choice — submit the removed edge's id. */
  submitChoice(sessionId: string, edgeId: number): Promise<ChoiceResponse> {
    return this.request<ChoiceResponse>(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/choice`,
      { edge_id: edgeId },
    );
  }
}
