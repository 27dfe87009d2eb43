/**
 * Wire types for the removal-session JSON API.
 *
 * These mirror the service payloads field-for-field; the UI consumes them
 * verbatim and never re-derives values the service already computed.
 */

/** Session lifecycle as reported by the service. */
export type SessionStatus = "active" | "cut" | "budget_exhausted";

/** One edge of a proposed path: id, endpoints, and the confidence score. */
export interface EdgeDescriptor {
  id: number;
  src: number;
  dst: number;
  conf: number;
}

/** Advisory removal probability for one edge of the proposed path. */
export interface ProbabilityEntry {
  edge_id: number;
  p: number;
}

/** The path proposed for the current round, with advisory probabilities. */
export interface ProposalPayload {
  round: number;
  path_index: number;
  path: EdgeDescriptor[];
  probabilities: ProbabilityEntry[];
}

/** One completed round: which path was shown and which edge was removed. */
export interface LogEntry {
  round: number;
  path_index: number;
  edge_chosen: number;
}

/** Terminal report: how the session ended and what it cost. */
export interface SummaryPayload {
  outcome: Exclude<SessionStatus, "active">;
  queries: number;
  removed_edges: number[];
}

/** Response to POST /sessions. `proposal` is null when no round is playable. */
export interface CreateResponse {
  session_id: string;
  budget: number;
  proposal: ProposalPayload | null;
}

/** Response to POST /sessions/{id}/choice. */
export interface ChoiceResponse {
  status: SessionStatus;
  round: number;
  removed_edges: number[];
  proposal?: ProposalPayload;
  summary?: SummaryPayload;
}

/** Response to GET /sessions/{id}: the full session view. */
export interface SessionViewPayload {
  status: SessionStatus;
  round: number;
  budget: number;
  removed_edges: number[];
  log: LogEntry[];
  proposal?: ProposalPayload;
  summary?: SummaryPayload;
}

/** Error body the service returns for every non-2xx response. */
export interface ApiErrorBody {
  error: string;
  detail: string;
}

/** Request body for POST /sessions (exactly one of graph/preset). */
export interface CreateSessionRequest {
  graph?: unknown;
  preset?: string;
  preset_seed?: number;
  policy: string;
  budget?: number;
  policy_config?: Record<string, unknown>;
}

/** Request body for POST /sessions/{id}/choice. */
export interface ChoiceRequest {
  edge_id: number;
}
