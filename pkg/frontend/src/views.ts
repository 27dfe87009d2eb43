/**
 * Pure view transforms for the removal wizard.
 *
 * Everything here is plain data in, plain data out: the DOM layer renders
 * whatever these functions produce and never interprets service payloads
 * itself.  Probabilities are displayed exactly as the service sent them —
 * the UI formats, it never recomputes.
 */

import type {
  ApiErrorBody,
  ChoiceRequest,
  ChoiceResponse,
  CreateResponse,
  ProposalPayload,
  SessionStatus,
  SessionViewPayload,
  SummaryPayload,
} from "./types.js";

/** Typed parse error for payloads that do not match the service schema. */
export class PayloadError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "PayloadError";
  }
}

/** One selectable row of the multiple-choice edge list. */
export interface ChoiceRow {
  edgeId: number;
  /** Human-readable endpoints, e.g. "4 → 7". */
  endpoints: string;
  confidence: number;
  /** Raw probability exactly as received from the service. */
  probability: number;
  /** Display form: round(p·10000)/100 with two decimals, e.g. "53.33%". */
  probabilityPercent: string;
}

/** Display model for one round's proposal. */
export interface ProposalView {
  /** e.g. "Round 3 of 10" — the round being played, 1-based, over budget. */
  roundLabel: string;
  /** Rounds already completed (the service's round counter). */
  round: number;
  pathIndex: number;
  /** Ordered as the path traverses source → target. */
  rows: ChoiceRow[];
  /** At most one row selectable; null until the admin picks one. */
  selectedEdgeId: number | null;
  remainingBudget: number;
  removedHistory: number[];
}

/** Status badge text shown in the header. */
export type StatusBadge = "active" | "CUT ACHIEVED" | "budget exhausted";

/** Everything the wizard screen renders for one session. */
export interface SessionViewState {
  sessionId: string | null;
  status: SessionStatus;
  badge: StatusBadge;
  /** Completed rounds; always equals the service's round-log length. */
  roundsUsed: number;
  budget: number;
  removedEdges: number[];
  proposal: ProposalView | null;
  summary: SummaryPayload | null;
  errorBanner: string | null;
  /** Terminal states disable submission controls. */
  controlsEnabled: boolean;
  /** Set when a payload was stale; the caller should GET the session. */
  needsRefetch: boolean;
}

/** Percent display: round(p·10000)/100, fixed two decimals, "%" suffix. */
export function formatPercent(p: number): string {
  return (Math.round(p * 10000) / 100).toFixed(2) + "%";
}

const BADGES: Record<SessionStatus, StatusBadge> = {
  active: "active",
  cut: "CUT ACHIEVED",
  budget_exhausted: "budget exhausted",
};

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function requireNumber(value: unknown, where: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new PayloadError(`${where} must be a finite number`);
  }
  return value;
}

function requireInt(value: unknown, where: string): number {
  const n = requireNumber(value, where);
  if (!Number.isInteger(n)) {
    throw new PayloadError(`${where} must be an integer`);
  }
  return n;
}

function requireIntArray(value: unknown, where: string): number[] {
  if (!Array.isArray(value)) {
    throw new PayloadError(`${where} must be an array`);
  }
  return value.map((v, i) => requireInt(v, `${where}[${i}]`));
}

function parseProposal(value: unknown): ProposalPayload {
  if (!isRecord(value)) {
    throw new PayloadError("proposal must be an object");
  }
  const round = requireInt(value.round, "proposal.round");
  const pathIndex = requireInt(value.path_index, "proposal.path_index");
  if (!Array.isArray(value.path) || value.path.length === 0) {
    throw new PayloadError("proposal.path must be a non-empty array");
  }
  const path = value.path.map((e, i) => {
    if (!isRecord(e)) {
      throw new PayloadError(`proposal.path[${i}] must be an object`);
    }
    return {
      id: requireInt(e.id, `proposal.path[${i}].id`),
      src: requireInt(e.src, `proposal.path[${i}].src`),
      dst: requireInt(e.dst, `proposal.path[${i}].dst`),
      conf: requireNumber(e.conf, `proposal.path[${i}].conf`),
    };
  });
  if (!Array.isArray(value.probabilities)) {
    throw new PayloadError("proposal.probabilities must be an array");
  }
  const probabilities = value.probabilities.map((row, i) => {
    if (!isRecord(row)) {
      throw new PayloadError(`proposal.probabilities[${i}] must be an object`);
    }
    return {
      edge_id: requireInt(row.edge_id, `proposal.probabilities[${i}].edge_id`),
      p: requireNumber(row.p, `proposal.probabilities[${i}].p`),
    };
  });
  if (probabilities.length !== path.length) {
    throw new PayloadError(
      "proposal.probabilities must list exactly one entry per path edge",
    );
  }
  return { round, path_index: pathIndex, path, probabilities };
}

/**
 * Turn a proposal payload into the multiple-choice display model.
 *
 * Rows keep the path's traversal order; each row's probability is looked
 * up by edge id (never by array position) and rendered unmodified.  The
 * budget and removal history come from the surrounding session state, so
 * the caller passes them as context.
 */
export function buildProposalView(
  payload: unknown,
  context: { budget: number; removedEdges: number[] },
): ProposalView {
  const proposal = parseProposal(payload);
  const byId = new Map(proposal.probabilities.map((row) => [row.edge_id, row.p]));
  const rows: ChoiceRow[] = proposal.path.map((edge) => {
    const p = byId.get(edge.id);
    if (p === undefined) {
      throw new PayloadError(`no probability entry for edge ${edge.id}`);
    }
    return {
      edgeId: edge.id,
      endpoints: `${edge.src} → ${edge.dst}`,
      confidence: edge.conf,
      probability: p,
      probabilityPercent: formatPercent(p),
    };
  });
  return {
    roundLabel: `Round ${proposal.round + 1} of ${context.budget}`,
    round: proposal.round,
    pathIndex: proposal.path_index,
    rows,
    selectedEdgeId: null,
    remainingBudget: context.budget - proposal.round,
    removedHistory: [...context.removedEdges],
  };
}

/** Mark one row as the admin's pick; any previous selection is replaced. */
export function selectRow(view: ProposalView, edgeId: number): ProposalView {
  if (!view.rows.some((row) => row.edgeId === edgeId)) {
    throw new PayloadError(`edge ${edgeId} is not a row of this proposal`);
  }
  return { ...view, selectedEdgeId: edgeId };
}

/** The request body for the current selection (the selected row's id). */
export function choiceBody(view: ProposalView): ChoiceRequest {
  if (view.selectedEdgeId === null) {
    throw new PayloadError("no row selected");
  }
  return { edge_id: view.selectedEdgeId };
}

/** Blank screen state before any session exists. */
export function initialSessionViewState(): SessionViewState {
  return {
    sessionId: null,
    status: "active",
    badge: "active",
    roundsUsed: 0,
    budget: 0,
    removedEdges: [],
    proposal: null,
    summary: null,
    errorBanner: null,
    controlsEnabled: false,
    needsRefetch: false,
  };
}

/**
 * Screen state for a freshly created session.
 *
 * The create response carries no status field; when it holds a proposal the
 * session is active, and when it holds none the session terminated at
 * creation, so `needsRefetch` asks the caller to GET the full view.
 */
export function beginSession(payload: CreateResponse): SessionViewState {
  const state = initialSessionViewState();
  state.sessionId = payload.session_id;
  state.budget = payload.budget;
  if (payload.proposal === null) {
    state.needsRefetch = true;
    return state;
  }
  state.proposal = buildProposalView(payload.proposal, {
    budget: payload.budget,
    removedEdges: [],
  });
  state.controlsEnabled = true;
  return state;
}

function isErrorBody(payload: unknown): payload is ApiErrorBody {
  return (
    isRecord(payload) &&
    typeof payload.error === "string" &&
    typeof payload.detail === "string"
  );
}

function parseStatus(value: unknown): SessionStatus {
  if (value === "active" || value === "cut" || value === "budget_exhausted") {
    return value;
  }
  throw new PayloadError(`unknown session status: ${String(value)}`);
}

function parseSummary(value: unknown): SummaryPayload {
  if (!isRecord(value)) {
    throw new PayloadError("summary must be an object");
  }
  const outcome = parseStatus(value.outcome);
  if (outcome === "active") {
    throw new PayloadError("summary.outcome cannot be active");
  }
  return {
    outcome,
    queries: requireInt(value.queries, "summary.queries"),
    removed_edges: requireIntArray(value.removed_edges, "summary.removed_edges"),
  };
}

interface ParsedUpdate {
  status: SessionStatus;
  round: number;
  removedEdges: number[];
  budget: number | null;
  logLength: number | null;
  proposal: unknown;
  summary: SummaryPayload | null;
}

function parseUpdate(payload: unknown): ParsedUpdate {
  if (!isRecord(payload)) {
    throw new PayloadError("session update must be an object");
  }
  const status = parseStatus(payload.status);
  const round = requireInt(payload.round, "round");
  const removedEdges = requireIntArray(payload.removed_edges, "removed_edges");
  let budget: number | null = null;
  if ("budget" in payload) {
    budget = requireInt(payload.budget, "budget");
  }
  let logLength: number | null = null;
  if ("log" in payload) {
    if (!Array.isArray(payload.log)) {
      throw new PayloadError("log must be an array");
    }
    logLength = payload.log.length;
    if (logLength !== round) {
      throw new PayloadError(
        `round ${round} does not match log length ${logLength}`,
      );
    }
  }
  const summary = "summary" in payload ? parseSummary(payload.summary) : null;
  if (status === "active" && summary !== null) {
    throw new PayloadError("active sessions have no summary");
  }
  if (status !== "active" && "proposal" in payload && payload.proposal !== null) {
    throw new PayloadError("terminal sessions have no proposal");
  }
  return {
    status,
    round,
    removedEdges,
    budget,
    logLength,
    proposal: "proposal" in payload ? payload.proposal : null,
    summary,
  };
}

/**
 * Fold a service response into the screen state.
 *
 * Accepts the body of a choice submission or a session GET.  Error bodies
 * show in the banner and leave everything else untouched.  A stale body —
 * a submit echo whose round did not advance past what is displayed, or a
 * poll older than the display — sets `needsRefetch` (submit) or is dropped
 * (poll) instead of rewinding the screen.
 */
export function applySessionUpdate(
  state: SessionViewState,
  payload: unknown,
  origin: "submit" | "poll" = "poll",
): SessionViewState {
  if (isErrorBody(payload)) {
    return { ...state, errorBanner: payload.detail };
  }
  let update: ParsedUpdate;
  try {
    update = parseUpdate(payload);
  } catch (err) {
    if (err instanceof PayloadError) {
      return { ...state, errorBanner: err.message };
    }
    throw err;
  }
  if (origin === "submit" && update.round <= state.roundsUsed) {
    return { ...state, needsRefetch: true };
  }
  if (origin === "poll" && update.round < state.roundsUsed) {
    return state;
  }
  const budget = update.budget ?? state.budget;
  const next: SessionViewState = {
    ...state,
    status: update.status,
    badge: BADGES[update.status],
    roundsUsed: update.logLength ?? update.round,
    budget,
    removedEdges: update.removedEdges,
    proposal: null,
    summary: update.summary,
    errorBanner: null,
    controlsEnabled: false,
    needsRefetch: false,
  };
  if (update.status === "active" && update.proposal !== null) {
    let view: ProposalView;
    try {
      view = buildProposalView(update.proposal, {
        budget,
        removedEdges: update.removedEdges,
      });
    } catch (err) {
      if (err instanceof PayloadError) {
        return { ...state, errorBanner: err.message };
      }
      throw err;
    }
    // An idempotent poll re-delivers the round being played; keep the
    // admin's selection instead of clearing their radio pick every tick.
    const prev = state.proposal;
    if (
      prev !== null &&
      prev.round === view.round &&
      prev.pathIndex === view.pathIndex &&
      prev.selectedEdgeId !== null &&
      view.rows.some((row) => row.edgeId === prev.selectedEdgeId)
    ) {
      view = { ...view, selectedEdgeId: prev.selectedEdgeId };
    }
    next.proposal = view;
    next.controlsEnabled = true;
  }
  return next;
}

/** Narrowing helper so callers can branch on view payloads. */
export function isSessionView(payload: unknown): payload is SessionViewPayload {
  return isRecord(payload) && "log" in payload && "budget" in payload;
}

/** Narrowing helper for choice-response payloads. */
export function isChoiceResponse(payload: unknown): payload is ChoiceResponse {
  return isRecord(payload) && "status" in payload && !("log" in payload);
}
