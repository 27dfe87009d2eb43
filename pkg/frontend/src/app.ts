/**
 * DOM wiring for the removal wizard.
 *
 * One logical UI thread: at most one choice submission may be in flight
 * per session; a second submit while one is pending is rejected with a
 * visible notice.  A 1-second poll keeps the view in sync with the
 * service between submissions.
 */

import { ApiRequestError, SessionClient } from "./client.js";
import { renderMiniMap, type SeenEdge } from "./minimap.js";
import {
  applySessionUpdate,
  beginSession,
  choiceBody,
  initialSessionViewState,
  selectRow,
  type SessionViewState,
} from "./views.js";

const POLL_INTERVAL_MS = 1000;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el as T;
}

class WizardApp {
  private client: SessionClient | null = null;
  private state: SessionViewState = initialSessionViewState();
  private seenEdges = new Map<number, SeenEdge>();
  private inFlight = false;
  private pollTimer: number | null = null;

  private readonly form = byId<HTMLFormElement>("create-form");
  private readonly baseUrlInput = byId<HTMLInputElement>("base-url");
  private readonly presetInput = byId<HTMLInputElement>("preset");
  private readonly seedInput = byId<HTMLInputElement>("preset-seed");
  private readonly graphInput = byId<HTMLTextAreaElement>("graph-json");
  private readonly policySelect = byId<HTMLSelectElement>("policy");
  private readonly budgetInput = byId<HTMLInputElement>("budget");
  private readonly wizardPanel = byId<HTMLElement>("wizard");
  private readonly badgeEl = byId<HTMLElement>("status-badge");
  private readonly roundLabelEl = byId<HTMLElement>("round-label");
  private readonly progressEl = byId<HTMLElement>("progress");
  private readonly removedEl = byId<HTMLElement>("removed-edges");
  private readonly rowsEl = byId<HTMLElement>("choice-rows");
  private readonly submitBtn = byId<HTMLButtonElement>("submit-choice");
  private readonly bannerEl = byId<HTMLElement>("error-banner");
  private readonly noticeEl = byId<HTMLElement>("notice");
  private readonly summaryEl = byId<HTMLElement>("summary");
  private readonly minimapEl = byId<HTMLElement>("minimap");

  start(): void {
    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.createSessionFromForm();
    });
    this.submitBtn.addEventListener("click", () => {
      void this.submitSelection();
    });
    this.render();
  }

  private setState(state: SessionViewState): void {
    this.state = state;
    if (state.proposal !== null) {
      for (const row of state.proposal.rows) {
        if (!this.seenEdges.has(row.edgeId)) {
          const [src, dst] = row.endpoints.split(" → ").map(Number);
          this.seenEdges.set(row.edgeId, {
            id: row.edgeId,
            src: src ?? 0,
            dst: dst ?? 0,
          });
        }
      }
    }
    this.render();
  }

  private async createSessionFromForm(): Promise<void> {
    this.client = new SessionClient({ baseUrl: this.baseUrlInput.value });
    const graphText = this.graphInput.value.trim();
    const preset = this.presetInput.value.trim();
    const body = {
      policy: this.policySelect.value,
      budget: Number(this.budgetInput.value),
      ...(graphText !== ""
        ? { graph: JSON.parse(graphText) as unknown }
        : {
            preset,
            preset_seed: Number(this.seedInput.value),
          }),
    };
    this.seenEdges.clear();
    try {
      const created = await this.client.createSession(body);
      this.setState(beginSession(created));
      if (this.state.needsRefetch) await this.refetch();
      this.startPolling();
    } catch (err) {
      this.showError(err);
    }
  }

  private async submitSelection(): Promise<void> {
    const { proposal, sessionId } = this.state;
    if (this.client === null || sessionId === null || proposal === null) return;
    if (this.inFlight) {
      this.showNotice("a removal is already being submitted — please wait");
      return;
    }
    let body;
    try {
      body = choiceBody(proposal);
    } catch {
      this.showNotice("select the edge you removed first");
      return;
    }
    this.inFlight = true;
    this.render();
    try {
      const response = await this.client.submitChoice(sessionId, body.edge_id);
      this.setState(applySessionUpdate(this.state, response, "submit"));
      if (this.state.needsRefetch) await this.refetch();
    } catch (err) {
      this.showError(err);
    } finally {
      this.inFlight = false;
      this.render();
    }
  }

  private async refetch(): Promise<void> {
    if (this.client === null || this.state.sessionId === null) return;
    try {
      const view = await this.client.getSession(this.state.sessionId);
      this.setState(applySessionUpdate(this.state, view, "poll"));
    } catch (err) {
      this.showError(err);
    }
  }

  private startPolling(): void {
    if (this.pollTimer !== null) window.clearInterval(this.pollTimer);
    this.pollTimer = window.setInterval(() => {
      if (this.state.status !== "active") return;
      if (this.inFlight || this.state.sessionId === null) return;
      void this.refetch();
    }, POLL_INTERVAL_MS);
  }

  private showError(err: unknown): void {
    const detail =
      err instanceof ApiRequestError
        ? err.detail
        : err instanceof Error
          ? err.message
          : String(err);
    this.setState({ ...this.state, errorBanner: detail });
  }

  private showNotice(text: string): void {
    this.noticeEl.textContent = text;
    this.noticeEl.hidden = false;
    window.setTimeout(() => {
      this.noticeEl.hidden = true;
    }, 2500);
  }

  private render(): void {
    const s = this.state;
    this.wizardPanel.hidden = s.sessionId === null;
    this.badgeEl.textContent = s.badge;
    this.badgeEl.dataset.status = s.status;
    this.progressEl.textContent = `${s.roundsUsed} / ${s.budget} removals used`;
    this.removedEl.textContent =
      s.removedEdges.length === 0
        ? "none yet"
        : s.removedEdges.map((id) => `e${id}`).join(", ");
    this.bannerEl.hidden = s.errorBanner === null;
    this.bannerEl.textContent = s.errorBanner ?? "";

    if (s.summary !== null) {
      const outcome =
        s.summary.outcome === "cut"
          ? "full cut achieved"
          : "budget exhausted before a cut";
      this.summaryEl.hidden = false;
      this.summaryEl.textContent =
        `${outcome} — ${s.summary.queries} removal(s): ` +
        s.summary.removed_edges.map((id) => `e${id}`).join(", ");
    } else {
      this.summaryEl.hidden = true;
    }

    this.roundLabelEl.textContent = s.proposal?.roundLabel ?? "";
    this.renderRows();
    this.submitBtn.disabled =
      !s.controlsEnabled ||
      this.inFlight ||
      s.proposal === null ||
      s.proposal.selectedEdgeId === null;
    this.minimapEl.innerHTML = renderMiniMap({
      edges: [...this.seenEdges.values()],
      removedIds: new Set(s.removedEdges),
      currentIds: new Set(s.proposal?.rows.map((row) => row.edgeId) ?? []),
    });
  }

  private renderRows(): void {
    const proposal = this.state.proposal;
    this.rowsEl.textContent = "";
    if (proposal === null) return;
    for (const row of proposal.rows) {
      const label = document.createElement("label");
      label.className = "choice-row";
      const radio = document.createElement("input");
      radio.type = "radio";
      radio.name = "edge-choice";
      radio.value = String(row.edgeId);
      radio.checked = proposal.selectedEdgeId === row.edgeId;
      radio.disabled = !this.state.controlsEnabled;
      radio.addEventListener("change", () => {
        this.setState({
          ...this.state,
          proposal: selectRow(proposal, row.edgeId),
        });
      });
      const text = document.createElement("span");
      text.textContent =
        `e${row.edgeId}  ${row.endpoints}  ` +
        `conf ${row.confidence}  ·  ${row.probabilityPercent}`;
      label.append(radio, text);
      this.rowsEl.append(label);
    }
  }
}

new WizardApp().start();
