"""HTTP session service: the proposal loop for a live admin.

One session owns a graph, a policy, and a budget.  Each round the service
shows the proposed path with the model's removal probabilities; the admin
answers with the edge they removed (any edge of the shown path; the model
is advice, not a constraint).  Sessions end at a cut or when the budget
runs out.

State is kept in memory; with a persistence directory every create and
choice event is appended to a JSONL log and replayed on startup, which is
sound because policies are deterministic.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .admin import choice_distribution
from .errors import PathcutterError
from .generate import preset_graph
from .graph import AttackGraph, PathCatalog, enumerate_paths, load_graph
from .mdp import QueryState, RewardSpec, StateKind, apply_choice, classify
from .policies import DprConfig, POLICY_KINDS, ProposalPolicy, make_policy

DEFAULT_BIND = "127.0.0.1:8000"
BIND_ENV_VAR = "PATHCUTTER_BIND"


class CreateSessionBody(BaseModel):
    graph: Optional[dict] = None
    preset: Optional[str] = None
    preset_seed: int = 0
    policy: str
    budget: int = 10
    policy_config: Optional[dict] = None


class ChoiceBody(BaseModel):
    edge_id: int


class ApiError(PathcutterError):
    """Carries an HTTP status plus the wire error shape."""

    def __init__(self, status: int, error: str, detail: str):
        self.status = status
        self.error = error
        self.detail = detail
        super().__init__(detail)


def _policy_from_config(
    kind: str, g: AttackGraph, catalog: PathCatalog, budget: int, cfg: dict
) -> ProposalPolicy:
    spec = None
    if "alpha" in cfg:
        spec = RewardSpec(alpha=float(cfg["alpha"]))
    dpr = DprConfig(
        lookahead=int(cfg.get("lookahead", 4)),
        tau=int(cfg.get("tau", 16)),
        frontier=cfg.get("frontier", "min-cut-estimate"),
        samplers=tuple(cfg.get("samplers", ("APP", "OTH1", "OTH2"))),
    )
    return make_policy(kind, g, catalog, budget, spec=spec, dpr_config=dpr)


@dataclass
class Session:
    session_id: str
    graph: AttackGraph
    catalog: PathCatalog
    policy: ProposalPolicy
    budget: int
    state: QueryState = field(default_factory=QueryState)
    status: str = "active"
    proposal_index: Optional[int] = None
    log: list = field(default_factory=list)  # {round, path_index, edge_chosen}

    def proposal_payload(self) -> Optional[dict]:
        if self.status != "active" or self.proposal_index is None:
            return None
        path = self.catalog.paths[self.proposal_index]
        dist = choice_distribution(path, self.graph)
        return {
            "round": self.state.round,
            "path_index": self.proposal_index,
            "path": [
                {
                    "id": eid,
                    "src": self.graph.edge(eid).src,
                    "dst": self.graph.edge(eid).dst,
                    "conf": self.graph.edge(eid).conf,
                }
                for eid in path
            ],
            "probabilities": [
                {"edge_id": eid, "p": p}
                for eid, p in zip(dist.edge_ids, dist.probs)
            ],
        }

    def summary_payload(self) -> dict:
        return {
            "outcome": self.status,
            "queries": self.state.round,
            "removed_edges": list(self.state.removed),
        }

    def view(self) -> dict:
        body = {
            "status": self.status,
            "round": self.state.round,
            "budget": self.budget,
            "removed_edges": list(self.state.removed),
            "log": list(self.log),
        }
        proposal = self.proposal_payload()
        if proposal is not None:
            body["proposal"] = proposal
        if self.status != "active":
            body["summary"] = self.summary_payload()
        return body

    def advance(self) -> None:
        """Re-classify and compute the next proposal if still active."""
        kind = classify(self.state, self.graph, self.budget)
        if kind is StateKind.CUT:
            self.status = "cut"
            self.proposal_index = None
            return
        if kind is StateKind.BUDGET_EXHAUSTED:
            self.status = "budget_exhausted"
            self.proposal_index = None
            return
        action = self.policy.propose(self.state)
        if action is None:
            # Hop-capped catalogs can run dry while still connected; the
            # session cannot continue, surface it as exhaustion.
            self.status = "budget_exhausted"
            self.proposal_index = None
            return
        self.proposal_index = action

    def submit(self, edge_id: int) -> None:
        if self.status != "active":
            raise ApiError(409, "session_finished", "session already terminated")
        path = self.catalog.paths[self.proposal_index]
        if edge_id not in path:
            raise ApiError(
                400,
                "invalid_choice",
                f"edge {edge_id} is not on the proposed path; "
                f"pick one of {list(path)}",
            )
        self.log.append(
            {
                "round": self.state.round,
                "path_index": self.proposal_index,
                "edge_chosen": edge_id,
            }
        )
        self.state = apply_choice(self.state, edge_id)
        self.advance()


def _build_session(session_id: str, body: CreateSessionBody) -> Session:
    if (body.graph is None) == (body.preset is None):
        raise ApiError(400, "bad_request", "provide exactly one of graph or preset")
    try:
        if body.graph is not None:
            g = load_graph(body.graph)
        else:
            g = preset_graph(body.preset, seed=body.preset_seed)
    except PathcutterError as exc:
        raise ApiError(400, "invalid_graph", str(exc)) from None
    if body.budget < 1:
        raise ApiError(400, "bad_request", "budget must be >= 1")
    kind = body.policy.upper()
    if kind not in POLICY_KINDS:
        raise ApiError(
            400, "unknown_policy", f"policy must be one of {list(POLICY_KINDS)}"
        )
    cfg = body.policy_config or {}
    try:
        catalog = enumerate_paths(g, hop_cap=cfg.get("hop_cap"))
        state = QueryState()
        if classify(state, g, body.budget) is StateKind.CUT:
            raise ApiError(
                422, "already_cut", "source and target are already disconnected"
            )
        policy = _policy_from_config(kind, g, catalog, body.budget, cfg)
        session = Session(
            session_id=session_id,
            graph=g,
            catalog=catalog,
            policy=policy,
            budget=body.budget,
        )
        session.advance()
        return session
    except ApiError:
        raise
    except PathcutterError as exc:
        raise ApiError(400, "invalid_request", str(exc)) from None


class SessionStore:
    """Sessions plus an optional append-only event log.

    Thread safety: one lock guards the session map and all state
    transitions; FastAPI's sync endpoints run in a threadpool, so every
    mutation takes the lock.
    """

    def __init__(self, persist_dir: Optional[str] = None):
        self.sessions: dict[str, Session] = {}
        self.persist_dir = persist_dir
        self.lock = threading.RLock()
        self._log_path = None
        if persist_dir is not None:
            os.makedirs(persist_dir, exist_ok=True)
            self._log_path = os.path.join(persist_dir, "events.jsonl")
            self._replay()

    def _append_event(self, event: dict) -> None:
        if self._log_path is None:
            return
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")

    def _replay(self) -> None:
        if not os.path.exists(self._log_path):
            return
        with open(self._log_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                kind = event.get("event")
                if kind == "created":
                    body = CreateSessionBody(**event["body"])
                    session = _build_session(event["session_id"], body)
                    self.sessions[session.session_id] = session
                elif kind == "choice":
                    session = self.sessions.get(event["session_id"])
                    if session is not None and session.status == "active":
                        session.submit(event["edge_id"])
                # proposal events are informational; proposals are
                # recomputed deterministically during replay

    def create(self, body: CreateSessionBody) -> Session:
        with self.lock:
            session_id = uuid.uuid4().hex
            session = _build_session(session_id, body)
            self.sessions[session_id] = session
            self._append_event(
                {
                    "event": "created",
                    "session_id": session_id,
                    "body": body.model_dump(),
                }
            )
            if session.proposal_index is not None:
                self._append_event(
                    {
                        "event": "proposal",
                        "session_id": session_id,
                        "round": session.state.round,
                        "path_index": session.proposal_index,
                    }
                )
            return session

    def get(self, session_id: str) -> Session:
        with self.lock:
            session = self.sessions.get(session_id)
            if session is None:
                raise ApiError(404, "unknown_session", f"no session {session_id}")
            return session

    def submit(self, session_id: str, edge_id: int) -> Session:
        with self.lock:
            session = self.get(session_id)
            session.submit(edge_id)
            self._append_event(
                {"event": "choice", "session_id": session_id, "edge_id": edge_id}
            )
            if session.proposal_index is not None:
                self._append_event(
                    {
                        "event": "proposal",
                        "session_id": session_id,
                        "round": session.state.round,
                        "path_index": session.proposal_index,
                    }
                )
            return session


def create_app(store: Optional[SessionStore] = None) -> FastAPI:
    """Build the API app; pass a store for persistence or test injection."""
    app = FastAPI(title="pathcutter session service")
    app.state.store = store if store is not None else SessionStore()
    # Browser clients are served from their own origin (any static file
    # host); the API is unauthenticated local tooling, so allow them all.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": exc.error, "detail": exc.detail},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": "validation", "detail": str(exc.errors())},
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        session = app.state.store.create(body)
        return {
            "session_id": session.session_id,
            "budget": session.budget,
            "proposal": session.proposal_payload(),
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return app.state.store.get(session_id).view()

    @app.post("/sessions/{session_id}/choice")
    def submit_choice(session_id: str, body: ChoiceBody):
        session = app.state.store.submit(session_id, body.edge_id)
        payload = {
            "status": session.status,
            "round": session.state.round,
            "removed_edges": list(session.state.removed),
        }
        if session.status == "active":
            payload["proposal"] = session.proposal_payload()
        else:
            payload["summary"] = session.summary_payload()
        return payload

    return app


def bind_address() -> tuple[str, int]:
    """Host/port from the PATHCUTTER_BIND environment variable."""
    raw = os.environ.get(BIND_ENV_VAR, DEFAULT_BIND)
    host, _, port = raw.rpartition(":")
    if not host or not port.isdigit():
        raise PathcutterError(
            f"{BIND_ENV_VAR} must look like host:port, got {raw!r}"
        )
    return host, int(port)
