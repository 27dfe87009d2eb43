"""Query-process state, termination, and reward.

A run proceeds in rounds: the planner proposes a surviving path, the admin
removes one of its edges.  The process stops when source and target are
disconnected (cut) or when the round budget is spent while still
connected (budget exhausted).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import GraphValidationError, ProtocolViolation
from .graph import AttackGraph, PathCatalog, is_connected


class StateKind(enum.Enum):
    CUT = "cut"
    BUDGET_EXHAUSTED = "budget_exhausted"
    INTERIOR = "interior"


@dataclass(frozen=True)
class QueryState:
    """Ordered record of removed edge ids; round index is its length."""

    removed: tuple[int, ...] = ()

    @property
    def round(self) -> int:
        return len(self.removed)

    @property
    def removed_set(self) -> frozenset[int]:
        return frozenset(self.removed)


ROOT = QueryState()


def apply_choice(state: QueryState, edge_id: int) -> QueryState:
    """Advance one round by recording the admin's removed edge."""
    if edge_id in state.removed:
        raise ProtocolViolation(f"edge {edge_id} was already removed")
    return QueryState(removed=state.removed + (edge_id,))


@dataclass(frozen=True)
class RewardSpec:
    """alpha is the penalty charged when the budget runs out un-cut."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise GraphValidationError(f"alpha must be positive, got {self.alpha}")

    @staticmethod
    def default(budget: int) -> "RewardSpec":
        return RewardSpec(alpha=2.0 * budget)


def classify(state: QueryState, g: AttackGraph, budget: int) -> StateKind:
    """Terminal classification; the cut check wins over budget exhaustion."""
    if budget < 1:
        raise GraphValidationError(f"budget must be >= 1, got {budget}")
    if not is_connected(g, state.removed):
        return StateKind.CUT
    if state.round >= budget:
        return StateKind.BUDGET_EXHAUSTED
    return StateKind.INTERIOR


def reward(kind: StateKind, spec: RewardSpec) -> float:
    """Signed reward: 0 at a cut, -alpha at exhaustion, -1 per interior query."""
    if kind is StateKind.CUT:
        return 0.0
    if kind is StateKind.BUDGET_EXHAUSTED:
        return -spec.alpha
    return -1.0


def terminal_cost(kind: StateKind, spec: RewardSpec) -> float:
    """Cost-to-go of a terminal state: 0 at a cut, alpha at exhaustion."""
    if kind is StateKind.CUT:
        return 0.0
    if kind is StateKind.BUDGET_EXHAUSTED:
        return spec.alpha
    raise ProtocolViolation("interior states have no terminal cost")


def feasible_actions(catalog: PathCatalog, state: QueryState) -> set[int]:
    """Indices of catalog paths containing none of the removed edges."""
    return set(catalog.alive_indices(state.removed))
