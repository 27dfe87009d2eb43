"""Trial runner, Monte-Carlo aggregation, and exact expectation walker.

Randomness discipline: every trial gets its own generator derived from
(seed, trial index), and the admin consumes exactly one uniform per
round.  Two policies simulated with the same seed therefore face the
same uniforms round for round, which is what makes cross-policy
comparisons paired.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .admin import ChoiceDistribution, Realization, SampledStream, choice_distribution, resolve
from .errors import ProtocolViolation, StateSpaceOverflow
from .graph import AttackGraph, PathCatalog
from .mdp import QueryState, StateKind, apply_choice, classify
from .policies import ProposalPolicy, _workspace

CSV_COLUMNS = (
    "graph",
    "policy",
    "trials",
    "mean_queries",
    "std_err",
    "successes",
    "mean_path_len",
    "avg_rank",
)

WALK_LIMIT_DEFAULT = 2_000_000


@dataclass(frozen=True)
class RoundRecord:
    round: int
    path_index: int
    distribution: ChoiceDistribution
    edge_chosen: int


@dataclass(frozen=True)
class Transcript:
    """Replayable record of one trial."""

    rounds: tuple[RoundRecord, ...]
    outcome: StateKind
    query_count: int
    total_path_len: int

    def final_state(self) -> QueryState:
        return QueryState(removed=tuple(r.edge_chosen for r in self.rounds))

    def to_json(self) -> str:
        return json.dumps(
            [
                {"round": r.round, "path_index": r.path_index, "edge_chosen": r.edge_chosen}
                for r in self.rounds
            ]
        )


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Deterministic per-trial stream; no Python hashing involved."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, index))))


def run_trial(
    policy: ProposalPolicy,
    g: AttackGraph,
    catalog: PathCatalog,
    budget: int,
    realization: Realization,
    rng=None,
) -> Transcript:
    """Play one episode to termination and record every round.

    Raises ProtocolViolation if the policy proposes nothing or proposes an
    infeasible path while the state is interior.
    """
    state = QueryState()
    records: list[RoundRecord] = []
    total_len = 0
    while True:
        kind = classify(state, g, budget)
        if kind is not StateKind.INTERIOR:
            return Transcript(
                rounds=tuple(records),
                outcome=kind,
                query_count=len(records),
                total_path_len=total_len,
            )
        action = policy.propose(state)
        if action is None:
            raise ProtocolViolation(
                f"policy {policy.kind} proposed nothing in an interior state"
            )
        path = catalog.paths[action]
        if any(eid in state.removed_set for eid in path):
            raise ProtocolViolation(
                f"policy {policy.kind} proposed infeasible path {action}"
            )
        dist = choice_distribution(path, g)
        edge = resolve(realization, path, action, g, rng)
        records.append(
            RoundRecord(
                round=state.round, path_index=action,
                distribution=dist, edge_chosen=edge,
            )
        )
        total_len += len(path)
        state = apply_choice(state, edge)


@dataclass(frozen=True)
class TrialStats:
    trials: int
    mean_queries: float
    std_err: float
    successes: int
    mean_path_len: float


def _aggregate(
    queries: Sequence[int], path_lens: Sequence[int], cuts: Sequence[bool],
    include_failed: bool,
) -> TrialStats:
    n_all = len(queries)
    successes = sum(1 for c in cuts if c)
    if include_failed:
        use = range(n_all)
    else:
        use = [i for i in range(n_all) if cuts[i]]
    n = len(use)
    if n == 0:
        return TrialStats(n_all, float("nan"), float("nan"), successes, float("nan"))
    q = [float(queries[i]) for i in use]
    mean = math.fsum(q) / n
    if n > 1:
        var = math.fsum((x - mean) ** 2 for x in q) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    tot_len = math.fsum(float(path_lens[i]) for i in use)
    tot_q = math.fsum(q)
    mean_len = tot_len / tot_q if tot_q else float("nan")
    return TrialStats(n_all, mean, se, successes, mean_len)


def monte_carlo(
    policy: ProposalPolicy,
    g: AttackGraph,
    catalog: PathCatalog,
    budget: int,
    trials: int,
    seed: int,
    include_failed: bool = True,
    on_transcript: Optional[Callable[[int, Transcript], None]] = None,
) -> TrialStats:
    """Run sampled-admin trials and fold the stats in trial-index order.

    include_failed=True (default) counts all budget rounds of exhausted
    trials toward mean_queries; False averages successful trials only.
    mean_path_len is the average length over all proposed paths.
    """
    realization = SampledStream()
    queries: list[int] = []
    lens: list[int] = []
    cuts: list[bool] = []
    for i in range(trials):
        t = run_trial(policy, g, catalog, budget, realization, trial_rng(seed, i))
        queries.append(t.query_count)
        lens.append(t.total_path_len)
        cuts.append(t.outcome is StateKind.CUT)
        if on_transcript is not None:
            on_transcript(i, t)
    return _aggregate(queries, lens, cuts, include_failed)


# ---------------------------------------------------------------------------
# Exact expectation by walking the policy's decision tree


def exhaustive_outcome(
    policy: ProposalPolicy,
    g: AttackGraph,
    catalog: PathCatalog,
    budget: int,
    max_states: int = WALK_LIMIT_DEFAULT,
) -> tuple[float, float]:
    """(expected query count, cut probability) under the admin choice model.

    Walks every admin-choice branch of the policy's decision tree, weighting
    by the removal probabilities.  Budget-exhausted branches contribute
    their full budget of queries.  Memoization is per removed-edge set,
    which is exact for policies that decide by the set (all shipped ones).
    """
    ws = _workspace(g, catalog)
    memo: dict[int, tuple[float, float]] = {}

    def walk(mask: int) -> tuple[float, float]:
        hit = memo.get(mask)
        if hit is not None:
            return hit
        if len(memo) >= max_states:
            raise StateSpaceOverflow(
                f"exhaustive walk exceeded {max_states} states"
            )
        if ws.is_cut(mask):
            memo[mask] = (0.0, 1.0)
            return memo[mask]
        if mask.bit_count() >= budget:
            memo[mask] = (0.0, 0.0)
            return memo[mask]
        state = QueryState(removed=ws.ids_of(mask))
        action = policy.propose(state)
        if action is None:
            raise ProtocolViolation(
                f"policy {policy.kind} proposed nothing in an interior state"
            )
        if not (ws.alive_of(mask) >> action) & 1:
            raise ProtocolViolation(
                f"policy {policy.kind} proposed infeasible path {action}"
            )
        eq = 1.0
        pcut = 0.0
        for ei, p in ws.path_dense[action]:
            ceq, cpc = walk(mask | (1 << ei))
            eq += p * ceq
            pcut += p * cpc
        memo[mask] = (eq, pcut)
        return memo[mask]

    return walk(0)


def exhaustive_expected_queries(
    policy: ProposalPolicy,
    g: AttackGraph,
    catalog: PathCatalog,
    budget: int,
    max_states: int = WALK_LIMIT_DEFAULT,
) -> float:
    """Exact expected query count of a deterministic policy."""
    return exhaustive_outcome(policy, g, catalog, budget, max_states)[0]


# ---------------------------------------------------------------------------
# Cross-policy comparison


@dataclass(frozen=True)
class ComparisonReport:
    graph_names: tuple[str, ...]
    policy_names: tuple[str, ...]
    stats: dict  # (graph_name, policy_name) -> TrialStats
    avg_rank: dict  # policy_name -> float


def compare_policies(
    graphs: Sequence[tuple[str, AttackGraph, PathCatalog]],
    policies: Sequence[tuple[str, Callable[[AttackGraph, PathCatalog], ProposalPolicy]]],
    budget: int,
    trials: int,
    seed: int,
) -> ComparisonReport:
    """Simulate every policy on every graph with shared realization streams.

    Policies are given as (label, factory) pairs; the factory builds a
    fresh policy per graph.  Trial i uses the same admin stream for every
    policy, so comparisons are paired.  Ranks per graph are dense (ties
    share a rank) on mean_queries; avg_rank averages them over graphs.
    """
    gnames = tuple(name for name, _, _ in graphs)
    pnames = tuple(name for name, _ in policies)
    if len(set(gnames)) != len(gnames):
        raise ProtocolViolation("duplicate graph names in comparison")
    if len(set(pnames)) != len(pnames):
        raise ProtocolViolation("duplicate policy names in comparison")
    stats: dict = {}
    for gname, g, catalog in graphs:
        for pname, factory in policies:
            policy = factory(g, catalog)
            stats[(gname, pname)] = monte_carlo(
                policy, g, catalog, budget, trials, seed
            )
    rank_sum = {p: 0.0 for p in pnames}
    for gname in gnames:
        means = {p: stats[(gname, p)].mean_queries for p in pnames}
        distinct = sorted(set(means.values()))
        ranks = {m: i + 1 for i, m in enumerate(distinct)}
        for p in pnames:
            rank_sum[p] += ranks[means[p]]
    avg_rank = {p: rank_sum[p] / len(gnames) for p in pnames}
    return ComparisonReport(gnames, pnames, stats, avg_rank)


def _fmt(x: float) -> str:
    return repr(float(x))


def stats_csv(
    rows: Sequence[tuple[str, str, TrialStats, Optional[float]]]
) -> str:
    """Render (graph, policy, stats, avg_rank) rows as CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for gname, pname, st, rank in rows:
        writer.writerow(
            [
                gname,
                pname,
                st.trials,
                _fmt(st.mean_queries),
                _fmt(st.std_err),
                st.successes,
                _fmt(st.mean_path_len),
                "" if rank is None else _fmt(rank),
            ]
        )
    return buf.getvalue()


def report_to_csv(report: ComparisonReport) -> str:
    rows = [
        (gname, pname, report.stats[(gname, pname)], report.avg_rank[pname])
        for gname in report.graph_names
        for pname in report.policy_names
    ]
    return stats_csv(rows)
