"""Tests for proposal policies.

Oracle: `brute_opt` below is an independent brute-force backward induction
written against the conftest path oracle (dict-of-frozenset memo, plain
float arithmetic, no shared code with the module under test).  Hand-derived
values for the fixture graphs are frozen in the tests:

- g_bridge (paths (1,2) and (3,2), all conf 1): proposing either path makes
  the admin remove the shared bridge edge 2 with probability 1/2, which
  cuts immediately; otherwise one more round finishes.  u_root = 1.5 at
  budget 2.
- g_dia (two disjoint 2-edge paths): every removal kills one path, so two
  rounds always cut: u = 2 at budget 2; at budget 1 the run always
  exhausts: u = 1 + alpha = 3.
- g_dag4 root gains: path (5,) -> 1, (1,2) -> 5/3, (3,4) -> 7/4,
  (1,6,4) -> 29/15 (maximal).
"""

import json
import math

import pytest

from pathcutter.errors import (
    GraphValidationError,
    ProtocolViolation,
    StateSpaceOverflow,
)
from pathcutter.graph import enumerate_paths, min_cut
from pathcutter.mdp import ROOT, QueryState, RewardSpec
from pathcutter.policies import (
    POLICY_KINDS,
    AppPolicy,
    DprConfig,
    DprPolicy,
    OptPolicy,
    Oth1Policy,
    Oth2Policy,
    app_step,
    dpr_solve,
    dpr_step,
    make_policy,
    marginal_gain,
    opt_solve,
    oth1_step,
    oth2_step,
    path_sampling,
    utility_g,
)

from conftest import brute_all_paths, build_graph


# ---------------------------------------------------------------------------
# Independent oracle: brute-force backward induction
# ---------------------------------------------------------------------------

def brute_opt(g, budget, alpha):
    """Minimum expected cost from the empty state, brute force.

    Cost convention: cut -> 0, budget exhausted -> alpha, interior
    proposal -> 1 + probability-weighted successor cost.
    """
    paths = brute_all_paths(g)
    memo = {}

    def u(removed):
        hit = memo.get(removed)
        if hit is not None:
            return hit
        alive = [p for p in paths if not set(p) & removed]
        if not alive:
            value = 0.0
        elif len(removed) >= budget:
            value = alpha
        else:
            best = math.inf
            for p in alive:
                confs = [g.edge(e).conf for e in p]
                total = sum(confs)
                q = 1.0 + sum(
                    (c / total) * u(removed | {e}) for e, c in zip(p, confs)
                )
                best = min(best, q)
            value = best
        memo[removed] = value
        return value

    return u(frozenset())


# ---------------------------------------------------------------------------
# Coverage utility and marginal gain
# ---------------------------------------------------------------------------

class TestUtilityG:
    def test_root_is_zero(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        assert utility_g(catalog, ROOT) == 0

    def test_hand_values(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        # catalog order: (5,), (1,2), (3,4), (1,6,4)
        cases = [
            ((5,), 1),
            ((1,), 2),       # kills (1,2) and (1,6,4)
            ((1, 4), 3),     # adds (3,4)
            ((5, 1, 4), 4),  # everything
            ((6,), 1),
        ]
        for removed, expected in cases:
            assert utility_g(catalog, QueryState(removed=removed)) == expected

    def test_oracle_on_corpus(self, corpus100):
        for g, catalog in corpus100[:40]:
            removed = catalog.paths[0][:2]
            got = utility_g(catalog, QueryState(removed=removed))
            expected = sum(
                1 for p in brute_all_paths(g) if set(p) & set(removed)
            )
            assert got == expected


class TestMarginalGain:
    def test_bridge_hand_value(self, g_bridge):
        catalog = enumerate_paths(g_bridge)
        # Path (1,2), equal confs: removing 1 kills 1 path, removing the
        # shared edge 2 kills both.  gain = 0.5*1 + 0.5*2 = 1.5.
        assert marginal_gain(catalog, ROOT, 0, g_bridge) == pytest.approx(1.5)

    def test_dag4_hand_values(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        expected = [1.0, 5.0 / 3.0, 7.0 / 4.0, 29.0 / 15.0]
        for action, want in enumerate(expected):
            got = marginal_gain(catalog, ROOT, action, g_dag4)
            assert got == pytest.approx(want, abs=1e-12), action

    def test_gain_shrinks_with_coverage(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        # After removing edge 5, path (3,4)'s gain counts only new kills.
        state = QueryState(removed=(5,))
        assert marginal_gain(catalog, state, 2, g_dag4) == pytest.approx(7.0 / 4.0)
        state2 = QueryState(removed=(3,))
        # Path (1,6,4): edge 4's kill of (3,4) is no longer new.
        got = marginal_gain(catalog, state2, 3, g_dag4)
        assert got == pytest.approx((8 / 15) * 2 + (1 / 15) * 1 + (6 / 15) * 1)

    def test_infeasible_action_rejected(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        with pytest.raises(ProtocolViolation, match="infeasible"):
            marginal_gain(catalog, QueryState(removed=(5,)), 0, g_dag4)


# ---------------------------------------------------------------------------
# Exact solve
# ---------------------------------------------------------------------------

class TestOptSolve:
    def test_bridge_hand_value(self, g_bridge):
        catalog = enumerate_paths(g_bridge)
        table = opt_solve(g_bridge, catalog, budget=2)
        assert table.u_root == pytest.approx(1.5, abs=1e-12)
        assert table.action(ROOT) == 0  # tie between paths; lowest index wins
        assert table.value(ROOT) == table.u_root

    def test_dia_hand_values(self, g_dia):
        catalog = enumerate_paths(g_dia)
        assert opt_solve(g_dia, catalog, budget=2).u_root == pytest.approx(2.0)
        assert opt_solve(g_dia, catalog, budget=1).u_root == pytest.approx(3.0)

    def test_matches_brute_force_on_corpus(self, corpus100):
        for budget in (2, 3):
            for g, catalog in corpus100[:40]:
                table = opt_solve(g, catalog, budget=budget)
                want = brute_opt(g, budget, alpha=2.0 * budget)
                assert table.u_root == pytest.approx(want, abs=1e-9), (
                    budget,
                    g.edges,
                )

    def test_bellman_consistency(self, corpus100):
        """Every interior entry equals 1 + weighted successor values."""
        for g, catalog in corpus100[:20]:
            table = opt_solve(g, catalog, budget=3)
            for ids, u, action in table.items():
                if action is None:
                    continue
                state = QueryState(removed=ids)
                path = catalog.paths[action]
                confs = [g.edge(e).conf for e in path]
                total = sum(confs)
                q = 1.0 + sum(
                    (c / total) * table.value(QueryState(removed=ids + (e,)))
                    for e, c in zip(path, confs)
                )
                assert u == pytest.approx(q, abs=1e-9)

    def test_root_action_is_brute_argmin(self, corpus100):
        for g, catalog in corpus100[:15]:
            budget = 2
            table = opt_solve(g, catalog, budget=budget)
            action = table.action(ROOT)
            qs = []
            for a, path in enumerate(catalog.paths):
                confs = [g.edge(e).conf for e in path]
                total = sum(confs)
                q = 1.0 + sum(
                    (c / total) * table.value(QueryState(removed=(e,)))
                    for e, c in zip(path, confs)
                )
                qs.append(q)
            assert qs[action] <= min(qs) + 1e-9

    def test_alpha_override(self, g_dia):
        catalog = enumerate_paths(g_dia)
        table = opt_solve(g_dia, catalog, budget=1, spec=RewardSpec(alpha=10.0))
        assert table.u_root == pytest.approx(11.0)
        assert table.alpha == 10.0

    def test_value_bounds(self, corpus100):
        """min(min-cut, budget) <= u_root <= budget + alpha.

        At least min-cut removals are needed before a cut, and a run can
        never cost more than every query plus the exhaustion penalty.
        (Note u is NOT monotone in budget at fixed alpha: on hopeless
        graphs extra rounds just add queries before the same penalty.)
        """
        from conftest import brute_min_cut_size

        for g, catalog in corpus100[:25]:
            for budget in (2, 4):
                u = opt_solve(g, catalog, budget=budget, spec=RewardSpec(alpha=8.0)).u_root
                assert u >= min(brute_min_cut_size(g), budget) - 1e-9
                assert u <= budget + 8.0 + 1e-9

    def test_value_monotone_in_alpha(self, corpus100):
        for g, catalog in corpus100[:25]:
            u_lo = opt_solve(g, catalog, budget=2, spec=RewardSpec(alpha=4.0)).u_root
            u_hi = opt_solve(g, catalog, budget=2, spec=RewardSpec(alpha=8.0)).u_root
            assert u_lo <= u_hi + 1e-9

    def test_budget_must_be_positive(self, g_dia):
        catalog = enumerate_paths(g_dia)
        with pytest.raises(GraphValidationError, match="budget"):
            opt_solve(g_dia, catalog, budget=0)

    def test_incomplete_catalog_rejected(self, g_dag4):
        catalog = enumerate_paths(g_dag4, hop_cap=2)
        with pytest.raises(GraphValidationError, match="complete catalog"):
            opt_solve(g_dag4, catalog, budget=2)

    def test_disconnected_root_rejected(self):
        g = build_graph([(1, 0, 1, 0.5)], source=0, target=2, nodes=(0, 1, 2))
        catalog = enumerate_paths(g)
        with pytest.raises(GraphValidationError, match="already disconnected"):
            opt_solve(g, catalog, budget=1)

    def test_state_space_overflow(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        with pytest.raises(StateSpaceOverflow, match="max_states"):
            opt_solve(g_dag4, catalog, budget=3, max_states=2)


class TestValueTable:
    def test_contains_and_outside_state(self, g_dia):
        catalog = enumerate_paths(g_dia)
        table = opt_solve(g_dia, catalog, budget=1)
        assert ROOT in table
        assert QueryState(removed=(1,)) in table
        outside = QueryState(removed=(1, 3))  # beyond budget-1 horizon
        assert outside not in table
        with pytest.raises(ProtocolViolation, match="outside the solved space"):
            table.value(outside)

    def test_items_canonical_order(self, g_dia):
        catalog = enumerate_paths(g_dia)
        table = opt_solve(g_dia, catalog, budget=2)
        rows = table.items()
        keys = [ids for ids, _, _ in rows]
        assert keys == sorted(keys, key=lambda t: (len(t), t))
        assert keys[0] == ()
        assert all(ids == tuple(sorted(ids)) for ids in keys)

    def test_len_counts_states(self, g_single):
        catalog = enumerate_paths(g_single)
        table = opt_solve(g_single, catalog, budget=1)
        # Root plus the single post-removal state.
        assert len(table) == 2

    def test_to_json_structure(self, g_bridge):
        catalog = enumerate_paths(g_bridge)
        table = opt_solve(g_bridge, catalog, budget=2)
        doc = json.loads(table.to_json())
        assert doc["budget"] == 2
        assert doc["alpha"] == 4.0
        assert doc["entries"][""]["u"] == pytest.approx(1.5)
        assert doc["entries"][""]["action"] == 0
        assert doc["entries"]["2"] == {"u": 0.0, "action": None}


# ---------------------------------------------------------------------------
# One-step rules
# ---------------------------------------------------------------------------

class TestAppStep:
    def test_picks_max_gain(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        assert app_step(g_dag4, catalog, ROOT) == 3  # gain 29/15

    def test_tie_breaks_to_lowest_index(self, g_dia):
        catalog = enumerate_paths(g_dia)
        assert app_step(g_dia, catalog, ROOT) == 0  # both paths gain 1

    def test_dead_state_returns_none(self, g_single):
        catalog = enumerate_paths(g_single)
        assert app_step(g_single, catalog, QueryState(removed=(7,))) is None

    def test_exclusion_picks_next_best(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        assert app_step(g_dag4, catalog, ROOT, exclude=frozenset({3})) == 2

    def test_exclusion_of_everything_falls_back(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        got = app_step(g_dag4, catalog, ROOT, exclude=frozenset({0, 1, 2, 3}))
        assert got == 3

    def test_matches_marginal_gain_argmax_on_corpus(self, corpus100):
        for g, catalog in corpus100[:30]:
            action = app_step(g, catalog, ROOT)
            gains = [
                marginal_gain(catalog, ROOT, a, g)
                for a in range(len(catalog.paths))
            ]
            best = max(gains)
            assert gains[action] == pytest.approx(best, abs=1e-12)
            # Canonical tie-break: no lower index achieves the max.
            for a in range(action):
                assert gains[a] < best - 1e-12 or not math.isclose(
                    gains[a], best, abs_tol=1e-12
                )


class TestOth1Step:
    def test_proposal_crosses_min_cut(self, corpus100):
        for g, catalog in corpus100[:30]:
            action = oth1_step(g, catalog, ROOT)
            cut = min_cut(g, ())
            assert set(catalog.paths[action]) & cut, (g.edges, cut)

    def test_max_gain_among_cut_crossers(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        action = oth1_step(g_dag4, catalog, ROOT)
        cut = min_cut(g_dag4, ())
        crossers = [
            a for a, p in enumerate(catalog.paths) if set(p) & cut
        ]
        gains = {a: marginal_gain(catalog, ROOT, a, g_dag4) for a in crossers}
        assert action in crossers
        assert gains[action] == pytest.approx(max(gains.values()), abs=1e-12)

    def test_dead_state_returns_none(self, g_single):
        catalog = enumerate_paths(g_single)
        assert oth1_step(g_single, catalog, QueryState(removed=(7,))) is None


class TestOth2Step:
    def test_prefers_min_hop_path(self, g_dag4):
        # (5,) is the unique 1-hop path; APP would pick (1,6,4) instead.
        catalog = enumerate_paths(g_dag4)
        assert oth2_step(g_dag4, catalog, ROOT) == 0
        assert app_step(g_dag4, catalog, ROOT) == 3

    def test_updates_with_removals(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        # Removing edge 5 leaves the 2-hop paths (1,2) and (3,4).
        action = oth2_step(g_dag4, catalog, QueryState(removed=(5,)))
        assert action in (1, 2)
        # (3,4) has gain 7/4 > (1,2)'s 0.8/1.2*2 + 0.4/1.2*1 = 5/3 after
        # nothing else is removed; check exact argmax.
        g1 = marginal_gain(catalog, QueryState(removed=(5,)), 1, g_dag4)
        g2 = marginal_gain(catalog, QueryState(removed=(5,)), 2, g_dag4)
        assert action == (1 if g1 >= g2 else 2)

    def test_dead_state_returns_none(self, g_single):
        catalog = enumerate_paths(g_single)
        assert oth2_step(g_single, catalog, QueryState(removed=(7,))) is None


# ---------------------------------------------------------------------------
# Action sampling
# ---------------------------------------------------------------------------

class TestPathSampling:
    def test_small_state_returns_all_alive(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        assert path_sampling(g_dag4, catalog, ROOT, tau=4) == (0, 1, 2, 3)
        assert path_sampling(g_dag4, catalog, ROOT, tau=16) == (0, 1, 2, 3)

    def test_single_sampler_quota(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        # APP top-2 by gain: (1,6,4) then (3,4).
        got = path_sampling(g_dag4, catalog, ROOT, tau=2, samplers=("APP",))
        assert got == (2, 3)
        # OTH2's pool is just the 1-hop path.
        got = path_sampling(g_dag4, catalog, ROOT, tau=1, samplers=("OTH2",))
        assert got == (0,)
        # Result may be shorter than tau when the pool is small.
        got = path_sampling(g_dag4, catalog, ROOT, tau=2, samplers=("OTH2",))
        assert got == (0,)

    def test_remainder_goes_to_app(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        # tau=2 over three samplers: base share 0, remainder 2 -> all APP.
        got = path_sampling(g_dag4, catalog, ROOT, tau=2)
        assert got == (2, 3)

    def test_mixed_samplers_union(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        got = path_sampling(
            g_dag4, catalog, ROOT, tau=2, samplers=("APP", "OTH2")
        )
        assert got == (0, 3)  # APP's best plus the min-hop path

    def test_properties_on_corpus(self, corpus100):
        for g, catalog in corpus100[:30]:
            got = path_sampling(g, catalog, ROOT, tau=3)
            assert list(got) == sorted(set(got))
            assert set(got) <= set(range(len(catalog.paths)))
            assert 1 <= len(got) <= 3

    def test_tau_validation(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        with pytest.raises(GraphValidationError, match="tau"):
            path_sampling(g_dag4, catalog, ROOT, tau=0)

    def test_sampler_validation(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        with pytest.raises(GraphValidationError, match="samplers"):
            path_sampling(g_dag4, catalog, ROOT, tau=2, samplers=("BOGUS",))


class TestDprConfig:
    def test_defaults(self):
        cfg = DprConfig()
        assert cfg.lookahead == 4
        assert cfg.tau == 16
        assert cfg.frontier == "min-cut-estimate"
        assert cfg.samplers == ("APP", "OTH1", "OTH2")

    def test_sampler_order_canonicalized(self):
        cfg = DprConfig(samplers=("OTH2", "APP"))
        assert cfg.samplers == ("APP", "OTH2")

    def test_validation(self):
        with pytest.raises(GraphValidationError, match="lookahead"):
            DprConfig(lookahead=0)
        with pytest.raises(GraphValidationError, match="tau"):
            DprConfig(tau=0)
        with pytest.raises(GraphValidationError, match="frontier"):
            DprConfig(frontier="bogus")
        with pytest.raises(GraphValidationError, match="samplers"):
            DprConfig(samplers=())


# ---------------------------------------------------------------------------
# Restricted DP
# ---------------------------------------------------------------------------

class TestDprSolve:
    def test_terminal_states(self, g_bridge):
        catalog = enumerate_paths(g_bridge)
        # Removing the bridge cuts: value 0, no action.
        got = dpr_solve(g_bridge, catalog, QueryState(removed=(2,)), budget=2)
        assert got == (0.0, None)
        # Connected at the budget: alpha, no action.
        got = dpr_solve(g_bridge, catalog, QueryState(removed=(1,)), budget=1)
        assert got == (2.0, None)

    def test_min_cut_frontier_hand_value(self, g_dia):
        catalog = enumerate_paths(g_dia)
        cfg = DprConfig(lookahead=1, tau=4)
        value, action = dpr_solve(g_dia, catalog, ROOT, budget=2, config=cfg)
        # Children sit on the horizon with residual min cut 1 <= remaining
        # budget 1, so the frontier charges exactly 1 more round.
        assert value == pytest.approx(2.0, abs=1e-12)
        assert action == 0

    def test_alpha_pessimistic_frontier_hand_value(self, g_dia):
        catalog = enumerate_paths(g_dia)
        cfg = DprConfig(lookahead=1, tau=4, frontier="alpha-pessimistic")
        value, action = dpr_solve(g_dia, catalog, ROOT, budget=2, config=cfg)
        assert value == pytest.approx(5.0, abs=1e-12)  # 1 + alpha(=4)
        assert action == 0

    def test_frontier_penalty_when_cut_exceeds_budget(self):
        # Three disjoint 2-edge routes; after one removal the residual min
        # cut (2) exceeds the remaining budget (1), so the frontier charges
        # the remainder plus alpha: u = 1 + (1 + 4) = 6.
        g = build_graph(
            [
                (1, 0, 1, 1.0),
                (2, 1, 4, 1.0),
                (3, 0, 2, 1.0),
                (4, 2, 4, 1.0),
                (5, 0, 3, 1.0),
                (6, 3, 4, 1.0),
            ],
            source=0,
            target=4,
        )
        catalog = enumerate_paths(g)
        cfg = DprConfig(lookahead=1, tau=8)
        value, action = dpr_solve(g, catalog, ROOT, budget=2, config=cfg)
        assert value == pytest.approx(6.0, abs=1e-12)
        assert action == 0

    def test_spec_override(self):
        g = build_graph(
            [
                (1, 0, 1, 1.0),
                (2, 1, 4, 1.0),
                (3, 0, 2, 1.0),
                (4, 2, 4, 1.0),
                (5, 0, 3, 1.0),
                (6, 3, 4, 1.0),
            ],
            source=0,
            target=4,
        )
        catalog = enumerate_paths(g)
        cfg = DprConfig(lookahead=1, tau=8)
        value, _ = dpr_solve(
            g, catalog, ROOT, budget=2, config=cfg, spec=RewardSpec(alpha=10.0)
        )
        assert value == pytest.approx(12.0, abs=1e-12)

    def test_degenerates_to_opt_when_unrestricted(self, corpus100):
        """lookahead >= budget and tau >= |paths| reproduce the exact DP."""
        budget = 3
        for g, catalog in corpus100[:25]:
            table = opt_solve(g, catalog, budget=budget)
            cfg = DprConfig(lookahead=budget, tau=max(1, len(catalog.paths)))
            value, action = dpr_solve(g, catalog, ROOT, budget=budget, config=cfg)
            assert value == pytest.approx(table.u_root, abs=1e-9)
            assert action == table.action(ROOT)

    def test_budget_validation(self, g_dia):
        catalog = enumerate_paths(g_dia)
        with pytest.raises(GraphValidationError, match="budget"):
            dpr_solve(g_dia, catalog, ROOT, budget=0)

    def test_dpr_step_returns_action(self, g_dia):
        catalog = enumerate_paths(g_dia)
        assert dpr_step(g_dia, catalog, ROOT, budget=2) == 0
        assert dpr_step(g_dia, catalog, QueryState(removed=(1, 3)), budget=4) is None


# ---------------------------------------------------------------------------
# Policy objects
# ---------------------------------------------------------------------------

class TestPolicyObjects:
    def test_make_policy_kinds(self, g_dia):
        catalog = enumerate_paths(g_dia)
        expected = {
            "OPT": OptPolicy,
            "APP": AppPolicy,
            "OTH1": Oth1Policy,
            "OTH2": Oth2Policy,
            "DPR": DprPolicy,
        }
        assert set(POLICY_KINDS) == set(expected)
        for kind, cls in expected.items():
            policy = make_policy(kind, g_dia, catalog, budget=2)
            assert isinstance(policy, cls)
            assert policy.kind == kind

    def test_make_policy_case_insensitive(self, g_dia):
        catalog = enumerate_paths(g_dia)
        assert isinstance(make_policy("opt", g_dia, catalog, 2), OptPolicy)

    def test_make_policy_unknown_kind(self, g_dia):
        catalog = enumerate_paths(g_dia)
        with pytest.raises(GraphValidationError, match="unknown policy kind"):
            make_policy("GREEDY", g_dia, catalog, 2)

    def test_policies_agree_with_steps(self, g_dag4):
        catalog = enumerate_paths(g_dag4)
        state = QueryState(removed=(5,))
        assert AppPolicy(g_dag4, catalog).propose(state) == app_step(
            g_dag4, catalog, state
        )
        assert Oth1Policy(g_dag4, catalog).propose(state) == oth1_step(
            g_dag4, catalog, state
        )
        assert Oth2Policy(g_dag4, catalog).propose(state) == oth2_step(
            g_dag4, catalog, state
        )
        assert DprPolicy(g_dag4, catalog, budget=3).propose(state) == dpr_step(
            g_dag4, catalog, state, budget=3
        )

    def test_opt_policy_follows_table(self, g_bridge):
        catalog = enumerate_paths(g_bridge)
        policy = OptPolicy(g_bridge, catalog, budget=2)
        assert policy.propose(ROOT) == policy.table.action(ROOT)
        assert policy.propose(ROOT) == 0

    def test_opt_policy_outside_solved_space(self, g_dia):
        catalog = enumerate_paths(g_dia)
        policy = OptPolicy(g_dia, catalog, budget=1)
        with pytest.raises(ProtocolViolation, match="outside the solved space"):
            policy.propose(QueryState(removed=(1, 3)))

    def test_proposals_deterministic_and_feasible(self, corpus100):
        for g, catalog in corpus100[:15]:
            for kind in ("APP", "OTH1", "OTH2", "DPR"):
                policy = make_policy(kind, g, catalog, budget=2)
                first = policy.propose(ROOT)
                assert policy.propose(ROOT) == first
                fresh = make_policy(kind, g, catalog, budget=2)
                assert fresh.propose(ROOT) == first
                assert first in range(len(catalog.paths))
