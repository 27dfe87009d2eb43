"""Proposal policies: exact DP, greedy coverage, heuristics, and lookahead DP.

Five policy kinds share one uniform interface (propose the next path index
for a query state):

- OPT   exact backward-induction over removed-edge sets, minimizing
        expected queries plus the exhaustion penalty;
- APP   greedy on the adaptive coverage gain (expected number of newly
        eliminated catalog paths per proposal);
- OTH1  coverage-greedy restricted to paths crossing a minimum cut of the
        residual graph;
- OTH2  coverage-greedy restricted to minimum-hop paths of the residual
        graph;
- DPR   depth- and width-restricted DP: actions are sampled per state by
        the APP/OTH1/OTH2 rankings, leaves past the lookahead horizon get
        a frontier valuation.

All tie-breaks are canonical (lowest path index wins), so every policy is
a deterministic function of the query state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .admin import choice_distribution
from .errors import (
    GraphValidationError,
    ProtocolViolation,
    StateSpaceOverflow,
)
from .graph import AttackGraph, PathCatalog, _bits, is_connected, min_cut, min_hop_paths
from .mdp import QueryState, RewardSpec

STATE_LIMIT_DEFAULT = 2_000_000

SAMPLER_ORDER = ("APP", "OTH1", "OTH2")


@dataclass(frozen=True)
class DprConfig:
    """Knobs for the restricted DP: horizon, action width, frontier value."""

    lookahead: int = 4
    tau: int = 16
    frontier: str = "min-cut-estimate"
    samplers: tuple[str, ...] = SAMPLER_ORDER

    def __post_init__(self):
        if self.lookahead < 1:
            raise GraphValidationError("lookahead must be >= 1")
        if self.tau < 1:
            raise GraphValidationError("tau must be >= 1")
        if self.frontier not in ("min-cut-estimate", "alpha-pessimistic"):
            raise GraphValidationError(f"unknown frontier {self.frontier!r}")
        names = tuple(self.samplers)
        if not names or any(n not in SAMPLER_ORDER for n in names):
            raise GraphValidationError(
                f"samplers must be a non-empty subset of {SAMPLER_ORDER}"
            )
        object.__setattr__(
            self, "samplers", tuple(n for n in SAMPLER_ORDER if n in names)
        )


# ---------------------------------------------------------------------------
# Coverage utility


def utility_g(catalog: PathCatalog, state: QueryState) -> int:
    """Number of catalog paths eliminated by the removed edges."""
    covered = 0
    for eid in state.removed:
        covered |= catalog.cover_mask.get(eid, 0)
    return covered.bit_count()


def marginal_gain(
    catalog: PathCatalog, state: QueryState, action: int, g: AttackGraph
) -> float:
    """Expected coverage gain of proposing catalog path `action` in `state`.

    Weights each edge's gain by its removal probability.  The action must
    be feasible (contain no removed edge).
    """
    path = catalog.paths[action]
    removed = state.removed_set
    if any(eid in removed for eid in path):
        raise ProtocolViolation(
            f"path {action} is infeasible in state {sorted(removed)}"
        )
    covered = 0
    for eid in removed:
        covered |= catalog.cover_mask.get(eid, 0)
    base = covered.bit_count()
    dist = choice_distribution(path, g)
    gain = 0.0
    for eid, p in zip(dist.edge_ids, dist.probs):
        gain += p * ((covered | catalog.cover_mask[eid]).bit_count() - base)
    return gain


# ---------------------------------------------------------------------------
# Shared per-(graph, catalog) workspace


class _Workspace:
    """Dense indices, vectorized gain math, and memo tables for one instance.

    States are encoded as bitmasks over dense edge indices; paths as
    bitmasks over catalog indices.  Memo tables (connectivity, min cut,
    min-hop paths, sampled action sets) are keyed by the removed-edge mask
    only, which is sound because all of those are functions of the
    removed set.
    """

    def __init__(self, g: AttackGraph, catalog: PathCatalog):
        self.graph = g
        self.catalog = catalog
        self.n_paths = len(catalog)
        self.eidx = {e.id: i for i, e in enumerate(g.edges)}
        self.eid = [e.id for e in g.edges]
        self.m = len(g.edges)
        self.complete = catalog.hop_cap >= g.n_nodes

        # path -> [(dense edge idx, removal prob)], probs from the choice model
        self.path_dense: list[list[tuple[int, float]]] = []
        flat_e: list[int] = []
        flat_p: list[float] = []
        ptr = [0]
        for path in catalog.paths:
            dist = choice_distribution(path, g)
            pairs = [
                (self.eidx[eid], p) for eid, p in zip(dist.edge_ids, dist.probs)
            ]
            self.path_dense.append(pairs)
            for ei, p in pairs:
                flat_e.append(ei)
                flat_p.append(p)
            ptr.append(len(flat_e))
        self.flat_edges = np.asarray(flat_e, dtype=np.int64)
        self.flat_probs = np.asarray(flat_p, dtype=np.float64)
        self.path_ptr = np.asarray(ptr, dtype=np.int64)
        lens = np.diff(self.path_ptr)
        self.slot_path = np.repeat(np.arange(self.n_paths, dtype=np.int64), lens)

        # path-cover bitmask per dense edge index
        self.cover_bits = [0] * self.m
        for eid, mask in catalog.cover_mask.items():
            self.cover_bits[self.eidx[eid]] = mask
        self.all_paths = catalog.all_mask

        # With a complete catalog, source-target connectivity, min cuts and
        # min-hop paths are functions of the path-edge subgraph alone, and
        # that subgraph is usually far smaller than the full graph (large
        # generated graphs carry most of their volume in edges that sit on
        # no attack path).  Flow and hop queries run against the reduction.
        path_eids = sorted(catalog.cover.keys())
        self._path_eid_mask = self.mask_of(path_eids) if path_eids else 0
        if self.complete and path_eids and len(path_eids) < self.m:
            records = [g.edge(eid) for eid in path_eids]
            sub_nodes = {g.source, g.target}
            for rec in records:
                sub_nodes.add(rec.src)
                sub_nodes.add(rec.dst)
            self.cut_graph = AttackGraph(
                nodes=sub_nodes, edges=records, source=g.source, target=g.target
            )
        else:
            self.cut_graph = g

        self._cut_memo: dict[int, bool] = {}
        self._mincut_memo: dict[int, frozenset[int]] = {}
        self._minhop_memo: dict[int, tuple[int, ...]] = {}
        self._sample_memo: dict[tuple, tuple[int, ...]] = {}

    # -- state encoding ----------------------------------------------------

    def mask_of(self, removed: Iterable[int]) -> int:
        mask = 0
        for eid in removed:
            try:
                mask |= 1 << self.eidx[eid]
            except KeyError:
                raise GraphValidationError(f"unknown edge id {eid}") from None
        return mask

    def ids_of(self, mask: int) -> tuple[int, ...]:
        return tuple(self.eid[i] for i in _bits(mask))

    def alive_of(self, mask: int) -> int:
        dead = 0
        for i in _bits(mask):
            dead |= self.cover_bits[i]
        return self.all_paths & ~dead

    def is_cut(self, mask: int) -> bool:
        alive = self.alive_of(mask)
        if alive:
            return False  # a surviving catalog path is a real path
        if self.complete:
            return True
        hit = self._cut_memo.get(mask)
        if hit is None:
            hit = not is_connected(self.graph, self.ids_of(mask))
            self._cut_memo[mask] = hit
        return hit

    # -- gains -------------------------------------------------------------

    def gain_vector(self, mask: int) -> Optional[np.ndarray]:
        """Coverage gain per catalog path; dead paths get -1.  None if all dead."""
        alive = self.alive_of(mask)
        if not alive:
            return None
        nbytes = (self.n_paths + 7) // 8
        raw = np.frombuffer(alive.to_bytes(nbytes, "little"), dtype=np.uint8)
        alive_bool = np.unpackbits(raw, bitorder="little")[: self.n_paths].astype(bool)
        alive_slots = alive_bool[self.slot_path]
        c = np.bincount(
            self.flat_edges[alive_slots], minlength=self.m
        ).astype(np.float64)
        gains = np.add.reduceat(self.flat_probs * c[self.flat_edges], self.path_ptr[:-1])
        gains[~alive_bool] = -1.0
        return gains

    # -- residual-graph views ----------------------------------------------

    def mincut_ids(self, mask: int) -> frozenset[int]:
        if self.cut_graph is not self.graph:
            mask &= self._path_eid_mask  # off-path removals cannot matter
        hit = self._mincut_memo.get(mask)
        if hit is None:
            hit = min_cut(self.cut_graph, self.ids_of(mask))
            self._mincut_memo[mask] = hit
        return hit

    def minhop_indices(self, mask: int) -> tuple[int, ...]:
        """Catalog indices of the residual graph's minimum-hop paths."""
        if self.cut_graph is not self.graph:
            mask &= self._path_eid_mask
        hit = self._minhop_memo.get(mask)
        if hit is None:
            idxs = []
            for path in min_hop_paths(self.cut_graph, self.ids_of(mask)):
                i = self.catalog.index_of(path)
                if i is not None:
                    idxs.append(i)
            hit = tuple(idxs)
            self._minhop_memo[mask] = hit
        return hit

    # -- choice rules --------------------------------------------------------

    def app_choice(self, mask: int, exclude: frozenset[int] = frozenset()) -> Optional[int]:
        gains = self.gain_vector(mask)
        if gains is None:
            return None
        if exclude:
            live = [i for i in _bits(self.alive_of(mask)) if i not in exclude]
            if not live:
                # The exclusion set never bites on consistent histories
                # (every proposed path loses an edge); fall back rather
                # than propose nothing.
                return int(np.argmax(gains))
            live_arr = np.asarray(live, dtype=np.int64)
            return int(live_arr[np.argmax(gains[live_arr])])
        return int(np.argmax(gains))

    def _top_by_gain(
        self, gains: np.ndarray, candidates: Sequence[int], count: int
    ) -> list[int]:
        """Best `count` candidate indices by gain, ties to the lowest index."""
        arr = np.asarray(sorted(candidates), dtype=np.int64)
        order = np.argsort(-gains[arr], kind="stable")
        return [int(i) for i in arr[order[:count]]]

    def cut_candidates(self, mask: int) -> list[int]:
        """Alive paths that cross a minimum cut of the residual graph."""
        alive = self.alive_of(mask)
        hit = 0
        for eid in self.mincut_ids(mask):
            hit |= self.catalog.cover_mask.get(eid, 0)
        cand = alive & hit
        return list(_bits(cand if cand else alive))

    def oth1_choice(self, mask: int) -> Optional[int]:
        gains = self.gain_vector(mask)
        if gains is None:
            return None
        cand = self.cut_candidates(mask)
        return self._top_by_gain(gains, cand, 1)[0]

    def shortest_candidates(self, mask: int) -> list[int]:
        cand = self.minhop_indices(mask)
        if not cand:
            return list(_bits(self.alive_of(mask)))
        return sorted(cand)

    def oth2_choice(self, mask: int) -> Optional[int]:
        gains = self.gain_vector(mask)
        if gains is None:
            return None
        cand = self.shortest_candidates(mask)
        return self._top_by_gain(gains, cand, 1)[0]

    def sampled_actions(
        self, mask: int, tau: int, samplers: tuple[str, ...]
    ) -> tuple[int, ...]:
        key = (mask, tau, samplers)
        hit = self._sample_memo.get(key)
        if hit is not None:
            return hit
        alive = list(_bits(self.alive_of(mask)))
        if len(alive) <= tau:
            result = tuple(alive)
        else:
            gains = self.gain_vector(mask)
            base, rem = divmod(tau, len(samplers))
            bonus = "APP" if "APP" in samplers else samplers[0]
            chosen: set[int] = set()
            for name in samplers:
                share = base + (rem if name == bonus else 0)
                if share == 0:
                    continue
                if name == "APP":
                    pool = alive
                elif name == "OTH1":
                    pool = self.cut_candidates(mask)
                else:
                    pool = self.shortest_candidates(mask)
                chosen.update(self._top_by_gain(gains, pool, share))
            result = tuple(sorted(chosen)[:tau])
        self._sample_memo[key] = result
        return result


def _workspace(g: AttackGraph, catalog: PathCatalog) -> _Workspace:
    ws = getattr(catalog, "_pathcutter_ws", None)
    if ws is None or ws.graph is not g:
        ws = _Workspace(g, catalog)
        catalog._pathcutter_ws = ws
    return ws


# ---------------------------------------------------------------------------
# Exact solve


class ValueTable:
    """Optimal cost-to-go and argmin action for every reachable removed set.

    Values follow the cost convention: a cut is worth 0, exhausting the
    budget is worth alpha, and each interior proposal costs 1 plus the
    probability-weighted value of its successor states.
    """

    def __init__(self, budget: int, alpha: float, entries: dict, ws: _Workspace):
        self.budget = budget
        self.alpha = alpha
        self._entries = entries  # mask -> (u, action index or None)
        self._ws = ws

    @property
    def u_root(self) -> float:
        return self._entries[0][0]

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, state: QueryState) -> bool:
        return self._ws.mask_of(state.removed) in self._entries

    def _entry(self, state: QueryState):
        mask = self._ws.mask_of(state.removed)
        try:
            return self._entries[mask]
        except KeyError:
            raise ProtocolViolation(
                f"state {sorted(state.removed)} is outside the solved space"
            ) from None

    def value(self, state: QueryState) -> float:
        return self._entry(state)[0]

    def action(self, state: QueryState) -> Optional[int]:
        return self._entry(state)[1]

    def items(self):
        """(sorted removed edge ids, u, action) triples in canonical order."""
        rows = []
        for mask, (u, action) in self._entries.items():
            ids = self._ws.ids_of(mask)
            rows.append((tuple(sorted(ids)), u, action))
        rows.sort(key=lambda r: (len(r[0]), r[0]))
        return rows

    def to_json(self) -> str:
        entries = {
            ",".join(str(i) for i in ids): {"u": u, "action": action}
            for ids, u, action in self.items()
        }
        return json.dumps(
            {"budget": self.budget, "alpha": self.alpha, "entries": entries}
        )


def opt_solve(
    g: AttackGraph,
    catalog: PathCatalog,
    budget: int,
    spec: Optional[RewardSpec] = None,
    max_states: int = STATE_LIMIT_DEFAULT,
) -> ValueTable:
    """Exact backward induction over removed-edge sets from the empty root.

    Requires a complete catalog (hop_cap >= node count) so that "no
    surviving path" and "disconnected" coincide.  States reachable by any
    proposal/removal sequence are enumerated once each; the removal order
    never matters, only the set.
    """
    if budget < 1:
        raise GraphValidationError("budget must be >= 1")
    if spec is None:
        spec = RewardSpec.default(budget)
    ws = _workspace(g, catalog)
    if not ws.complete:
        raise GraphValidationError(
            "opt_solve needs a complete catalog (hop_cap >= node count)"
        )
    if ws.is_cut(0):
        raise GraphValidationError("graph is already disconnected at the root")

    entries: dict[int, tuple[float, Optional[int]]] = {}
    path_dense = ws.path_dense

    def solve(mask: int) -> float:
        hit = entries.get(mask)
        if hit is not None:
            return hit[0]
        if len(entries) >= max_states:
            raise StateSpaceOverflow(
                f"exact solve exceeded {max_states} states; "
                f"shrink the instance or raise max_states"
            )
        alive = ws.alive_of(mask)
        if not alive:
            entries[mask] = (0.0, None)
            return 0.0
        if mask.bit_count() >= budget:
            entries[mask] = (spec.alpha, None)
            return spec.alpha
        best_u = None
        best_a = None
        for a in _bits(alive):
            u = 1.0
            for ei, p in path_dense[a]:
                u += p * solve(mask | (1 << ei))
            if best_u is None or u < best_u:
                best_u = u
                best_a = a
        entries[mask] = (best_u, best_a)
        return best_u

    solve(0)
    return ValueTable(budget, spec.alpha, entries, ws)


# ---------------------------------------------------------------------------
# One-step rules


def app_step(
    g: AttackGraph,
    catalog: PathCatalog,
    state: QueryState,
    exclude: frozenset[int] = frozenset(),
) -> Optional[int]:
    """Feasible path with maximum marginal gain; lowest index on ties.

    `exclude` holds already-proposed path indices.  On consistent
    histories every proposed path has lost an edge and is infeasible
    anyway, so exclusion only matters for off-protocol probing.
    """
    ws = _workspace(g, catalog)
    return ws.app_choice(ws.mask_of(state.removed), exclude)


def oth1_step(g: AttackGraph, catalog: PathCatalog, state: QueryState) -> Optional[int]:
    """Max-gain path among those crossing a minimum cut of the residual graph."""
    ws = _workspace(g, catalog)
    return ws.oth1_choice(ws.mask_of(state.removed))


def oth2_step(g: AttackGraph, catalog: PathCatalog, state: QueryState) -> Optional[int]:
    """Max-gain path among the residual graph's minimum-hop paths."""
    ws = _workspace(g, catalog)
    return ws.oth2_choice(ws.mask_of(state.removed))


def path_sampling(
    g: AttackGraph,
    catalog: PathCatalog,
    state: QueryState,
    tau: int,
    samplers: tuple[str, ...] = SAMPLER_ORDER,
) -> tuple[int, ...]:
    """Up to tau candidate actions pooled from the configured samplers.

    tau splits into equal integer shares per sampler with the remainder
    going to the APP-style sampler; each sampler contributes its top
    share by gain.  When tau covers every feasible action the full
    feasible set comes back.  Result is sorted ascending (canonical) and
    may be shorter than tau.
    """
    cfg = DprConfig(tau=tau, samplers=tuple(samplers))  # reuse validation
    ws = _workspace(g, catalog)
    return ws.sampled_actions(ws.mask_of(state.removed), cfg.tau, cfg.samplers)


# ---------------------------------------------------------------------------
# Restricted DP


def dpr_solve(
    g: AttackGraph,
    catalog: PathCatalog,
    state: QueryState,
    budget: int,
    config: Optional[DprConfig] = None,
    spec: Optional[RewardSpec] = None,
) -> tuple[float, Optional[int]]:
    """Value and argmin action of the restricted DP rooted at `state`.

    Depth is capped at min(lookahead, remaining budget); per-state actions
    are capped at tau via path_sampling.  Leaves past the horizon that are
    neither cut nor exhausted get the configured frontier valuation:
    "min-cut-estimate" charges the residual min-cut size clamped to the
    remaining budget (plus alpha when it exceeds the remainder),
    "alpha-pessimistic" charges alpha.
    """
    if budget < 1:
        raise GraphValidationError("budget must be >= 1")
    if config is None:
        config = DprConfig()
    if spec is None:
        spec = RewardSpec.default(budget)
    ws = _workspace(g, catalog)
    root_mask = ws.mask_of(state.removed)
    root_round = state.round
    if ws.is_cut(root_mask):
        return 0.0, None
    if root_round >= budget:
        return spec.alpha, None

    horizon = root_round + min(config.lookahead, budget - root_round)
    memo: dict[int, float] = {}

    def frontier_value(mask: int, round_: int) -> float:
        if config.frontier == "alpha-pessimistic":
            return spec.alpha
        c = len(ws.mincut_ids(mask))
        rem = budget - round_
        v = float(min(max(c, 0), rem))
        if c > rem:
            v += spec.alpha
        return v

    def value(mask: int) -> float:
        hit = memo.get(mask)
        if hit is not None:
            return hit
        round_ = root_round + (mask.bit_count() - root_mask.bit_count())
        if ws.is_cut(mask):
            v = 0.0
        elif round_ >= budget:
            v = spec.alpha
        elif round_ >= horizon:
            v = frontier_value(mask, round_)
        else:
            v = _best(mask)[0]
        memo[mask] = v
        return v

    def _best(mask: int) -> tuple[float, Optional[int]]:
        actions = ws.sampled_actions(mask, config.tau, config.samplers)
        if not actions:
            return spec.alpha, None  # dead end under a hop-capped catalog
        best_u = None
        best_a = None
        for a in actions:
            u = 1.0
            for ei, p in ws.path_dense[a]:
                u += p * value(mask | (1 << ei))
            if best_u is None or u < best_u:
                best_u = u
                best_a = a
        return best_u, best_a

    return _best(root_mask)


def dpr_step(
    g: AttackGraph,
    catalog: PathCatalog,
    state: QueryState,
    budget: int,
    config: Optional[DprConfig] = None,
    spec: Optional[RewardSpec] = None,
) -> Optional[int]:
    """Argmin action of the restricted DP; None when the state is not interior."""
    return dpr_solve(g, catalog, state, budget, config, spec)[1]


# ---------------------------------------------------------------------------
# Policy objects


class ProposalPolicy:
    """Uniform interface: propose(state) -> catalog path index or None.

    Decisions are memoized per removed-edge set; all shipped policies are
    deterministic functions of that set, so the cache is exact.
    """

    kind = "?"

    def __init__(self, ws: _Workspace):
        self._ws = ws
        self._cache: dict[int, Optional[int]] = {}

    def propose(self, state: QueryState) -> Optional[int]:
        mask = self._ws.mask_of(state.removed)
        if mask in self._cache:
            return self._cache[mask]
        action = self._decide(mask)
        self._cache[mask] = action
        return action

    def _decide(self, mask: int) -> Optional[int]:
        raise NotImplementedError


class OptPolicy(ProposalPolicy):
    kind = "OPT"

    def __init__(self, g: AttackGraph, catalog: PathCatalog, budget: int,
                 spec: Optional[RewardSpec] = None):
        super().__init__(_workspace(g, catalog))
        self.table = opt_solve(g, catalog, budget, spec)

    def _decide(self, mask: int) -> Optional[int]:
        try:
            return self.table._entries[mask][1]
        except KeyError:
            raise ProtocolViolation(
                "state outside the solved space; OPT only covers states "
                "reachable from the empty root"
            ) from None


class AppPolicy(ProposalPolicy):
    kind = "APP"

    def __init__(self, g: AttackGraph, catalog: PathCatalog):
        super().__init__(_workspace(g, catalog))

    def _decide(self, mask: int) -> Optional[int]:
        return self._ws.app_choice(mask)


class Oth1Policy(ProposalPolicy):
    kind = "OTH1"

    def __init__(self, g: AttackGraph, catalog: PathCatalog):
        super().__init__(_workspace(g, catalog))

    def _decide(self, mask: int) -> Optional[int]:
        return self._ws.oth1_choice(mask)


class Oth2Policy(ProposalPolicy):
    kind = "OTH2"

    def __init__(self, g: AttackGraph, catalog: PathCatalog):
        super().__init__(_workspace(g, catalog))

    def _decide(self, mask: int) -> Optional[int]:
        return self._ws.oth2_choice(mask)


class DprPolicy(ProposalPolicy):
    kind = "DPR"

    def __init__(self, g: AttackGraph, catalog: PathCatalog, budget: int,
                 config: Optional[DprConfig] = None,
                 spec: Optional[RewardSpec] = None):
        super().__init__(_workspace(g, catalog))
        self.budget = budget
        self.config = config or DprConfig()
        self.spec = spec or RewardSpec.default(budget)
        self._g = g
        self._catalog = catalog

    def _decide(self, mask: int) -> Optional[int]:
        state = QueryState(removed=self._ws.ids_of(mask))
        return dpr_step(
            self._g, self._catalog, state, self.budget, self.config, self.spec
        )


POLICY_KINDS = ("OPT", "APP", "OTH1", "OTH2", "DPR")


def make_policy(
    kind: str,
    g: AttackGraph,
    catalog: PathCatalog,
    budget: int,
    spec: Optional[RewardSpec] = None,
    dpr_config: Optional[DprConfig] = None,
) -> ProposalPolicy:
    """Build a policy by kind name (see POLICY_KINDS)."""
    kind = kind.upper()
    if kind == "OPT":
        return OptPolicy(g, catalog, budget, spec)
    if kind == "APP":
        return AppPolicy(g, catalog)
    if kind == "OTH1":
        return Oth1Policy(g, catalog)
    if kind == "OTH2":
        return Oth2Policy(g, catalog)
    if kind == "DPR":
        return DprPolicy(g, catalog, budget, dpr_config, spec)
    raise GraphValidationError(
        f"unknown policy kind {kind!r}; expected one of {POLICY_KINDS}"
    )
