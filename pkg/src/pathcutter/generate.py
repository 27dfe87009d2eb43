"""Synthetic tiered-infrastructure graphs, supernode merging, and gadgets.

The generator builds privilege-tiered graphs: tier 0 is the most
privileged, the last tier the least.  Infrastructure edges respect
privilege (intra-tier, or downward from tier i to tier i+1) and can
never carry an attack from the source side to the target side on their
own.  Misconfiguration edges run against privilege (lower to higher)
and are the only way attack paths come to exist; each one is placed so
that, after supernode merging, it lies on at least one node-simple
source-target path.

merge_supernodes contracts all tier-0 nodes into the target and all
lowest-tier nodes into the source, keeping parallel edges and dropping
edges internal to a supernode.
"""

from __future__ import annotations

import random
import re
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .errors import GenerationError, GraphValidationError
from .graph import AttackGraph, EdgeRecord

# misconfiguration level -> number of misconfiguration edges
MISCONFIG_LEVELS = {1: 9, 2: 27, 3: 45, 4: 98, 5: 197}

_TIER_RE = re.compile(r"^tier(\d+)$")
UNDEFINED_TIER = "undefined"

_PLACEMENT_ATTEMPTS = 400
_REPAIR_ROUNDS = 300
_STALL_LIMIT = 100


@dataclass(frozen=True)
class GeneratorConfig:
    """Shape and randomness knobs for generate_tiered_graph.

    downward_density defaults to intra_density when None; it exists so
    large presets can carry realistic edge volume in privilege-respecting
    (attack-irrelevant) edges without exploding the attack-path count.

    exit_share sets the fraction of misconfiguration edges that land in
    the top tier (escalation exits) versus edges entering mid-tier nodes;
    small values funnel many entry paths through few exit edges, which is
    what gives merged graphs their characteristically small min-cuts.
    """

    tier_sizes: tuple[int, ...]
    intra_density: float = 0.08
    downward_density: Optional[float] = None
    defined_ratio: float = 0.95
    misconfig_level: Optional[int] = None
    misconfig_count: Optional[int] = None
    exit_share: float = 0.2
    conf_model: str = "uniform"
    conf_bounds: tuple[float, float] = (0.0, 1.0)
    conf_classes: tuple[float, float] = (0.9, 0.1)
    seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.tier_sizes)
        object.__setattr__(self, "tier_sizes", sizes)
        if len(sizes) < 2:
            raise GraphValidationError("need at least two tiers")
        if any(s < 1 for s in sizes):
            raise GraphValidationError("every tier needs at least one node")
        for name, d in (
            ("intra_density", self.intra_density),
            ("downward_density", self.downward_density),
        ):
            if d is not None and not (0.0 <= d <= 1.0):
                raise GraphValidationError(f"{name} must lie in [0, 1]")
        if not (0.0 < self.defined_ratio <= 1.0):
            raise GraphValidationError("defined_ratio must lie in (0, 1]")
        if self.misconfig_level is None and self.misconfig_count is None:
            object.__setattr__(self, "misconfig_level", 3)
        elif self.misconfig_level is not None and self.misconfig_count is not None:
            raise GraphValidationError(
                "set at most one of misconfig_level and misconfig_count"
            )
        if self.misconfig_level is not None and self.misconfig_level not in MISCONFIG_LEVELS:
            raise GraphValidationError(
                f"misconfig_level must be one of {sorted(MISCONFIG_LEVELS)}"
            )
        if self.misconfig_count is not None and self.misconfig_count < 0:
            raise GraphValidationError("misconfig_count must be >= 0")
        if not (0.0 <= self.exit_share <= 1.0):
            raise GraphValidationError("exit_share must lie in [0, 1]")
        if self.conf_model not in ("uniform", "two-class"):
            raise GraphValidationError(f"unknown conf_model {self.conf_model!r}")
        lo, hi = self.conf_bounds
        if not (0.0 <= lo < hi <= 1.0):
            raise GraphValidationError("conf_bounds must satisfy 0 <= lo < hi <= 1")
        high, low = self.conf_classes
        for v in (high, low):
            if not (0.0 < v <= 1.0):
                raise GraphValidationError("conf_classes values must lie in (0, 1]")

    @property
    def n_tiers(self) -> int:
        return len(self.tier_sizes)

    @property
    def n_misconfig(self) -> int:
        if self.misconfig_count is not None:
            return self.misconfig_count
        return MISCONFIG_LEVELS[self.misconfig_level]


def _bfs_path(adj: dict, start: int, goal: int, avoid: set) -> Optional[list]:
    """Shortest node path start->goal skipping `avoid` nodes; None if absent."""
    if start == goal:
        return [start]
    if start in avoid or goal in avoid:
        return None
    prev = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nxt in adj.get(node, ()):
            if nxt in prev or nxt in avoid:
                continue
            prev[nxt] = node
            if nxt == goal:
                path = [nxt]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return list(reversed(path))
            queue.append(nxt)
    return None


def generate_tiered_graph(cfg: GeneratorConfig) -> AttackGraph:
    """Deterministically generate a tiered graph per the config.

    The returned graph is unmerged: every node carries a tier label
    ("tier0".."tierK" or "undefined"), the source placeholder is a
    lowest-tier node and the target placeholder a tier-0 node.  Feed the
    result to merge_supernodes to get the planning-scale graph.
    """
    rng = random.Random(cfg.seed)
    sizes = cfg.tier_sizes
    n_tiers = cfg.n_tiers
    total = sum(sizes)

    tier_nodes: list[list[int]] = []
    true_tier: dict[int, int] = {}
    next_id = 0
    for t, size in enumerate(sizes):
        ids = list(range(next_id, next_id + size))
        next_id += size
        tier_nodes.append(ids)
        for n in ids:
            true_tier[n] = t

    # Undefined-tier marking; one sentinel per merge-relevant tier stays
    # defined so merging always has something to contract.
    n_undef = round((1.0 - cfg.defined_ratio) * total)
    sentinels = {tier_nodes[0][0], tier_nodes[-1][0]}
    candidates = [n for n in range(total) if n not in sentinels]
    undefined = set(rng.sample(candidates, min(n_undef, len(candidates))))

    labels = {
        n: (UNDEFINED_TIER if n in undefined else f"tier{true_tier[n]}")
        for n in range(total)
    }

    edges: list[tuple[int, int]] = []
    misconfig_flags: list[bool] = []

    for ids in tier_nodes:
        for i, u in enumerate(ids):
            for v in ids[i + 1:]:
                if rng.random() < cfg.intra_density:
                    edges.append((u, v))
                    misconfig_flags.append(False)
    dd = cfg.intra_density if cfg.downward_density is None else cfg.downward_density
    for t in range(n_tiers - 1):
        for u in tier_nodes[t]:
            for v in tier_nodes[t + 1]:
                if rng.random() < dd:
                    edges.append((u, v))
                    misconfig_flags.append(False)

    # Merged-view bookkeeping for misconfiguration placement.  Defined
    # tier-0 nodes contract to the target supernode (-2), defined
    # lowest-tier nodes to the source supernode (-1).
    def snode(n: int) -> int:
        if labels[n] == "tier0":
            return -2
        if labels[n] == f"tier{n_tiers - 1}":
            return -1
        return n

    S, T = -1, -2
    base_adj: dict[int, list[int]] = {}
    for (u, v) in edges:
        mu, mv = snode(u), snode(v)
        if mu != mv:
            base_adj.setdefault(mu, []).append(mv)

    # When undefined-tier nodes exist, misconfigurations route through
    # them: each edge either enters an undefined pivot from a lower
    # privilege tier or exits one straight into the defined top tier.
    # Concentrating endpoints on pivots keeps entry edges and exit edges
    # meeting at shared nodes (so every edge can sit on a full path),
    # and pointing exits at the top tier keeps the funnel narrow.
    undefined_order = sorted(undefined)
    defined_top = [n for n in tier_nodes[0] if n not in undefined]
    n_exit = min(cfg.n_misconfig, max(1, round(cfg.exit_share * cfg.n_misconfig)))

    def sample_pair(used: set, kind: str) -> tuple[int, int]:
        for _ in range(_PLACEMENT_ATTEMPTS):
            if undefined_order:
                w = undefined_order[rng.randrange(len(undefined_order))]
                if kind == "exit":
                    u, v = w, rng.choice(defined_top)
                else:
                    k = true_tier[w]
                    src_tier = rng.randrange(k + 1, n_tiers) if k < n_tiers - 1 else k
                    u, v = rng.choice(tier_nodes[src_tier]), w
            else:
                if kind == "exit" or n_tiers == 2:
                    dst_tier = 0
                else:
                    dst_tier = rng.randrange(1, n_tiers - 1)
                src_tier = rng.randrange(dst_tier + 1, n_tiers)
                u = rng.choice(tier_nodes[src_tier])
                v = rng.choice(tier_nodes[dst_tier])
            if (u, v) in used or snode(u) == snode(v):
                continue
            return (u, v)
        raise GenerationError(
            "ran out of candidate misconfiguration endpoints; loosen the "
            "config (tier sizes, defined ratio, or count)"
        )

    def witness(adj: dict, u: int, v: int) -> bool:
        # node-simple merged path source -> u -> v -> target, found greedily:
        # shortest source->u leg, then a target leg disjoint from it
        mu, mv = snode(u), snode(v)
        p1 = _bfs_path(adj, S, mu, avoid={T, mv} - {mu})
        if p1 is None:
            return False
        return _bfs_path(adj, mv, T, avoid=set(p1) - {mv}) is not None

    # Placement is validated jointly: an entry edge may need an exit edge
    # from the same batch to reach the target, so edges are drawn first
    # and the failing ones resampled until every edge sits on a path.
    # If the failing set stops shrinking, one settled edge per round is
    # evicted too: a settled edge can itself be the blocker (e.g. a
    # lowest-tier exit merges into a direct source->target edge that
    # validates alone while starving every entry edge of a target route),
    # and only eviction breaks such an absorbing state. The stall limit
    # sits well above the longest plateau a converging run exhibits, so
    # eviction only triggers on genuine deadlocks.
    kinds = ["exit"] * n_exit + ["entry"] * (cfg.n_misconfig - n_exit)
    used_pairs: set[tuple[int, int]] = set()
    mis: list[tuple[int, int]] = []
    for kind in kinds:
        pair = sample_pair(used_pairs, kind)
        mis.append(pair)
        used_pairs.add(pair)
    best_bad: Optional[int] = None
    stall = 0
    for _round in range(_REPAIR_ROUNDS):
        adj = {k: list(v) for k, v in base_adj.items()}
        for (u, v) in mis:
            adj.setdefault(snode(u), []).append(snode(v))
        bad = [i for i, (u, v) in enumerate(mis) if not witness(adj, u, v)]
        if not bad:
            break
        if best_bad is None or len(bad) < best_bad:
            best_bad = len(bad)
            stall = 0
        else:
            stall += 1
        if stall >= _STALL_LIMIT:
            settled = [i for i in range(len(mis)) if i not in set(bad)]
            if settled:
                bad.append(settled[rng.randrange(len(settled))])
        for i in bad:
            used_pairs.discard(mis[i])
            pair = sample_pair(used_pairs, kinds[i])
            mis[i] = pair
            used_pairs.add(pair)
    else:
        raise GenerationError(
            "misconfiguration placement did not converge; loosen the config "
            "(densities, tier sizes, or count)"
        )
    for (u, v) in mis:
        edges.append((u, v))
        misconfig_flags.append(True)

    lo, hi = cfg.conf_bounds
    high, low = cfg.conf_classes
    records = []
    for eid, ((u, v), is_mis) in enumerate(zip(edges, misconfig_flags)):
        if cfg.conf_model == "uniform":
            conf = lo + (hi - lo) * (1.0 - rng.random())  # lands in (lo, hi]
        else:
            conf = high if is_mis else low
        records.append(EdgeRecord(id=eid, src=u, dst=v, conf=conf))

    return AttackGraph(
        nodes=range(total),
        edges=records,
        source=tier_nodes[-1][0],
        target=tier_nodes[0][0],
        tier=labels,
    )


def merge_supernodes(g: AttackGraph) -> AttackGraph:
    """Contract tier-0 nodes into the target, lowest-tier nodes into the source.

    Parallel edges survive with their original ids and confidences; edges
    internal to a supernode are dropped.  Requires at least one labeled
    tier-0 node and at least one labeled lowest-tier node.
    """
    tiers_present = set()
    for label in g.tier.values():
        m = _TIER_RE.match(label)
        if m:
            tiers_present.add(int(m.group(1)))
    if not tiers_present or 0 not in tiers_present:
        raise GraphValidationError("no tier-0 nodes to merge into a target")
    lowest = max(tiers_present)
    if lowest == 0:
        raise GraphValidationError("need a lowest tier distinct from tier 0")

    t_members = {n for n, lab in g.tier.items() if lab == "tier0"}
    s_members = {n for n, lab in g.tier.items() if lab == f"tier{lowest}"}
    s_id = max(g.nodes) + 1
    t_id = max(g.nodes) + 2

    def mapped(n: int) -> int:
        if n in t_members:
            return t_id
        if n in s_members:
            return s_id
        return n

    edges = []
    for e in g.edges:
        ms, md = mapped(e.src), mapped(e.dst)
        if ms == md:
            continue
        edges.append(EdgeRecord(id=e.id, src=ms, dst=md, conf=e.conf))

    survivors = [n for n in g.nodes if n not in t_members and n not in s_members]
    tier = {n: g.tier[n] for n in survivors if n in g.tier}
    tier[s_id] = f"tier{lowest}"
    tier[t_id] = "tier0"
    return AttackGraph(
        nodes=survivors + [s_id, t_id],
        edges=edges,
        source=s_id,
        target=t_id,
        tier=tier,
    )


def build_reduction_gadget(
    base: AttackGraph,
    budget: int,
    high_conf: float = 1.0,
    low_conf: float = 1e-6,
) -> AttackGraph:
    """Replace every base edge with the parallel-edge hardness gadget.

    Edge (u, v) becomes an auxiliary node uv, one low-confidence edge
    u->uv, one low-confidence uv->v, and `budget` parallel high-confidence
    uv->v edges.  Base confidences are discarded; only the high/low split
    matters.  Use a high/low ratio of at least 1e6 for the intended
    near-coin-flip behavior per segment.
    """
    if budget < 1:
        raise GraphValidationError("budget must be >= 1")
    for name, v in (("high_conf", high_conf), ("low_conf", low_conf)):
        if not (0.0 < v <= 1.0):
            raise GraphValidationError(f"{name} must lie in (0, 1]")
    if low_conf >= high_conf:
        raise GraphValidationError("low_conf must be smaller than high_conf")

    nodes = list(base.nodes)
    next_node = max(base.nodes) + 1
    records = []
    next_eid = 0
    for e in base.edges:  # ascending id order keeps output deterministic
        aux = next_node
        next_node += 1
        nodes.append(aux)
        records.append(EdgeRecord(id=next_eid, src=e.src, dst=aux, conf=low_conf))
        next_eid += 1
        records.append(EdgeRecord(id=next_eid, src=aux, dst=e.dst, conf=low_conf))
        next_eid += 1
        for _ in range(budget):
            records.append(EdgeRecord(id=next_eid, src=aux, dst=e.dst, conf=high_conf))
            next_eid += 1
    return AttackGraph(
        nodes=nodes, edges=records, source=base.source, target=base.target
    )


# ---------------------------------------------------------------------------
# Presets


def preset_config(name: str, seed: int = 0) -> GeneratorConfig:
    """Named configurations tuned to land at the documented merged scales."""
    key = name.strip().upper()
    if key == "GS":
        return GeneratorConfig(
            tier_sizes=(3, 15, 6),
            intra_density=0.12,
            downward_density=0.06,
            defined_ratio=0.99,
            misconfig_count=12,
            exit_share=0.2,
            conf_model="uniform",
            seed=seed,
        )
    if key == "G1":
        return GeneratorConfig(
            tier_sizes=(60, 1030, 300),
            intra_density=0.0008,
            downward_density=0.0120,
            defined_ratio=0.95,
            misconfig_level=5,
            exit_share=0.02,
            conf_model="uniform",
            seed=seed,
        )
    raise GraphValidationError(f"unknown preset {name!r}; expected GS or G1")


PRESET_NAMES = ("GS", "G1")


def preset_graph(name: str, seed: int = 0) -> AttackGraph:
    """Generate and merge a preset graph; GS is small, G1 is planning-scale."""
    return merge_supernodes(generate_tiered_graph(preset_config(name, seed)))
