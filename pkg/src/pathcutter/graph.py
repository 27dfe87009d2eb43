"""Directed multigraph model and path machinery.

An attack graph is a directed multigraph with a designated source and
target node.  Every edge carries its own id and a confidence score in
(0, 1], and parallel edges are first class: two edges with the same
endpoints are distinct removal candidates.

Paths are node-simple and represented as ordered tuples of edge ids from
source to target.  The canonical order over paths is (length, edge-id
sequence), which every enumeration in this module respects.
"""

from __future__ import annotations

import json
import math
import warnings
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import EnumerationOverflow, GraphValidationError

# Hard ceiling for full path enumeration; beyond this the catalog is
# considered intractable and the caller must lower hop_cap.
PATH_LIMIT_DEFAULT = 2_000_000

_TOP_LEVEL_KEYS = {"nodes", "edges", "source", "target"}


@dataclass(frozen=True)
class EdgeRecord:
    """One directed edge; conf is the admin's confidence it gets removed."""

    id: int
    src: int
    dst: int
    conf: float


class AttackGraph:
    """Validated directed multigraph with source/target and optional tiers.

    Instances are immutable by convention; all graph operations take the
    removed-edge set as an argument instead of mutating the graph, so a
    single instance can be shared freely across threads.
    """

    def __init__(
        self,
        nodes: Iterable[int],
        edges: Iterable[EdgeRecord],
        source: int,
        target: int,
        tier: Optional[Mapping[int, str]] = None,
    ):
        self.nodes: tuple[int, ...] = tuple(sorted(set(nodes)))
        self.edges: tuple[EdgeRecord, ...] = tuple(
            sorted(edges, key=lambda e: e.id)
        )
        self.source = source
        self.target = target
        self.tier: dict[int, str] = dict(tier or {})
        self._validate()

        self._edge_by_id = {e.id: e for e in self.edges}
        out: dict[int, list[tuple[int, int]]] = {n: [] for n in self.nodes}
        inc: dict[int, list[tuple[int, int]]] = {n: [] for n in self.nodes}
        for e in self.edges:  # already sorted by id, so adjacency is canonical
            out[e.src].append((e.id, e.dst))
            inc[e.dst].append((e.id, e.src))
        self._out = {n: tuple(v) for n, v in out.items()}
        self._in = {n: tuple(v) for n, v in inc.items()}

    def _validate(self) -> None:
        node_set = set(self.nodes)
        if not node_set:
            raise GraphValidationError("graph has no nodes")
        for n in node_set:
            if not isinstance(n, int) or isinstance(n, bool):
                raise GraphValidationError(f"node id {n!r} is not an integer")
        seen_ids: set[int] = set()
        for e in self.edges:
            if not isinstance(e.id, int) or isinstance(e.id, bool):
                raise GraphValidationError(f"edge id {e.id!r} is not an integer")
            if e.id in seen_ids:
                raise GraphValidationError(f"duplicate edge id {e.id}")
            seen_ids.add(e.id)
            if e.src not in node_set:
                raise GraphValidationError(
                    f"edge {e.id} references unknown src node {e.src}"
                )
            if e.dst not in node_set:
                raise GraphValidationError(
                    f"edge {e.id} references unknown dst node {e.dst}"
                )
            if e.src == e.dst:
                raise GraphValidationError(f"edge {e.id} is a self-loop")
            if not isinstance(e.conf, (int, float)) or isinstance(e.conf, bool):
                raise GraphValidationError(f"edge {e.id} conf is not a number")
            if not (0.0 < float(e.conf) <= 1.0) or math.isnan(e.conf):
                raise GraphValidationError(
                    f"edge {e.id} conf {e.conf} outside (0, 1]"
                )
        if self.source not in node_set:
            raise GraphValidationError(f"source {self.source} is not a node")
        if self.target not in node_set:
            raise GraphValidationError(f"target {self.target} is not a node")
        if self.source == self.target:
            raise GraphValidationError("source and target must differ")
        for n, label in self.tier.items():
            if n not in node_set:
                raise GraphValidationError(f"tier entry for unknown node {n}")
            if not isinstance(label, str):
                raise GraphValidationError(f"tier label for node {n} not a string")

    # -- accessors ---------------------------------------------------------

    def edge(self, edge_id: int) -> EdgeRecord:
        try:
            return self._edge_by_id[edge_id]
        except KeyError:
            raise GraphValidationError(f"unknown edge id {edge_id}") from None

    def has_edge(self, edge_id: int) -> bool:
        return edge_id in self._edge_by_id

    def out_edges(self, node: int) -> tuple[tuple[int, int], ...]:
        """(edge_id, dst) pairs leaving node, ascending by edge id."""
        return self._out[node]

    def in_edges(self, node: int) -> tuple[tuple[int, int], ...]:
        return self._in[node]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.edges)

    def to_doc(self) -> dict:
        """Serialize back to the JSON document shape accepted by load_graph."""
        nodes = []
        for n in self.nodes:
            rec: dict = {"id": n}
            if n in self.tier:
                rec["tier"] = self.tier[n]
            nodes.append(rec)
        edges = [
            {"id": e.id, "src": e.src, "dst": e.dst, "conf": e.conf}
            for e in self.edges
        ]
        return {
            "nodes": nodes,
            "edges": edges,
            "source": self.source,
            "target": self.target,
        }

    def __repr__(self) -> str:
        return (
            f"AttackGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges}, "
            f"source={self.source}, target={self.target})"
        )


def load_graph(source: Union[str, Mapping]) -> AttackGraph:
    """Build an AttackGraph from a JSON file path or an already-parsed mapping.

    Unknown top-level keys trigger a warning, not an error, so documents
    with extra annotations keep loading.  Structural problems (duplicate
    ids, dangling endpoints, self-loops, conf outside (0, 1]) raise
    GraphValidationError naming the offending record.
    """
    if isinstance(source, Mapping):
        doc = source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    if not isinstance(doc, Mapping):
        raise GraphValidationError("graph document is not a JSON object")

    unknown = set(doc.keys()) - _TOP_LEVEL_KEYS
    if unknown:
        warnings.warn(
            f"ignoring unknown top-level keys in graph document: {sorted(unknown)}",
            stacklevel=2,
        )
    for key in ("nodes", "edges", "source", "target"):
        if key not in doc:
            raise GraphValidationError(f"graph document missing {key!r}")

    nodes = []
    tier = {}
    for rec in doc["nodes"]:
        if not isinstance(rec, Mapping) or "id" not in rec:
            raise GraphValidationError(f"malformed node record {rec!r}")
        nodes.append(rec["id"])
        if rec.get("tier") is not None:
            tier[rec["id"]] = rec["tier"]
    edges = []
    for rec in doc["edges"]:
        if not isinstance(rec, Mapping):
            raise GraphValidationError(f"malformed edge record {rec!r}")
        try:
            edges.append(
                EdgeRecord(
                    id=rec["id"], src=rec["src"], dst=rec["dst"],
                    conf=rec["conf"],
                )
            )
        except KeyError as exc:
            raise GraphValidationError(
                f"edge record {rec!r} missing field {exc}"
            ) from None
    return AttackGraph(nodes, edges, doc["source"], doc["target"], tier)


def is_connected(g: AttackGraph, removed: Iterable[int] = ()) -> bool:
    """True when the target is reachable from the source ignoring removed edges."""
    removed_set = set(removed)
    seen = {g.source}
    queue = deque([g.source])
    while queue:
        node = queue.popleft()
        if node == g.target:
            return True
        for eid, dst in g.out_edges(node):
            if eid in removed_set or dst in seen:
                continue
            seen.add(dst)
            queue.append(dst)
    return g.target in seen


def _hops_to_target(g: AttackGraph, removed: set[int]) -> dict[int, int]:
    """BFS hop distance from every node to the target over surviving edges."""
    dist = {g.target: 0}
    queue = deque([g.target])
    while queue:
        node = queue.popleft()
        d = dist[node]
        for eid, src in g.in_edges(node):
            if eid in removed or src in dist:
                continue
            dist[src] = d + 1
            queue.append(src)
    return dist


class PathCatalog:
    """Immutable set of node-simple source-target paths in canonical order.

    paths[i] is the i-th path as a tuple of edge ids; cover maps each edge
    id to the indices of the paths it lies on.  cover_mask carries the same
    information as bitmasks over path indices for cheap set algebra.
    """

    def __init__(self, paths: Sequence[tuple[int, ...]], hop_cap: int):
        self.paths: tuple[tuple[int, ...], ...] = tuple(tuple(p) for p in paths)
        self.hop_cap = hop_cap
        cover_mask: dict[int, int] = {}
        for i, path in enumerate(self.paths):
            bit = 1 << i
            for eid in path:
                cover_mask[eid] = cover_mask.get(eid, 0) | bit
        self.cover_mask = cover_mask
        self.cover: dict[int, frozenset[int]] = {
            eid: frozenset(_bits(mask)) for eid, mask in cover_mask.items()
        }
        self.all_mask = (1 << len(self.paths)) - 1
        self._index = {p: i for i, p in enumerate(self.paths)}

    def __len__(self) -> int:
        return len(self.paths)

    def index_of(self, path: Sequence[int]) -> Optional[int]:
        return self._index.get(tuple(path))

    def alive_mask(self, removed: Iterable[int]) -> int:
        """Bitmask of paths containing none of the removed edges."""
        dead = 0
        for eid in removed:
            dead |= self.cover_mask.get(eid, 0)
        return self.all_mask & ~dead

    def alive_indices(self, removed: Iterable[int]) -> list[int]:
        return list(_bits(self.alive_mask(removed)))


def _bits(mask: int):
    """Yield set-bit positions of mask in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def enumerate_paths(
    g: AttackGraph,
    hop_cap: Optional[int] = None,
    limit: int = PATH_LIMIT_DEFAULT,
) -> PathCatalog:
    """Enumerate all node-simple source-target paths with at most hop_cap edges.

    hop_cap defaults to the node count, which never truncates (a node-simple
    path has at most n_nodes - 1 edges).  Paths come back sorted by
    (length, edge-id sequence).  Raises EnumerationOverflow once more than
    `limit` paths are found.
    """
    cap = g.n_nodes if hop_cap is None else hop_cap
    if cap < 1:
        raise GraphValidationError(f"hop_cap must be >= 1, got {cap}")

    dist_t = _hops_to_target(g, set())
    found: list[tuple[int, ...]] = []
    if g.source in dist_t:
        # Iterative DFS over (node, edge cursor); descends only while the
        # remaining hop allowance can still reach the target.
        path_edges: list[int] = []
        on_path = {g.source}
        stack: list[tuple[int, int]] = [(g.source, 0)]
        while stack:
            node, cursor = stack[-1]
            out = g.out_edges(node)
            advanced = False
            while cursor < len(out):
                eid, dst = out[cursor]
                cursor += 1
                if dst in on_path:
                    continue
                d = dist_t.get(dst)
                if d is None or len(path_edges) + 1 + d > cap:
                    continue
                stack[-1] = (node, cursor)
                path_edges.append(eid)
                if dst == g.target:
                    found.append(tuple(path_edges))
                    if len(found) > limit:
                        raise EnumerationOverflow(partial_count=limit, limit=limit)
                    path_edges.pop()
                else:
                    on_path.add(dst)
                    stack.append((dst, 0))
                advanced = True
                break
            if not advanced:
                stack.pop()
                if stack:
                    path_edges.pop()
                    on_path.discard(node)
    found.sort(key=lambda p: (len(p), p))
    return PathCatalog(found, hop_cap=cap)


def min_cut(g: AttackGraph, removed: Iterable[int] = ()) -> frozenset[int]:
    """Minimum-cardinality source-target edge cut of the residual graph.

    Unit capacities; parallel edges count individually.  Returns the empty
    set when the residual graph is already disconnected.  Deterministic:
    BFS augmentation visits edges in ascending id order, and the returned
    cut is the canonical reachable-side cut after max flow.
    """
    removed_set = set(removed)
    arcs_to: list[int] = []
    arcs_cap: list[int] = []
    arcs_eid: list[Optional[int]] = []
    adj: dict[int, list[int]] = {n: [] for n in g.nodes}

    def add_arc(u: int, v: int, cap: int, eid: Optional[int]) -> None:
        adj[u].append(len(arcs_to))
        arcs_to.append(v)
        arcs_cap.append(cap)
        arcs_eid.append(eid)

    for e in g.edges:
        if e.id in removed_set:
            continue
        add_arc(e.src, e.dst, 1, e.id)
        add_arc(e.dst, e.src, 0, None)

    def bfs_parent() -> Optional[dict[int, int]]:
        parent: dict[int, int] = {}
        seen = {g.source}
        queue = deque([g.source])
        while queue:
            node = queue.popleft()
            for ai in adj[node]:
                dst = arcs_to[ai]
                if arcs_cap[ai] <= 0 or dst in seen:
                    continue
                parent[dst] = ai
                if dst == g.target:
                    return parent
                seen.add(dst)
                queue.append(dst)
        return None

    while True:
        parent = bfs_parent()
        if parent is None:
            break
        node = g.target
        while node != g.source:
            ai = parent[node]
            arcs_cap[ai] -= 1
            arcs_cap[ai ^ 1] += 1
            node = arcs_to[ai ^ 1]

    reachable = {g.source}
    queue = deque([g.source])
    while queue:
        node = queue.popleft()
        for ai in adj[node]:
            dst = arcs_to[ai]
            if arcs_cap[ai] > 0 and dst not in reachable:
                reachable.add(dst)
                queue.append(dst)
    cut = frozenset(
        e.id
        for e in g.edges
        if e.id not in removed_set
        and e.src in reachable
        and e.dst not in reachable
    )
    return cut


def _paths_of_length(
    g: AttackGraph,
    removed: set[int],
    length: int,
    dist_t: dict[int, int],
) -> list[tuple[int, ...]]:
    """All node-simple paths with exactly `length` edges, lexicographic order."""
    results: list[tuple[int, ...]] = []
    path_edges: list[int] = []
    on_path = {g.source}
    stack: list[tuple[int, int]] = [(g.source, 0)]
    while stack:
        node, cursor = stack[-1]
        out = g.out_edges(node)
        advanced = False
        while cursor < len(out):
            eid, dst = out[cursor]
            cursor += 1
            if eid in removed or dst in on_path:
                continue
            d = dist_t.get(dst)
            if d is None or len(path_edges) + 1 + d > length:
                continue
            if dst == g.target and len(path_edges) + 1 != length:
                continue
            stack[-1] = (node, cursor)
            path_edges.append(eid)
            if dst == g.target:
                results.append(tuple(path_edges))
                path_edges.pop()
            else:
                on_path.add(dst)
                stack.append((dst, 0))
            advanced = True
            break
        if not advanced:
            stack.pop()
            if stack:
                path_edges.pop()
                on_path.discard(node)
    return results


def min_hop_paths(g: AttackGraph, removed: Iterable[int] = ()) -> list[tuple[int, ...]]:
    """All minimum-hop node-simple paths of the residual graph, canonical order."""
    removed_set = set(removed)
    dist_t = _hops_to_target(g, removed_set)
    d0 = dist_t.get(g.source)
    if d0 is None:
        return []
    return _paths_of_length(g, removed_set, d0, dist_t)


def shortest_paths(
    g: AttackGraph, removed: Iterable[int] = (), k: int = 1
) -> list[tuple[int, ...]]:
    """Up to k node-simple paths of the residual graph, shortest lengths first.

    All minimum-hop paths come first in canonical order; when fewer than k
    exist the result is padded with paths of the next lengths until k paths
    are collected or every path length is exhausted.  Disconnected residual
    graphs yield an empty list.
    """
    if k <= 0:
        return []
    removed_set = set(removed)
    dist_t = _hops_to_target(g, removed_set)
    d0 = dist_t.get(g.source)
    if d0 is None:
        return []
    out: list[tuple[int, ...]] = []
    max_len = g.n_nodes - 1
    length = d0
    while len(out) < k and length <= max_len:
        out.extend(_paths_of_length(g, removed_set, length, dist_t))
        length += 1
    return out[:k]
