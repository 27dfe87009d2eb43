"""Shared fixtures: hand-built graphs, a seeded small-graph corpus, and
independent brute-force oracles used to cross-check the library.

The oracles here are deliberately naive re-implementations (recursive path
enumeration, subset-search min cut) so library results are checked against
something that cannot share a bug with the optimized code paths.
"""

import itertools
import random
import re

import pytest

from pathcutter.graph import AttackGraph, EdgeRecord, enumerate_paths

# One human-readable line per acceptance criterion, filled in by
# tests/test_acceptance.py and echoed after the test summary so a plain
# `pytest -v` run always shows the verdict table.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    def key(line):
        m = re.search(r"criterion (\d+)", line)
        return int(m.group(1)) if m else 99
    for line in sorted(ACCEPTANCE_LINES, key=key):
        terminalreporter.write_line(line)


def build_graph(edge_tuples, source, target, nodes=None):
    """Build an AttackGraph from (id, src, dst, conf) tuples."""
    records = [EdgeRecord(id=i, src=s, dst=d, conf=c) for (i, s, d, c) in edge_tuples]
    if nodes is None:
        nodes = {source, target}
        for rec in records:
            nodes.add(rec.src)
            nodes.add(rec.dst)
    return AttackGraph(nodes=nodes, edges=records, source=source, target=target)


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------

def brute_all_paths(g, removed=(), hop_cap=None):
    """All node-simple source->target paths as edge-id tuples, canonically
    ordered (length first, then edge-id sequence)."""
    removed = set(removed)
    out = {}
    for e in g.edges:
        if e.id not in removed:
            out.setdefault(e.src, []).append((e.id, e.dst))
    cap = hop_cap if hop_cap is not None else len(g.nodes)
    found = []

    def walk(node, visited, plan):
        if len(plan) > cap:
            return
        if node == g.target:
            found.append(tuple(plan))
            return
        for eid, dst in out.get(node, []):
            if dst not in visited and len(plan) < cap:
                visited.add(dst)
                plan.append(eid)
                walk(dst, visited, plan)
                plan.pop()
                visited.remove(dst)

    walk(g.source, {g.source}, [])
    return sorted(found, key=lambda p: (len(p), p))


def brute_min_cut_size(g, removed=()):
    """Size of the smallest edge set whose removal disconnects source from
    target, found by exhaustive subset search over the surviving paths."""
    paths = [set(p) for p in brute_all_paths(g, removed)]
    if not paths:
        return 0
    candidates = sorted(set().union(*paths))
    for k in range(1, len(candidates) + 1):
        for combo in itertools.combinations(candidates, k):
            chosen = set(combo)
            if all(path & chosen for path in paths):
                return k
    return len(candidates)


def brute_hitting_sets(g, size):
    """All edge subsets of the given size that hit every s-t path."""
    paths = [set(p) for p in brute_all_paths(g)]
    candidates = sorted(set().union(*paths)) if paths else []
    hits = []
    for combo in itertools.combinations(candidates, size):
        chosen = set(combo)
        if all(path & chosen for path in paths):
            hits.append(frozenset(combo))
    return hits


# ---------------------------------------------------------------------------
# Hand fixtures
# ---------------------------------------------------------------------------

@pytest.fixture
def g_bridge():
    """Two 2-hop paths sharing their final (bridge) edge.

    Paths (canonical order): (1, 2) and (3, 2); edge 2 covers both.
    """
    return build_graph(
        [(1, 0, 1, 1.0), (2, 1, 3, 1.0), (3, 0, 1, 1.0)],
        source=0,
        target=3,
    )


@pytest.fixture
def g_dia():
    """Edge-disjoint diamond: paths (1, 2) and (3, 4), uniform confidence."""
    return build_graph(
        [(1, 0, 1, 0.5), (2, 1, 3, 0.5), (3, 0, 2, 0.5), (4, 2, 3, 0.5)],
        source=0,
        target=3,
    )


@pytest.fixture
def g_dag4():
    """Four-node DAG with asymmetric confidences and a direct edge.

    Edges: 1: s->a (0.8), 2: a->t (0.4), 3: s->b (0.2), 4: b->t (0.6),
    5: s->t (0.5), 6: a->b (0.1).
    Paths (canonical): (5,), (1, 2), (3, 4), (1, 6, 4).
    """
    return build_graph(
        [
            (1, 0, 1, 0.8),
            (2, 1, 3, 0.4),
            (3, 0, 2, 0.2),
            (4, 2, 3, 0.6),
            (5, 0, 3, 0.5),
            (6, 1, 2, 0.1),
        ],
        source=0,
        target=3,
    )


@pytest.fixture
def g_single():
    """One edge from source to target."""
    return build_graph([(7, 0, 1, 0.9)], source=0, target=1)


# ---------------------------------------------------------------------------
# Seeded corpus of small graphs
# ---------------------------------------------------------------------------

def make_small_graph(seed):
    """Deterministic small multigraph: <=6 nodes, <=10 edges, <=12 paths,
    at least one s-t path.  Returns (graph, catalog)."""
    rng = random.Random(seed)
    for attempt in range(64):
        n = rng.randint(3, 6)
        source, target = 0, n - 1
        edges = []
        eid = 1
        # spine guarantees an s-t path
        spine = [source] + sorted(rng.sample(range(1, n - 1), rng.randint(0, n - 2))) + [target]
        for u, v in zip(spine, spine[1:]):
            edges.append((eid, u, v, 1.0 - rng.random()))
            eid += 1
        extra = rng.randint(0, 10 - len(edges))
        for _ in range(extra):
            u = rng.randrange(0, n - 1)
            v = rng.randrange(u + 1, n)
            edges.append((eid, u, v, 1.0 - rng.random()))
            eid += 1
        g = build_graph(edges, source=source, target=target, nodes=range(n))
        catalog = enumerate_paths(g)
        if 1 <= len(catalog.paths) <= 12:
            return g, catalog
        rng = random.Random(seed * 1000 + attempt + 1)
    raise AssertionError(f"no small graph for seed {seed}")


CORPUS_SEEDS = tuple(range(100))


@pytest.fixture(scope="session")
def corpus100():
    return [make_small_graph(seed) for seed in CORPUS_SEEDS]


MC_CORPUS_SEEDS = (0, 1, 2, 3, 5, 8, 13, 21)


@pytest.fixture(scope="session")
def mc_corpus():
    """12 graphs for Monte-Carlo-heavy checks: 4 hand graphs + 8 corpus."""
    hand = [
        build_graph([(1, 0, 1, 1.0), (2, 1, 3, 1.0), (3, 0, 1, 1.0)], 0, 3),
        build_graph(
            [(1, 0, 1, 0.5), (2, 1, 3, 0.5), (3, 0, 2, 0.5), (4, 2, 3, 0.5)], 0, 3
        ),
        build_graph(
            [
                (1, 0, 1, 0.8),
                (2, 1, 3, 0.4),
                (3, 0, 2, 0.2),
                (4, 2, 3, 0.6),
                (5, 0, 3, 0.5),
                (6, 1, 2, 0.1),
            ],
            0,
            3,
        ),
        build_graph([(7, 0, 1, 0.9)], 0, 1),
    ]
    graphs = [(f"hand{i}", g, enumerate_paths(g)) for i, g in enumerate(hand)]
    for seed in MC_CORPUS_SEEDS:
        g, cat = make_small_graph(seed)
        graphs.append((f"corpus{seed}", g, cat))
    return graphs
