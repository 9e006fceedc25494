import itertools
import random

import numpy as np
import pytest

from dexnet.core import Platform, TokenId
from dexnet.graph import TokenGraph


def tok(i, symbol=None):
    """Deterministic token whose address order follows ``i``."""
    return TokenId(f"0x{i + 1:040x}", symbol)


def graph_from_pairs(pairs, weighted=True, platform=Platform.UNISWAP, slice=0):
    """Graph from ``(i, j)`` or ``(i, j, w)`` tuples over :func:`tok` ids."""
    edges = {}
    for p in pairs:
        i, j, w = (*p, 1) if len(p) == 2 else p
        key = (tok(i), tok(j))
        edges[key] = edges.get(key, 0) + w
    return TokenGraph.from_edges(edges, platform=platform, slice=slice, weighted=weighted)


def random_pairs(rng, n, p, max_weight=1, connected=False):
    pairs = [(i, j, rng.randint(1, max_weight))
             for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
    if connected:
        # random spanning tree guarantees connectivity
        order = list(range(n))
        rng.shuffle(order)
        have = {(min(i, j), max(i, j)) for i, j, _ in pairs}
        for k in range(1, n):
            a, b = order[k], order[rng.randrange(k)]
            if (min(a, b), max(a, b)) not in have:
                pairs.append((a, b, rng.randint(1, max_weight)))
                have.add((min(a, b), max(a, b)))
    return pairs


def random_graph(seed, n_max=64, weighted=False, connected=False, max_weight=1):
    rng = random.Random(seed)
    n = rng.randint(2, n_max)
    p = rng.choice([0.02, 0.05, 0.1, 0.2, 0.5])
    pairs = random_pairs(rng, n, p, max_weight, connected)
    if not pairs:
        pairs = [(0, 1, 1)]
    return graph_from_pairs(pairs, weighted=weighted)


def dense_adjacency(g, weighted=True):
    idx = g.index()
    A = np.zeros((g.n_nodes, g.n_nodes))
    for (a, b), w in g.edges.items():
        A[idx[a], idx[b]] = A[idx[b], idx[a]] = w if weighted else 1
    return A


@pytest.fixture
def star():
    # centre 0, leaves 1..4
    return graph_from_pairs([(0, k) for k in range(1, 5)], weighted=False)


@pytest.fixture
def triangle():
    return graph_from_pairs([(0, 1), (1, 2), (0, 2)], weighted=False)


def anomaly_events(n_slices=20, spike_slice=8, spike=10, token=11, n_leaves=10):
    """Hub 0 with leaves 1..n_leaves trading steadily, plus one quiet token
    whose transfer count with the hub jumps ``spike``-fold in one slice.

    Returns ``(events, segmentation)``; blocks are 100 per slice.
    """
    from dexnet.core import BlockRange, segment_blocks
    from dexnet.ingest import EdgeEvent

    seg = segment_blocks(BlockRange(0, 100 * n_slices - 1), n_slices)
    events = []
    for s in range(1, n_slices + 1):
        start = seg.bounds(s)[0]
        for leaf in range(1, n_leaves + 1):
            events += [EdgeEvent(start + k, tok(0), tok(leaf), Platform.UNISWAP) for k in range(20)]
            # leaves also trade among themselves so the graph is not a pure star
            nxt = leaf % n_leaves + 1
            events += [EdgeEvent(start + 30 + k, tok(leaf), tok(nxt), Platform.UNISWAP)
                       for k in range(5)]
        count = spike if s == spike_slice else 1
        events += [EdgeEvent(start + 50 + k, tok(0), tok(token), Platform.UNISWAP)
                   for k in range(count)]
    return events, seg


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
