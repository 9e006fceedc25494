"""Structural metrics on token graphs.

All metrics use the unweighted structure (edge presence); edge weights are
ignored here. Exact quantities are returned as :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
import random
import statistics
from collections import Counter, deque
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import NotConnectedError, UndefinedMetricError
from .graph import TokenGraph
from .core import TokenId

__all__ = [
    "ComponentDecomposition", "DegreeHistogram", "RatioSeries", "SmallWorldReport",
    "average_degree", "average_degree_from_counts", "density", "density_from_counts",
    "connected_components", "giant_component", "diameter", "eccentricities",
    "degree_distribution", "small_world_report", "ratio_series",
]


def average_degree_from_counts(n_nodes: int, n_edges: int) -> Fraction:
    if n_nodes < 1:
        raise UndefinedMetricError("average degree undefined for an empty graph")
    return Fraction(2 * n_edges, n_nodes)


def density_from_counts(n_nodes: int, n_edges: int) -> Fraction:
    """``|E| / C(|V|, 2)``."""
    if n_nodes < 2:
        raise UndefinedMetricError("density needs at least two nodes")
    return Fraction(n_edges, math.comb(n_nodes, 2))


def average_degree(g: TokenGraph) -> Fraction:
    return average_degree_from_counts(g.n_nodes, g.n_edges)


def density(g: TokenGraph) -> Fraction:
    return density_from_counts(g.n_nodes, g.n_edges)


@dataclass(frozen=True)
class ComponentDecomposition:
    """Connected components, largest first (ties: smallest member address)."""

    components: tuple[frozenset[TokenId], ...]

    @property
    def giant(self) -> frozenset[TokenId]:
        return self.components[0] if self.components else frozenset()

    @property
    def sizes(self) -> list[int]:
        return [len(c) for c in self.components]

    def __len__(self):
        return len(self.components)


def connected_components(g: TokenGraph) -> ComponentDecomposition:
    seen: set[TokenId] = set()
    comps = []
    adj = g.adjacency
    for start in g.nodes:
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        queue = deque([start])
        while queue:
            for nbr in adj[queue.popleft()]:
                if nbr not in seen:
                    seen.add(nbr)
                    comp.append(nbr)
                    queue.append(nbr)
        comps.append(frozenset(comp))
    # g.nodes is address-ordered, so each component's first-visited node is its minimum
    comps.sort(key=lambda c: (-len(c), min(c)))
    return ComponentDecomposition(tuple(comps))


def giant_component(g: TokenGraph) -> TokenGraph:
    return g.subgraph(connected_components(g).giant)


def _bfs_distances(csr, sources, chunk=256):
    for i in range(0, len(sources), chunk):
        yield shortest_path(csr, directed=False, unweighted=True, indices=sources[i:i + chunk])


def eccentricities(g: TokenGraph) -> dict[TokenId, int]:
    """Eccentricity of every node by BFS from each (connected graphs only)."""
    csr = g.to_sparse(weighted=False)
    out = {}
    src = np.arange(g.n_nodes)
    pos = 0
    for dist in _bfs_distances(csr, src):
        if np.isinf(dist).any():
            raise NotConnectedError("graph is not connected")
        for row in dist.max(axis=1):
            out[g.nodes[pos]] = int(row)
            pos += 1
    return out


def diameter(g: TokenGraph, *, sample: int | None = None, seed: int = 0) -> int:
    """Exact diameter of a connected graph.

    Uses the iterative fringe upper bound scheme: one BFS from the highest
    degree node, then BFS from its fringe levels, outermost first, until
    the lower bound meets the upper bound. Result is identical to BFS from
    every node.

    With ``sample=k`` only ``k`` random sources (plus one double sweep) are
    used and the returned value is a lower bound.
    """
    n = g.n_nodes
    if n == 0:
        raise UndefinedMetricError("diameter of an empty graph")
    if n == 1:
        return 0
    csr = g.to_sparse(weighted=False)

    def ecc_many(sources):
        best = 0
        for dist in _bfs_distances(csr, np.asarray(sources)):
            if np.isinf(dist).any():
                raise NotConnectedError("graph is not connected")
            best = max(best, int(dist.max()))
        return best

    degrees = np.diff(csr.indptr)
    hub = int(np.argmax(degrees))
    dist_u = shortest_path(csr, directed=False, unweighted=True, indices=hub)
    if np.isinf(dist_u).any():
        raise NotConnectedError("graph is not connected")
    dist_u = dist_u.astype(np.int64)
    ecc_u = int(dist_u.max())

    if sample is not None:
        rng = random.Random(seed)
        far = int(np.argmax(dist_u))
        sources = [far] + rng.sample(range(n), min(sample, n))
        return max(ecc_u, ecc_many(sources))

    lower, upper, level = ecc_u, 2 * ecc_u, ecc_u
    while upper > lower:
        fringe = np.flatnonzero(dist_u == level)
        b = ecc_many(fringe)
        if max(lower, b) > 2 * (level - 1):
            return max(lower, b)
        lower = max(lower, b)
        upper = 2 * (level - 1)
        level -= 1
    return lower


@dataclass(frozen=True)
class DegreeHistogram:
    """Degree -> number of nodes with that degree (no zero counts stored)."""

    counts: dict[int, int]

    @property
    def n_nodes(self) -> int:
        return sum(self.counts.values())

    @property
    def degree_sum(self) -> int:
        return sum(d * c for d, c in self.counts.items())

    def items(self):
        return self.counts.items()

    def __len__(self):
        return len(self.counts)


def degree_distribution(g: TokenGraph) -> DegreeHistogram:
    """Histogram of unweighted degrees.

    Isolated nodes (only possible after degree filtering) land under degree 0.
    """
    c = Counter(len(nbrs) for nbrs in g.adjacency.values())
    return DegreeHistogram(dict(sorted(c.items())))


@dataclass(frozen=True)
class SmallWorldReport:
    n: int
    giant_size: int
    diameter_of_giant: int
    ln_n: float
    ratio: float

    @classmethod
    def from_counts(cls, n: int, diam: int, giant_size: int | None = None):
        ln_n = math.log(n)
        return cls(n, n if giant_size is None else giant_size, diam, ln_n, diam / ln_n)


def small_world_report(g: TokenGraph, **diameter_kw) -> SmallWorldReport:
    """Diameter of the giant component against ``ln |V|``.

    No threshold is applied; the ratio is reported as-is.
    """
    giant = giant_component(g)
    if giant.n_nodes < 2:
        raise UndefinedMetricError("giant component has fewer than two nodes")
    return SmallWorldReport.from_counts(g.n_nodes, diameter(giant, **diameter_kw),
                                        giant.n_nodes)


@dataclass(frozen=True)
class RatioSeries:
    """Per-slice ``|E|/|V|`` with mean and population variance over nonempty slices."""

    values: tuple[tuple[int, Fraction], ...]  # (slice, ratio)
    mean: Fraction
    variance: Fraction
    n_empty: int


def ratio_series(series: Sequence[TokenGraph]) -> RatioSeries:
    values = tuple((g.slice, Fraction(g.n_edges, g.n_nodes)) for g in series if g.n_nodes)
    if not values:
        raise UndefinedMetricError("every slice is empty")
    vals = [v for _, v in values]
    return RatioSeries(values, statistics.mean(vals), statistics.pvariance(vals),
                       len(series) - len(values))
