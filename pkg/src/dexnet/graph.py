"""Token graphs built from resolved edge events."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .core import WHOLE_RANGE, Platform, TimeSegmentation, TokenId
from .ingest import EdgeEvent

__all__ = ["TokenGraph", "build_graph", "filter_min_degree", "slice_series",
           "edge_counts_by_slice"]


@dataclass(frozen=True, eq=False)
class TokenGraph:
    """Undirected, loop-free token graph tagged with its platform and slice.

    ``edges`` maps canonical pairs ``(a, b)`` with ``a < b`` to a positive
    integer weight (transfer count; always 1 when ``weighted`` is False).
    Build instances with :meth:`from_edges` rather than directly.
    """

    platform: Platform
    slice: int
    weighted: bool
    nodes: tuple[TokenId, ...]
    edges: Mapping[tuple[TokenId, TokenId], int]
    adjacency: Mapping[TokenId, Mapping[TokenId, int]] = field(repr=False)

    @classmethod
    def from_edges(cls, edges: Mapping[tuple[TokenId, TokenId], float], *, platform,
                   slice: int = WHOLE_RANGE, weighted: bool = True,
                   nodes: Iterable[TokenId] = ()) -> TokenGraph:
        """Canonicalize ``edges`` and derive node set and adjacency.

        ``nodes`` may add isolated nodes; this only happens through degree
        filtering, since graphs built from events have no isolated nodes.
        """
        canon: dict[tuple[TokenId, TokenId], int] = {}
        for (a, b), w in edges.items():
            if a == b:
                raise ValueError(f"self-loop on {a.address}")
            if w <= 0:
                raise ValueError("edge weights must be positive")
            key = (a, b) if a < b else (b, a)
            canon[key] = canon.get(key, 0) + (w if weighted else 1)
        if not weighted:
            canon = dict.fromkeys(canon, 1)
        adj: dict[TokenId, dict[TokenId, int]] = {n: {} for n in nodes}
        for (a, b), w in canon.items():
            adj.setdefault(a, {})[b] = w
            adj.setdefault(b, {})[a] = w
        ordered = tuple(sorted(adj))
        canon = {k: canon[k] for k in sorted(canon)}
        return cls(Platform(platform), slice, weighted, ordered, canon, adj)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, token):
        return token in self.adjacency

    def degree(self, token: TokenId) -> int:
        return len(self.adjacency[token])

    def weighted_degree(self, token: TokenId) -> int:
        return sum(self.adjacency[token].values())

    def weight(self, a: TokenId, b: TokenId) -> int:
        return self.adjacency.get(a, {}).get(b, 0)

    def neighbors(self, token: TokenId) -> Mapping[TokenId, int]:
        return self.adjacency[token]

    def total_weight(self) -> int:
        return sum(self.edges.values())

    def unweighted(self) -> TokenGraph:
        if not self.weighted:
            return self
        return TokenGraph.from_edges(self.edges, platform=self.platform, slice=self.slice,
                                     weighted=False, nodes=self.nodes)

    def subgraph(self, keep: Iterable[TokenId]) -> TokenGraph:
        keep = set(keep) & set(self.adjacency)
        edges = {k: w for k, w in self.edges.items() if k[0] in keep and k[1] in keep}
        return TokenGraph.from_edges(edges, platform=self.platform, slice=self.slice,
                                     weighted=self.weighted, nodes=keep)

    def index(self) -> dict[TokenId, int]:
        """Position of each node in :attr:`nodes` (address-ascending)."""
        return {n: i for i, n in enumerate(self.nodes)}

    def to_sparse(self, weighted: bool | None = None) -> sp.csr_matrix:
        """Symmetric adjacency matrix in node order.

        ``weighted=None`` uses the graph's own weights; False yields 0/1.
        """
        n = len(self.nodes)
        if not self.edges:
            return sp.csr_matrix((n, n), dtype=float)
        idx = self.index()
        rows = np.fromiter((idx[a] for a, _ in self.edges), dtype=np.int64, count=len(self.edges))
        cols = np.fromiter((idx[b] for _, b in self.edges), dtype=np.int64, count=len(self.edges))
        if weighted is False:
            vals = np.ones(len(self.edges))
        else:
            vals = np.fromiter(self.edges.values(), dtype=float, count=len(self.edges))
        m = sp.coo_matrix((np.concatenate([vals, vals]),
                           (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                          shape=(n, n))
        return m.tocsr()

    def symbols(self) -> dict[TokenId, str]:
        return {n: n.symbol for n in self.nodes if n.symbol}


def edge_counts_by_slice(events: Iterable[EdgeEvent], seg: TimeSegmentation,
                         platform=None) -> dict[int, Counter]:
    """Transfer counts per canonical pair for every slice ``1..n``.

    Events outside the segmentation's range are ignored.
    """
    platform = Platform(platform) if platform is not None else None
    out = {i: Counter() for i in seg.indices}
    lo, hi = seg.range.start, seg.range.end
    for ev in events:
        if platform is not None and ev.platform != platform:
            continue
        if lo <= ev.block <= hi:
            out[seg.slice_of(ev.block)][ev.pair] += 1
    return out


def build_graph(events: Iterable[EdgeEvent], seg: TimeSegmentation, slice: int = WHOLE_RANGE,
                platform=Platform.UNISWAP, weighted: bool = True) -> TokenGraph:
    """Token graph for one slice (``0`` = whole range).

    Events on other platforms are ignored. Distinct pools on the same token
    pair collapse into one edge whose weight is their summed transfer count.
    """
    platform = Platform(platform)
    lo, hi = seg.bounds(slice)
    counts: Counter = Counter()
    for ev in events:
        if ev.platform == platform and lo <= ev.block < hi:
            counts[ev.pair] += 1
    return TokenGraph.from_edges(counts, platform=platform, slice=slice, weighted=weighted)


def slice_series(events: Iterable[EdgeEvent], seg: TimeSegmentation,
                 platform=Platform.UNISWAP, weighted: bool = True) -> list[TokenGraph]:
    """One graph per slice ``t_1..t_n``; empty slices yield empty graphs."""
    per_slice = edge_counts_by_slice(events, seg, platform)
    return [TokenGraph.from_edges(per_slice[i], platform=platform, slice=i, weighted=weighted)
            for i in seg.indices]


def filter_min_degree(g: TokenGraph, d: int) -> TokenGraph:
    """Keep nodes whose degree in ``g`` is at least ``d``.

    Single pass: survivors may end up below ``d`` (or isolated) once their
    dropped neighbours are gone; they are kept regardless.
    """
    if d < 1:
        raise ValueError("minimum degree must be >= 1")
    keep = [n for n, nbrs in g.adjacency.items() if len(nbrs) >= d]
    return g.subgraph(keep)
