"""Eigenvector centrality, rankings, per-slice series and spike detection."""

from __future__ import annotations

import logging
import math
import warnings
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .core import WHOLE_RANGE, Platform, TokenId
from .errors import EmptySeriesError, UndefinedMetricError
from .graph import TokenGraph

log = logging.getLogger(__name__)

__all__ = [
    "CentralityVector", "CentralityTimeSeries", "AnomalyFlag", "ConvergenceWarning",
    "eigenvector_centrality", "top_k", "series_centralities", "centrality_time_series",
    "detect_anomalies", "merge_series",
]


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CentralityVector:
    platform: Platform
    slice: int
    scores: dict[TokenId, float]
    iterations: int
    converged: bool
    eigenvalue: float

    def __getitem__(self, token):
        return self.scores[token]

    def __contains__(self, token):
        return token in self.scores

    def __len__(self):
        return len(self.scores)

    def get(self, token, default=None):
        return self.scores.get(token, default)

    def as_array(self, nodes: Sequence[TokenId]) -> np.ndarray:
        return np.array([self.scores[n] for n in nodes])


def _matvec(A, x):
    # exactly rounded row sums: the result does not depend on node order,
    # so relabeling tokens permutes the scores bit for bit
    prod = A.data * x[A.indices]
    ptr = A.indptr
    return np.array([math.fsum(prod[ptr[i]:ptr[i + 1]]) for i in range(A.shape[0])])


def _dot(a, b):
    return math.fsum(a * b)


def _power_iteration(A, tol, max_iter):
    A = A.tocsr()
    n = A.shape[0]
    x = np.full(n, 1.0 / math.sqrt(n))
    for it in range(1, max_iter + 1):
        # Iterate on A + s*I with s half the current Rayleigh quotient. Same
        # eigenvectors, but a bipartite graph's -lambda no longer ties the
        # dominant eigenvalue, and s scales with the weights.
        ax = _matvec(A, x)
        y = ax + 0.5 * _dot(x, ax) * x
        norm = math.sqrt(_dot(y, y))
        if norm == 0:  # no edges
            return x, it, True
        y /= norm
        change = np.abs(y - x).max()
        x = y
        if change < tol:
            return x, it, True
    return x, max_iter, False


def eigenvector_centrality(g: TokenGraph, tol: float = 1e-10, max_iter: int = 1000, *,
                           per_component: bool = False) -> CentralityVector:
    """Dominant eigenvector of the weighted adjacency matrix by power iteration.

    Starts from a uniform positive vector, renormalizes to unit Euclidean
    length each step, and stops once no coordinate moves by ``tol`` or more.
    Edge weights are transfer counts (all 1 on unweighted graphs). The
    returned scores have unit L2 norm.

    On a disconnected graph the whole-graph iteration concentrates on the
    component with the largest eigenvalue. With ``per_component=True`` each
    component is solved separately, scaled by its own eigenvalue, and the
    concatenation renormalized.

    Non-convergence is reported through ``converged=False`` and a
    :class:`ConvergenceWarning`.
    """
    n = g.n_nodes
    if n == 0:
        raise UndefinedMetricError("centrality of an empty graph")
    A = g.to_sparse()

    if per_component:
        from scipy.sparse.csgraph import connected_components as cc
        n_comp, labels = cc(A, directed=False)
        x = np.zeros(n)
        iters, ok = 0, True
        for c in range(n_comp):
            idx = np.flatnonzero(labels == c)
            sub = A[idx][:, idx]
            v, it, conv = _power_iteration(sub, tol, max_iter)
            lam = _dot(v, _matvec(sub.tocsr(), v))
            x[idx] = v * max(lam, np.finfo(float).tiny)
            iters, ok = max(iters, it), ok and conv
        x /= math.sqrt(_dot(x, x))
    else:
        x, iters, ok = _power_iteration(A, tol, max_iter)

    if not ok:
        msg = (f"eigenvector centrality did not converge in {max_iter} iterations "
               f"({g.platform} t_{g.slice})")
        log.warning(msg)
        warnings.warn(msg, ConvergenceWarning, stacklevel=2)
    x = np.clip(x, 0.0, None)
    x /= math.sqrt(_dot(x, x))
    lam = _dot(x, _matvec(A.tocsr(), x))
    return CentralityVector(g.platform, g.slice, dict(zip(g.nodes, x.tolist())),
                            iters, ok, lam)


def top_k(cv: CentralityVector, k: int) -> list[tuple[TokenId, float]]:
    """Highest-scoring tokens; ties broken by address ascending."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(cv.scores.items(), key=lambda kv: (-kv[1], kv[0].address))
    return ranked[:k]


def series_centralities(series: Sequence[TokenGraph], **kw) -> list[CentralityVector | None]:
    """Centrality of every nonempty slice graph (``None`` for empty ones)."""
    return [eigenvector_centrality(g, **kw) if g.n_nodes else None for g in series]


@dataclass(frozen=True)
class CentralityTimeSeries:
    """A token's per-slice centrality, raw and divided by its mean over present slices."""

    token: TokenId
    slices: tuple[int, ...]
    raw: dict[int, float]
    normalized: dict[int, float]

    @property
    def mean(self) -> float:
        return float(np.mean(list(self.raw.values())))


def centrality_time_series(series: Sequence[TokenGraph], token: TokenId, *,
                           centralities: Sequence[CentralityVector | None] | None = None,
                           **kw) -> CentralityTimeSeries:
    if centralities is None:
        centralities = [eigenvector_centrality(g, **kw) if token in g else None for g in series]
    raw = {g.slice: cv[token] for g, cv in zip(series, centralities)
           if cv is not None and token in cv}
    if not raw:
        raise EmptySeriesError(f"{token.label} is absent from every slice")
    mean = float(np.mean(list(raw.values())))
    normalized = {s: (v / mean if mean > 0 else 0.0) for s, v in raw.items()}
    return CentralityTimeSeries(token, tuple(g.slice for g in series), raw, normalized)


@dataclass(frozen=True)
class AnomalyFlag:
    token: TokenId
    slice: int
    normalized: float
    raw: float
    threshold: float
    global_rank: int  # 1-based rank in the whole-range graph


def merge_series(series: Sequence[TokenGraph]) -> TokenGraph:
    """Whole-range graph recombined from slice graphs by summing edge weights."""
    if not series:
        raise EmptySeriesError("no slice graphs")
    total: Counter = Counter()
    for g in series:
        total.update(g.edges)
    first = series[0]
    return TokenGraph.from_edges(total, platform=first.platform, slice=WHOLE_RANGE,
                                 weighted=first.weighted)


def detect_anomalies(series: Sequence[TokenGraph], threshold: float = 5.0,
                     min_slices: int = 5, exclude_global_top: int = 5, *,
                     global_graph: TokenGraph | None = None,
                     centralities: Sequence[CentralityVector | None] | None = None,
                     **kw) -> list[AnomalyFlag]:
    """Flag slices where a token's normalized centrality exceeds ``threshold``.

    Only tokens present in at least ``min_slices`` slices are considered,
    and the ``exclude_global_top`` most central tokens of the whole-range
    graph are skipped (hubs such as WETH are central in every slice).
    """
    if threshold <= 1:
        raise ValueError("threshold must be > 1")
    if global_graph is None:
        global_graph = merge_series(series)
    if centralities is None:
        centralities = series_centralities(series, **kw)
    if global_graph.n_nodes == 0:
        return []
    ranking = top_k(eigenvector_centrality(global_graph, **kw), global_graph.n_nodes)
    rank_of = {tok: i for i, (tok, _) in enumerate(ranking, start=1)}
    excluded = {tok for tok, _ in ranking[:exclude_global_top]} if exclude_global_top else set()

    present: dict[TokenId, dict[int, float]] = {}
    for g, cv in zip(series, centralities):
        if cv is None:
            continue
        for tok, score in cv.scores.items():
            present.setdefault(tok, {})[g.slice] = score

    flags = []
    for tok, raw in present.items():
        if tok in excluded or len(raw) < min_slices:
            continue
        mean = float(np.mean(list(raw.values())))
        if mean <= 0:
            continue
        for s, v in raw.items():
            z = v / mean
            if z > threshold:
                flags.append(AnomalyFlag(tok, s, z, v, threshold, rank_of.get(tok, 0)))
    flags.sort(key=lambda f: (-f.normalized, f.slice, f.token.address))
    return flags
