"""Louvain community detection on weighted token graphs."""

from __future__ import annotations

import heapq
import random
from collections import defaultdict
from collections.abc import Mapping
from dataclasses import dataclass

from .core import TokenId
from .errors import InvalidAssignmentError
from .graph import TokenGraph

__all__ = ["CommunityAssignment", "louvain", "modularity"]

# moves must beat staying put by more than this; stops float round-off ping-pong
_MIN_GAIN = 1e-12
_REFRESH_MAX_DEGREE = 64


@dataclass(frozen=True)
class CommunityAssignment:
    labels: dict[TokenId, int]
    n_communities: int
    modularity: float
    seed: int | None
    resolution: float = 1.0

    def __getitem__(self, token):
        return self.labels[token]

    def communities(self) -> list[list[TokenId]]:
        out = [[] for _ in range(self.n_communities)]
        for tok in sorted(self.labels):
            out[self.labels[tok]].append(tok)
        return out


def modularity(g: TokenGraph, assignment: CommunityAssignment | Mapping[TokenId, int],
               resolution: float = 1.0) -> float:
    """Weighted Newman modularity.

    ``Q = sum_c [ w_in(c)/W - resolution * (w_tot(c) / 2W)^2 ]`` where ``W``
    is the total edge weight, ``w_in`` the weight inside ``c`` and ``w_tot``
    the summed weighted degree of ``c``. An edgeless graph scores 0.
    """
    labels = assignment.labels if isinstance(assignment, CommunityAssignment) else assignment
    missing = [n for n in g.nodes if n not in labels]
    if missing:
        raise InvalidAssignmentError(f"{len(missing)} node(s) unlabeled, e.g. {missing[0].address}")
    total = g.total_weight()
    if total == 0:
        return 0.0
    w_in: dict[int, float] = defaultdict(float)
    w_tot: dict[int, float] = defaultdict(float)
    for (a, b), w in g.edges.items():
        ca, cb = labels[a], labels[b]
        if ca == cb:
            w_in[ca] += w
        w_tot[ca] += w
        w_tot[cb] += w
    two_w = 2.0 * total
    return sum(w_in[c] / total - resolution * (w_tot[c] / two_w) ** 2 for c in w_tot)


def _one_level(adj, loops, resolution, rng, start=None):
    """Local moving phase from ``start`` (default: singletons).

    Returns (community per node, moved?). Besides neighbouring communities a
    node may also leave for a fresh community of its own, which matters when
    starting from a coarse partition.
    """
    n = len(adj)
    m = sum(loops) + sum(sum(nb.values()) for nb in adj) / 2.0
    degree = [sum(adj[i].values()) + 2.0 * loops[i] for i in range(n)]
    comm = list(range(n)) if start is None else list(start)
    stot: dict[int, float] = defaultdict(float)
    for u in range(n):
        stot[comm[u]] += degree[u]
    fresh = max(comm, default=-1) + 1
    order = list(range(n))
    rng.shuffle(order)
    moved_any = False
    while True:
        moves = 0
        for u in order:
            here = comm[u]
            k = degree[u]
            w2c: dict[int, float] = defaultdict(float)
            for v, w in adj[u].items():
                w2c[comm[v]] += w
            stot[here] -= k
            remove = -w2c.get(here, 0.0) / m + resolution * stot[here] * k / (2.0 * m * m)
            best, best_gain = here, 0.0
            for c, w in w2c.items():
                if c == here:
                    continue
                gain = remove + w / m - resolution * stot[c] * k / (2.0 * m * m)
                if gain > best_gain + _MIN_GAIN:
                    best, best_gain = c, gain
            if stot[here] > 0 and remove > best_gain + _MIN_GAIN:
                best, fresh = fresh, fresh + 1
            stot[best] += k
            if best != here:
                comm[u] = best
                moves += 1
        if not moves:
            break
        moved_any = True
    return comm, moved_any


def _levels(adj, loops, member, resolution, rng):
    """Repeated local moving and aggregation; ``member`` maps original nodes."""
    while True:
        comm, moved = _one_level(adj, loops, resolution, rng)
        if not moved:
            return member
        adj, loops, comm = _aggregate(adj, loops, comm)
        member = [comm[c] for c in member]


def _aggregate(adj, loops, comm):
    labels = {c: i for i, c in enumerate(dict.fromkeys(comm))}
    n = len(labels)
    new_adj = [defaultdict(float) for _ in range(n)]
    new_loops = [0.0] * n
    for u, nbrs in enumerate(adj):
        cu = labels[comm[u]]
        new_loops[cu] += loops[u]
        for v, w in nbrs.items():
            cv = labels[comm[v]]
            if cu == cv:
                new_loops[cu] += w / 2.0  # each internal edge is seen from both ends
            else:
                new_adj[cu][cv] += w
    return [dict(a) for a in new_adj], new_loops, [labels[c] for c in comm]


def _quality(adj, member, resolution):
    total = sum(sum(nb.values()) for nb in adj) / 2.0
    w_in: dict[int, float] = defaultdict(float)
    w_tot: dict[int, float] = defaultdict(float)
    for u, nbrs in enumerate(adj):
        for v, w in nbrs.items():
            w_tot[member[u]] += w
            if member[u] == member[v]:
                w_in[member[u]] += w / 2.0
    return sum(w_in[c] / total - resolution * (w_tot[c] / (2.0 * total)) ** 2 for c in w_tot)


def _kl_pass(adj, member, resolution, rng):
    """One Kernighan-Lin style sweep over single-node moves.

    Every node is moved exactly once, always taking the best available
    move (even a losing one), and the sweep is rolled back to its best
    prefix. Losing moves let the sweep walk through a dip that greedy local
    moving cannot cross, e.g. two nodes that must swap communities together.
    The best move is found with a lazily re-evaluated max-heap.
    Returns (partition, modularity gain).
    """
    n = len(adj)
    m = sum(sum(nb.values()) for nb in adj) / 2.0
    two_m2 = 2.0 * m * m
    degree = [sum(nb.values()) for nb in adj]
    comm = list(member)
    stot: dict[int, float] = defaultdict(float)
    for u in range(n):
        stot[comm[u]] += degree[u]
    fresh = max(comm) + 1

    def best_move(u):
        here, k = comm[u], degree[u]
        w2c: dict[int, float] = defaultdict(float)
        for v, w in adj[u].items():
            w2c[comm[v]] += w
        rest = stot[here] - k
        remove = -w2c.get(here, 0.0) / m + resolution * rest * k / two_m2
        target, gain = None, -float("inf")
        for c, w in w2c.items():
            if c != here:
                g = remove + w / m - resolution * stot[c] * k / two_m2
                if g > gain:
                    target, gain = c, g
        if rest > 0 and remove > gain:
            target, gain = -1, remove  # -1: a new community of its own
        return target, gain

    order = list(range(n))
    rng.shuffle(order)
    rank = {u: i for i, u in enumerate(order)}
    heap = []
    for u in order:
        target, gain = best_move(u)
        if target is not None:
            heap.append((-gain, rank[u], u))
    heapq.heapify(heap)
    locked = [False] * n
    requeued = [False] * n
    history, total, best_total, best_len = [], 0.0, 0.0, 0
    while heap:
        _, r, u = heapq.heappop(heap)
        if locked[u]:
            continue
        target, gain = best_move(u)
        if target is None:
            locked[u] = True
            continue
        if not requeued[u] and heap and gain < -heap[0][0] - _MIN_GAIN:
            # no longer the best; requeue once (near-equal gains would otherwise churn)
            requeued[u] = True
            heapq.heappush(heap, (-gain, r, u))
            continue
        if target == -1:
            target, fresh = fresh, fresh + 1
        history.append((u, comm[u]))
        stot[comm[u]] -= degree[u]
        comm[u] = target
        stot[target] += degree[u]
        locked[u] = True
        total += gain
        if total > best_total + _MIN_GAIN:
            best_total, best_len = total, len(history)
        for v in adj[u]:
            # refresh neighbours whose gains just changed; hubs stay lazy,
            # re-scoring one after each of its many neighbours moves is quadratic
            if not locked[v] and len(adj[v]) <= _REFRESH_MAX_DEGREE:
                t, g = best_move(v)
                if t is not None:
                    requeued[v] = False
                    heapq.heappush(heap, (-g, rank[v], v))
    for u, c in reversed(history[best_len:]):
        comm[u] = c
    return comm, best_total


def _louvain_run(adj, resolution, rng, refine):
    loops = [0.0] * len(adj)
    member = _levels(adj, loops, list(range(len(adj))), resolution, rng)
    if not refine:
        return member, _quality(adj, member, resolution)
    best_q = _quality(adj, member, resolution)
    # alternate node-level sweeps with renewed aggregation while Q improves
    while True:
        moved, _ = _kl_pass(adj, member, resolution, rng)
        sub_adj, sub_loops, comm = _aggregate(adj, loops, moved)
        coarse = _levels(sub_adj, sub_loops, list(range(len(sub_adj))), resolution, rng)
        candidate = [coarse[c] for c in comm]
        q = _quality(adj, candidate, resolution)
        if q <= best_q + _MIN_GAIN:
            return member, best_q
        member, best_q = candidate, q


def louvain(g: TokenGraph, resolution: float = 1.0, seed: int = 0, *,
            restarts: int = 5, refine: bool = True) -> CommunityAssignment:
    """Two-phase Louvain: local moving, then aggregation, until a pass moves nothing.

    Node visiting order is shuffled with ``random.Random(seed)``, so a fixed
    seed gives identical output. With ``refine`` each result is polished by
    Kernighan-Lin sweeps alternating with renewed aggregation, and the best
    of ``restarts`` independently shuffled runs is kept. ``restarts=1,
    refine=False`` is the plain algorithm. Labels are renumbered ``0..c-1``
    in order of each community's smallest token address.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    nodes = g.nodes
    index = g.index()
    adj = [dict() for _ in nodes]
    for (a, b), w in g.edges.items():
        adj[index[a]][index[b]] = float(w)
        adj[index[b]][index[a]] = float(w)
    member = list(range(len(nodes)))
    rng = random.Random(seed)

    if g.edges:
        best_q = -float("inf")
        for _ in range(restarts):
            run_rng = random.Random(rng.getrandbits(64))
            cand, q = _louvain_run(adj, resolution, run_rng, refine)
            if q > best_q + _MIN_GAIN:
                member, best_q = cand, q

    dense: dict[int, int] = {}
    labels = {}
    for i, tok in enumerate(nodes):  # nodes are address-ordered
        labels[tok] = dense.setdefault(member[i], len(dense))
    q = modularity(g, labels, resolution)
    return CommunityAssignment(labels, len(dense), q, seed, resolution)
