import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from dexnet import analytics as an
from dexnet.errors import NotConnectedError, UndefinedMetricError

from conftest import graph_from_pairs, random_graph, tok


# -- oracles -------------------------------------------------------------------

def floyd_warshall(g):
    idx = g.index()
    n = g.n_nodes
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for a, b in g.edges:
        d[idx[a], idx[b]] = d[idx[b], idx[a]] = 1
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def closure_components(g):
    """Components from a boolean reachability matrix (transitive closure)."""
    n = g.n_nodes
    R = np.eye(n, dtype=bool)
    idx = g.index()
    for a, b in g.edges:
        R[idx[a], idx[b]] = R[idx[b], idx[a]] = True
    for _ in range(max(1, math.ceil(math.log2(max(n, 2))))):
        R = (R.astype(int) @ R.astype(int)) > 0
    groups = {frozenset(g.nodes[j] for j in np.flatnonzero(R[i])) for i in range(n)}
    return sorted(groups, key=lambda c: (-len(c), min(c)))


# -- examples ------------------------------------------------------------------

def test_average_degree_path():
    assert an.average_degree(graph_from_pairs([(0, 1), (1, 2)])) == Fraction(4, 3)


def test_average_degree_reference_counts():
    assert round(float(an.average_degree_from_counts(71_547, 76_859)), 3) == 2.148
    assert float(an.average_degree_from_counts(71_547, 76_859)) == pytest.approx(2.15, abs=0.005)
    assert float(an.average_degree_from_counts(2_400, 2_911)) == pytest.approx(2.4258, abs=1e-4)


def test_average_degree_empty():
    with pytest.raises(UndefinedMetricError):
        an.average_degree_from_counts(0, 0)


def test_density_complete_graph():
    k4 = graph_from_pairs(list(itertools.combinations(range(4), 2)))
    assert an.density(k4) == 1


def test_density_reference_counts():
    assert float(an.density_from_counts(71_547, 76_859)) == pytest.approx(3.0e-5, abs=5e-7)
    assert float(an.density_from_counts(2_400, 2_911)) == pytest.approx(1.0e-3, abs=2e-5)
    with pytest.raises(UndefinedMetricError):
        an.density_from_counts(1, 0)


def test_two_triangles_components():
    g = graph_from_pairs([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    cd = an.connected_components(g)
    assert cd.sizes == [3, 3]
    assert cd.giant == {tok(0), tok(1), tok(2)}  # tie -> smallest address first


def test_path_is_one_component():
    assert len(an.connected_components(graph_from_pairs([(0, 1), (1, 2), (2, 3)]))) == 1


def test_diameter_examples():
    assert an.diameter(graph_from_pairs([(0, 1), (1, 2), (2, 3)])) == 3
    cycle = graph_from_pairs([(i, (i + 1) % 6) for i in range(6)])
    assert an.diameter(cycle) == 3
    with pytest.raises(NotConnectedError):
        an.diameter(graph_from_pairs([(0, 1), (2, 3)]))


def test_degree_distribution_examples(star, triangle):
    assert an.degree_distribution(star).counts == {1: 4, 4: 1}
    assert an.degree_distribution(triangle).counts == {2: 3}


def test_degree_distribution_preferential_attachment_tail():
    from dexnet.synth import SynthParams, generate_stream
    from dexnet.ingest import resolve_edge_events
    from dexnet.graph import build_graph
    from dexnet.core import segment_blocks, BlockRange

    reg, recs = generate_stream(SynthParams(n_tokens=3000, n_transfers=30_000, p_hub=0.0,
                                            block_range=BlockRange(0, 999), seed=3))
    events, _ = resolve_edge_events(recs, reg)
    g = build_graph(events, segment_blocks(BlockRange(0, 999), 1), 0)
    hist = an.degree_distribution(g)
    # direct recount
    recount = {}
    for n in g.nodes:
        d = len(g.adjacency[n])
        recount[d] = recount.get(d, 0) + 1
    assert hist.counts == recount
    # heavy tail: counts fall over the head of the distribution
    head = [hist.counts.get(d, 0) for d in (1, 2, 3, 4)]
    assert head == sorted(head, reverse=True)
    assert max(hist.counts) > 30


def test_small_world_reference_numbers():
    uni = an.SmallWorldReport.from_counts(71_547, 7)
    assert uni.ln_n == pytest.approx(11.178, abs=1e-3)
    assert uni.ratio == pytest.approx(0.63, abs=0.01)
    sushi = an.SmallWorldReport.from_counts(2_400, 5)
    assert sushi.ln_n == pytest.approx(7.783, abs=1e-3)
    assert sushi.ratio == pytest.approx(0.64, abs=0.01)


def test_small_world_two_nodes():
    rep = an.small_world_report(graph_from_pairs([(0, 1)]))
    assert rep.diameter_of_giant == 1
    assert rep.ln_n == pytest.approx(0.693, abs=1e-3)


def test_small_world_uses_giant_component():
    g = graph_from_pairs([(0, 1), (1, 2), (2, 3), (10, 11)])
    rep = an.small_world_report(g)
    assert rep.n == 6 and rep.giant_size == 4 and rep.diameter_of_giant == 3


def test_ratio_series_examples():
    g = graph_from_pairs([(i, i + 1) for i in range(9)] + [(0, 5), (2, 7), (3, 9)])
    assert (g.n_nodes, g.n_edges) == (10, 12)
    rs = an.ratio_series([g])
    assert rs.values[0][1] == Fraction(6, 5) and rs.variance == 0
    empty = graph_from_pairs([])
    rs = an.ratio_series([g, empty, g])
    assert rs.variance == 0 and rs.n_empty == 1 and rs.mean == Fraction(6, 5)
    with pytest.raises(UndefinedMetricError):
        an.ratio_series([empty])


def test_ratio_series_hand_computed():
    # slices with (|V|, |E|) = (5, 6), (4, 5), (3, 3), (6, 7) -> ratios 1.2, 1.25, 1, 7/6
    slices = [
        graph_from_pairs([(0, 1), (1, 2), (2, 3), (3, 4), (0, 2), (1, 3)]),
        graph_from_pairs([(0, 1), (1, 2), (2, 3), (0, 2), (1, 3)]),
        graph_from_pairs([(0, 1), (1, 2), (0, 2)]),
        graph_from_pairs([(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2), (3, 5)]),
    ]
    rs = an.ratio_series(slices)
    vals = [1.2, 1.25, 1.0, 7 / 6]
    mean = sum(vals) / 4
    var = sum((v - mean) ** 2 for v in vals) / 4
    assert float(rs.mean) == pytest.approx(mean, abs=1e-12)
    assert float(rs.variance) == pytest.approx(var, abs=1e-12)


# -- properties against oracles ------------------------------------------------

@pytest.mark.parametrize("seed", range(60))
def test_metrics_match_oracles(seed):
    g = random_graph(seed)
    n, m = g.n_nodes, g.n_edges
    assert an.average_degree(g) * n == 2 * m
    assert 0 <= an.density(g) <= 1
    cd = an.connected_components(g)
    assert sum(cd.sizes) == n
    assert list(cd.components) == closure_components(g)
    hist = an.degree_distribution(g)
    assert hist.n_nodes == n and hist.degree_sum == 2 * m
    giant = an.giant_component(g)
    if giant.n_nodes >= 2:
        d = an.diameter(giant)
        assert d == int(floyd_warshall(giant).max())
        assert d <= giant.n_nodes - 1
        assert d == max(an.eccentricities(giant).values())


@pytest.mark.parametrize("seed", range(10))
def test_sampled_diameter_is_lower_bound(seed):
    g = random_graph(seed, connected=True)
    assert an.diameter(g, sample=3, seed=seed) <= an.diameter(g)
