import hashlib

import pytest

from dexnet.core import BlockRange, segment_blocks
from dexnet.graph import build_graph
from dexnet.ingest import load_pool_registry, load_transfers, resolve_edge_events
from dexnet.statfit import powerlaw_fit
from dexnet.synth import STUDY_RANGE, SynthParams, generate_stream, write_stream

SMALL = SynthParams(n_tokens=500, n_transfers=4000, block_range=BlockRange(0, 9999), seed=5)


def whole_graph(params, weighted=False):
    reg, recs = generate_stream(params)
    events, skipped = resolve_edge_events(recs, reg)
    assert skipped == 0
    return build_graph(events, segment_blocks(params.block_range, 1), 0, weighted=weighted)


def test_p_hub_one_gives_a_star():
    reg, recs = generate_stream(SynthParams(n_tokens=3, n_transfers=20, p_hub=1.0))
    hub = [p for p in reg.pools.values()]
    assert len(hub) == 2
    assert all("WETH" in (p.token0.symbol, p.token1.symbol) for p in hub)
    big = whole_graph(SynthParams(n_tokens=300, n_transfers=5000, p_hub=1.0))
    centre = max(big.nodes, key=big.degree)
    assert big.n_edges == big.n_nodes - 1 == big.degree(centre)


def test_same_seed_is_byte_identical(tmp_path):
    digests = []
    for run in ("a", "b"):
        paths = write_stream(*generate_stream(SMALL), tmp_path / run / "s")
        digests.append([hashlib.sha256(p.read_bytes()).hexdigest() for p in paths])
    assert digests[0] == digests[1]
    other = write_stream(*generate_stream(SynthParams(**{**SMALL.__dict__, "seed": 6})),
                         tmp_path / "c" / "s")
    assert hashlib.sha256(other[1].read_bytes()).hexdigest() != digests[0][1]


def test_registry_and_stream_invariants():
    reg, recs = generate_stream(SMALL)
    assert all(p.token0 != p.token1 for p in reg.pools.values())
    assert len({p.pair for p in reg.pools.values()}) == len(reg)
    assert all(r.pool in reg for r in recs)
    assert len(recs) == SMALL.n_transfers
    assert all(r.block in SMALL.block_range for r in recs)
    assert [r.block for r in recs] == sorted(r.block for r in recs)


def test_round_trip_through_ingest(tmp_path):
    reg, recs = generate_stream(SMALL)
    pools_path, transfers_path = write_stream(reg, recs, tmp_path / "synth")
    reg2, plog = load_pool_registry(pools_path)
    recs2, tlog = load_transfers(transfers_path, SMALL.block_range)
    assert plog.ok and tlog.ok
    assert reg2.pools == reg.pools
    assert recs2 == recs


@pytest.mark.parametrize("bad", [dict(n_tokens=1), dict(n_transfers=0), dict(p_hub=1.5),
                                 dict(extra_pool_rate=-0.1)])
def test_invalid_params(bad):
    with pytest.raises(ValueError):
        SynthParams(**bad)


def test_hub_dominates_centrality():
    from dexnet.centrality import eigenvector_centrality, top_k
    # structurally; on the weighted graph the oldest (busiest) pool's other
    # token can rival it
    g = whole_graph(SMALL, weighted=False)
    assert top_k(eigenvector_centrality(g), 1)[0][0].symbol == "WETH"


@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_default_stream_degree_distribution_is_power_law(seed):
    g = whole_graph(SynthParams(seed=seed, block_range=STUDY_RANGE))
    fit = powerlaw_fit(g)
    assert fit.slope < 0
    assert fit.p_value < 0.01
