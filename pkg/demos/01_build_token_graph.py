"""
Building token graphs from a transfer stream
============================================

A synthetic Uniswap-like stream stands in for chain data. Pools map
transfers to token pairs; the block range is cut into slices and each
slice becomes its own undirected graph.
"""

from dexnet.core import segment_blocks
from dexnet.graph import build_graph, slice_series
from dexnet.ingest import resolve_edge_events
from dexnet.synth import STUDY_RANGE, SynthParams, generate_stream

# 3,000 tokens, 30,000 transfers over the same block span as the study
registry, records = generate_stream(SynthParams(n_tokens=3000, n_transfers=30_000, seed=1))
events, skipped = resolve_edge_events(records, registry)
print(f"{len(registry)} pools, {len(records)} transfers, {skipped} unresolved")

seg = segment_blocks(STUDY_RANGE, 100)
print("slice widths:", seg.widths()[0], "...", seg.widths()[-1])  # remainder lands in t_100

# t_0 is the whole range; weights count transfers per token pair
g0 = build_graph(events, seg, 0, weighted=True)
heaviest = max(g0.edges.items(), key=lambda kv: kv[1])
(a, b), w = heaviest
print(f"t_0: {g0.n_nodes} tokens, {g0.n_edges} pairs; busiest pair {a.label}/{b.label} ({w} transfers)")

# the unweighted view keeps only which pairs traded at all
u0 = g0.unweighted()
print("unweighted total weight:", u0.total_weight(), "== edges:", u0.n_edges)

series = slice_series(events, seg)
sizes = [g.n_nodes for g in series]
print(f"slice sizes: min {min(sizes)}, max {max(sizes)}")
