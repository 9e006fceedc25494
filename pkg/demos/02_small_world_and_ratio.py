"""
Connectivity, diameter and the edge/node ratio
==============================================
"""

from dexnet import analytics as an
from dexnet.core import segment_blocks
from dexnet.graph import build_graph, slice_series
from dexnet.ingest import resolve_edge_events
from dexnet.synth import STUDY_RANGE, SynthParams, generate_stream

registry, records = generate_stream(SynthParams(n_tokens=3000, n_transfers=30_000, seed=1))
events, _ = resolve_edge_events(records, registry)
seg = segment_blocks(STUDY_RANGE, 100)
g = build_graph(events, seg, 0, weighted=False)

print("average degree:", float(an.average_degree(g)))
print("density:       ", float(an.density(g)))

comps = an.connected_components(g)
print(f"{len(comps)} components, giant has {len(comps.giant)} of {g.n_nodes} tokens")

sw = an.small_world_report(g)
print(f"diameter of giant {sw.diameter_of_giant}, ln n = {sw.ln_n:.2f}, ratio {sw.ratio:.2f}")

# Structural stability: |E|/|V| per slice. Empty slices are skipped.
rs = an.ratio_series(slice_series(events, seg))
print(f"ratio mean {float(rs.mean):.4f}, population variance {float(rs.variance):.2e}")

# The same formulas applied to the full-scale reference counts
for name, n, m, d in (("uniswap", 71_547, 76_859, 7), ("sushiswap", 2_400, 2_911, 5)):
    rep = an.SmallWorldReport.from_counts(n, d)
    print(f"{name:9s} density {float(an.density_from_counts(n, m)):.1e}  "
          f"avg degree {float(an.average_degree_from_counts(n, m)):.3f}  "
          f"diameter/ln n {rep.ratio:.2f}")
