"""
Louvain communities
===================
"""

from collections import Counter

from dexnet.communities import louvain, modularity
from dexnet.core import segment_blocks
from dexnet.graph import build_graph
from dexnet.ingest import resolve_edge_events
from dexnet.synth import STUDY_RANGE, SynthParams, generate_stream

registry, records = generate_stream(SynthParams(n_tokens=3000, n_transfers=30_000, seed=1))
events, _ = resolve_edge_events(records, registry)
g = build_graph(events, segment_blocks(STUDY_RANGE, 100), 0)

ca = louvain(g, seed=0)
print(f"{ca.n_communities} communities, modularity {ca.modularity:.4f}")
sizes = Counter(ca.labels.values())
print("largest:", sorted(sizes.values(), reverse=True)[:8])

# plain single-run Louvain for comparison
plain = louvain(g, seed=0, restarts=1, refine=False)
print(f"plain Louvain: {plain.n_communities} communities, modularity {plain.modularity:.4f}")

# baseline partitions
print("everything together:", modularity(g, {t: 0 for t in g.nodes}))
