"""
Is the degree distribution a power law?
=======================================

Log both sides of f(x) ~ x^-k and fit a line by OLS; the t-test on the
slope says whether any linear relation exists at all.
"""

from dexnet.analytics import degree_distribution
from dexnet.core import segment_blocks
from dexnet.graph import build_graph
from dexnet.ingest import resolve_edge_events
from dexnet.statfit import loglog_points, ols_fit
from dexnet.synth import STUDY_RANGE, SynthParams, generate_stream

registry, records = generate_stream(SynthParams(seed=2))  # 10,000 tokens
events, _ = resolve_edge_events(records, registry)
g = build_graph(events, segment_blocks(STUDY_RANGE, 100), 0, weighted=False)
hist = degree_distribution(g)
print(f"{g.n_nodes} tokens, degrees 1..{max(hist.counts)}")

plain = ols_fit(loglog_points(hist))
print(f"plain histogram : slope {plain.slope:.3f}, r2 {plain.r_squared:.3f}, "
      f"p {plain.p_value:.2e} over {plain.n_points} points")

# The sparse tail (many degrees seen once) flattens the plain fit.
# Geometric bins average it out and track the exponent more closely.
binned = ols_fit(loglog_points(hist, log_bins=5))
print(f"log-binned      : slope {binned.slope:.3f}, r2 {binned.r_squared:.3f}, "
      f"p {binned.p_value:.2e} over {binned.n_points} points")
