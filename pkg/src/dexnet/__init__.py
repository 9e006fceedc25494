"""Token networks from DEX pool activity: construction, metrics, centrality."""

__version__ = "0.1.0"
