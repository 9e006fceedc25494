"""On-disk graph bundle shared by the CLI commands.

A bundle holds per-slice transfer counts for one platform, so any slice
graph (and the whole-range graph, by summation) can be rebuilt without the
raw transfer files. JSON, gzip-compressed when the path ends in ``.gz``::

    {"format": "dexnet-graph", "version": 1, "platform": "uniswap",
     "weighted": true, "range": [start, end], "boundaries": [...],
     "symbols": {"0x..": "WETH"},
     "slices": {"1": [["0xa..", "0xb..", 3], ...], ...}}
"""

from __future__ import annotations

import gzip
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .core import WHOLE_RANGE, BlockRange, Platform, TimeSegmentation, TokenId
from .errors import DexnetError
from .graph import TokenGraph, edge_counts_by_slice

FORMAT = "dexnet-graph"
VERSION = 1


@dataclass
class GraphBundle:
    platform: Platform
    segmentation: TimeSegmentation
    weighted: bool
    slice_counts: dict[int, Counter]
    symbols: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_events(cls, events, seg: TimeSegmentation, platform, weighted=True) -> GraphBundle:
        events = list(events)
        platform = Platform(platform)
        counts = edge_counts_by_slice(events, seg, platform)
        symbols = {}
        for ev in events:
            for tok in ev.pair:
                if tok.symbol:
                    symbols[tok.address] = tok.symbol
        return cls(platform, seg, weighted, counts, symbols)

    def _token(self, address):
        return TokenId(address, self.symbols.get(address))

    def graph(self, slice: int = WHOLE_RANGE, weighted: bool | None = None) -> TokenGraph:
        weighted = self.weighted if weighted is None else weighted
        if slice == WHOLE_RANGE:
            counts = Counter()
            for c in self.slice_counts.values():
                counts.update(c)
        else:
            self.segmentation.bounds(slice)  # validates the index
            counts = self.slice_counts.get(slice, Counter())
        return TokenGraph.from_edges(counts, platform=self.platform, slice=slice,
                                     weighted=weighted)

    def series(self, weighted: bool | None = None) -> list[TokenGraph]:
        return [self.graph(i, weighted) for i in self.segmentation.indices]

    def to_dict(self) -> dict:
        seg = self.segmentation
        slices = {}
        for i in seg.indices:
            c = self.slice_counts.get(i, Counter())
            slices[str(i)] = [[a.address, b.address, w] for (a, b), w in sorted(c.items())]
        return {
            "format": FORMAT,
            "version": VERSION,
            "platform": str(self.platform),
            "weighted": self.weighted,
            "range": [seg.range.start, seg.range.end],
            "boundaries": list(seg.boundaries),
            "symbols": dict(sorted(self.symbols.items())),
            "slices": slices,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> GraphBundle:
        if doc.get("format") != FORMAT:
            raise DexnetError("not a dexnet graph bundle")
        if doc.get("version") != VERSION:
            raise DexnetError(f"unsupported bundle version {doc.get('version')}")
        rng = BlockRange(*doc["range"])
        bounds = tuple(doc["boundaries"])
        seg = TimeSegmentation(rng, len(bounds) - 1, bounds)
        symbols = doc.get("symbols", {})
        bundle = cls(Platform(doc["platform"]), seg, bool(doc["weighted"]), {}, symbols)
        for key, rows in doc["slices"].items():
            bundle.slice_counts[int(key)] = Counter(
                {(bundle._token(a), bundle._token(b)): int(w) for a, b, w in rows})
        return bundle


def save_bundle(bundle: GraphBundle, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(bundle.to_dict(), separators=(",", ":"))
    if path.suffix == ".gz":
        # no name or mtime in the header keeps the compressed bytes reproducible
        with open(path, "wb") as raw, \
                gzip.GzipFile(filename="", fileobj=raw, mode="wb", mtime=0) as fh:
            fh.write(text.encode())
    else:
        path.write_text(text, encoding="utf-8")
    return path


def load_bundle(path) -> GraphBundle:
    path = Path(path)
    try:
        if path.suffix == ".gz":
            with gzip.open(path, "rt", encoding="utf-8") as fh:
                doc = json.load(fh)
        else:
            doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError, gzip.BadGzipFile) as exc:
        raise DexnetError(f"{path}: unreadable graph bundle ({exc})") from exc
    return GraphBundle.from_dict(doc)
