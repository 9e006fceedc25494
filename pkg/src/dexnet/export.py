"""GraphML and CSV writers.

Every writer is byte-deterministic for identical inputs: rows and nodes
are address-ordered and floats are written with ``repr`` (shortest
round-tripping decimal).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import xml.etree.ElementTree as ET
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analytics import DegreeHistogram, RatioSeries
from .centrality import AnomalyFlag, CentralityTimeSeries, CentralityVector
from .communities import CommunityAssignment
from .core import TokenId
from .errors import AttributeMismatchError
from .graph import TokenGraph
from .statfit import PowerLawFit

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"
_XSI = "http://www.w3.org/2001/XMLSchema-instance"
_SCHEMA = GRAPHML_NS + " http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd"

CSV_COLUMNS = {
    "metrics.csv": ["platform", "slice", "metric", "value"],
    "rankings.csv": ["platform", "slice", "rank", "address", "symbol", "score"],
    "ratio_series.csv": ["slice", "ratio"],
    "centrality_series.csv": ["address", "symbol", "slice", "raw", "normalized"],
    "anomalies.csv": ["address", "symbol", "slice", "normalized", "raw", "threshold",
                      "global_rank"],
    "powerlaw.csv": ["platform", "slice", "slope", "intercept", "r_squared", "stderr",
                     "t_statistic", "degrees_of_freedom", "p_value", "n_points"],
    "degree_histogram.csv": ["platform", "slice", "degree", "count"],
    "communities.csv": ["address", "symbol", "community"],
}


def fmt(value) -> str:
    """Full-precision text form of a number for CSV output."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, Fraction):
        value = float(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _scores(attr, g, name):
    if attr is None:
        return None
    if isinstance(attr, CentralityVector):
        attr = attr.scores
    elif isinstance(attr, CommunityAssignment):
        attr = attr.labels
    extra = [t for t in attr if t not in g]
    if extra:
        raise AttributeMismatchError(
            f"{name} covers {len(extra)} token(s) absent from the graph, e.g. {extra[0].address}")
    missing = [t for t in g.nodes if t not in attr]
    if missing:
        raise AttributeMismatchError(
            f"{name} is missing {len(missing)} graph token(s), e.g. {missing[0].address}")
    return attr


def to_graphml(g: TokenGraph, centrality: CentralityVector | Mapping | None = None,
               communities: CommunityAssignment | Mapping | None = None) -> str:
    """Undirected GraphML document keyed by token address.

    Nodes carry ``symbol`` (and optionally ``centrality`` / ``community``);
    edges carry a ``weight`` typed ``int`` for transfer counts and
    ``double`` if any weight is fractional.
    """
    cent = _scores(centrality, g, "centrality")
    comm = _scores(communities, g, "communities")

    root = ET.Element("graphml", {"xmlns": GRAPHML_NS, "xmlns:xsi": _XSI,
                                  "xsi:schemaLocation": _SCHEMA})
    integral = all(float(w).is_integer() for w in g.edges.values())
    keys = [("d0", "node", "symbol", "string"),
            ("d1", "edge", "weight", "int" if integral else "double")]
    if cent is not None:
        keys.append(("d2", "node", "centrality", "double"))
    if comm is not None:
        keys.append(("d3", "node", "community", "int"))
    for kid, domain, name, typ in keys:
        ET.SubElement(root, "key", {"id": kid, "for": domain, "attr.name": name,
                                    "attr.type": typ})
    graph = ET.SubElement(root, "graph", {
        "id": f"{g.platform}_t{g.slice}", "edgedefault": "undirected"})
    for tok in g.nodes:
        node = ET.SubElement(graph, "node", {"id": tok.address})
        ET.SubElement(node, "data", {"key": "d0"}).text = tok.symbol or ""
        if cent is not None:
            ET.SubElement(node, "data", {"key": "d2"}).text = repr(float(cent[tok]))
        if comm is not None:
            ET.SubElement(node, "data", {"key": "d3"}).text = str(int(comm[tok]))
    for i, ((a, b), w) in enumerate(g.edges.items()):
        edge = ET.SubElement(graph, "edge", {"id": f"e{i}", "source": a.address,
                                             "target": b.address})
        ET.SubElement(edge, "data", {"key": "d1"}).text = (
            str(int(w)) if integral else repr(float(w)))
    ET.indent(root)
    body = ET.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


def write_graphml(path, g, centrality=None, communities=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_graphml(g, centrality, communities), encoding="utf-8")
    return path


@dataclass
class AnalysisReport:
    """Metrics for one (platform, slice) plus what is needed to reproduce them."""

    platform: str
    slice: int | str
    metrics: dict[str, object] = field(default_factory=dict)
    metadata: dict[str, object] = field(default_factory=dict)

    def rows(self):
        for name, value in self.metrics.items():
            yield [str(self.platform), str(self.slice), name, fmt(value)]


@dataclass
class ReportSet:
    """Results to serialize; ``None`` fields produce no file."""

    metrics: list[AnalysisReport] | None = None
    rankings: list[tuple[str, int, list[tuple[TokenId, float]]]] | None = None
    ratio_series: RatioSeries | None = None
    centrality_series: list[tuple[CentralityTimeSeries, Iterable[int]]] | None = None
    anomalies: list[AnomalyFlag] | None = None
    powerlaw: list[tuple[str, int, PowerLawFit]] | None = None
    degree_histogram: list[tuple[str, int, DegreeHistogram]] | None = None
    communities: CommunityAssignment | None = None


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _tok(t: TokenId):
    return [t.address, t.symbol or ""]


def csv_documents(results: ReportSet) -> dict[str, str]:
    """Render each populated field of ``results`` to CSV text, keyed by file name."""
    docs = {}
    if results.metrics is not None:
        docs["metrics.csv"] = _csv_text(CSV_COLUMNS["metrics.csv"],
                                        (r for rep in results.metrics for r in rep.rows()))
    if results.rankings is not None:
        rows = []
        for platform, sl, ranked in results.rankings:
            for rank, (tok, score) in enumerate(ranked, start=1):
                rows.append([platform, sl, rank, *_tok(tok), fmt(score)])
        docs["rankings.csv"] = _csv_text(CSV_COLUMNS["rankings.csv"], rows)
    if results.ratio_series is not None:
        docs["ratio_series.csv"] = _csv_text(
            CSV_COLUMNS["ratio_series.csv"],
            ([s, fmt(v)] for s, v in results.ratio_series.values))
    if results.centrality_series is not None:
        rows = []
        for ts, slices in results.centrality_series:
            for s in slices:
                rows.append([*_tok(ts.token), s, fmt(ts.raw.get(s)), fmt(ts.normalized.get(s))])
        docs["centrality_series.csv"] = _csv_text(CSV_COLUMNS["centrality_series.csv"], rows)
    if results.anomalies is not None:
        docs["anomalies.csv"] = _csv_text(CSV_COLUMNS["anomalies.csv"], (
            [*_tok(f.token), f.slice, fmt(f.normalized), fmt(f.raw), fmt(f.threshold),
             f.global_rank] for f in results.anomalies))
    if results.powerlaw is not None:
        cols = CSV_COLUMNS["powerlaw.csv"][2:]
        docs["powerlaw.csv"] = _csv_text(CSV_COLUMNS["powerlaw.csv"], (
            [platform, sl, *(fmt(getattr(fit, c)) for c in cols)]
            for platform, sl, fit in results.powerlaw))
    if results.degree_histogram is not None:
        docs["degree_histogram.csv"] = _csv_text(CSV_COLUMNS["degree_histogram.csv"], (
            [platform, sl, d, c] for platform, sl, hist in results.degree_histogram
            for d, c in sorted(hist.items())))
    if results.communities is not None:
        ca = results.communities
        docs["communities.csv"] = _csv_text(CSV_COLUMNS["communities.csv"], (
            [*_tok(t), ca.labels[t]] for t in sorted(ca.labels)))
    return docs


def to_csv_reports(results: ReportSet, out_dir) -> list[Path]:
    """Write one CSV per populated field of ``results`` into ``out_dir``."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in csv_documents(results).items():
            path = out_dir / name
            path.write_text(text, encoding="utf-8", newline="")
            written.append(path)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write reports: {exc.strerror}",
                      exc.filename or str(out_dir)) from exc
    return written


def powerlaw_json(platform: str, slice, fit: PowerLawFit) -> str:
    doc = {"platform": platform, "slice": slice, **fit.to_dict()}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, command: str, parameters: dict, inputs: Iterable = (),
                   outputs: Iterable = ()) -> Path:
    """Record parameters and input digests next to a run's outputs."""
    path = Path(path)
    doc = {
        "tool": "dexnet",
        "version": __version__,
        "command": command,
        "parameters": {k: (str(v) if isinstance(v, Path) else v)
                       for k, v in sorted(parameters.items()) if not callable(v)},
        "inputs": {str(p): file_digest(p) for p in inputs},
        "outputs": sorted(str(p) for p in outputs),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, default=str) + "\n", encoding="utf-8")
    return path
