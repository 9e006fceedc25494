"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
non-convergence (outputs are still written).
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

from . import __version__
from .analytics import (average_degree, connected_components, degree_distribution, density,
                        ratio_series, small_world_report)
from .centrality import (ConvergenceWarning, centrality_time_series,
                         detect_anomalies, eigenvector_centrality, series_centralities, top_k)
from .communities import louvain
from .core import WHOLE_RANGE, BlockRange, Platform, TokenId, segment_blocks
from .errors import DexnetError, UndefinedMetricError
from .export import (AnalysisReport, ReportSet, csv_documents, powerlaw_json, to_csv_reports,
                     write_graphml, write_manifest)
from .graph import filter_min_degree
from .ingest import load_pool_registry, load_transfers, resolve_edge_events
from .statfit import loglog_points, ols_fit
from .store import GraphBundle, load_bundle, save_bundle
from .synth import STUDY_RANGE, SynthParams, generate_stream, write_stream

log = logging.getLogger("dexnet.cli")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONCONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _slice_arg(text):
    if text == "all":
        return "all"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a slice index or 'all', got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("slice index must be >= 0")
    return value


def _manifest_for_file(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def _token_from(bundle: GraphBundle, text: str) -> TokenId:
    tok = TokenId(text)
    return TokenId(tok.address, bundle.symbols.get(tok.address))


# -- commands ------------------------------------------------------------------------------

def cmd_fetch_pools(args):
    from .rpc import fetch_pool_registry

    registry = fetch_pool_registry(args.rpc, args.factory, args.platform,
                                   batch_size=args.batch_size, parallelism=args.parallelism)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        for line in registry.to_lines():
            fh.write(line + "\n")
    write_manifest(_manifest_for_file(out), "fetch-pools", vars(args), outputs=[out])
    print(f"{len(registry)} pool(s) written to {out}")
    return EXIT_OK


def cmd_synth(args):
    rng = BlockRange.parse(args.range) if args.range else STUDY_RANGE
    params = SynthParams(n_tokens=args.tokens, n_transfers=args.transfers, seed=args.seed,
                         p_hub=args.p_hub, attachment_exponent=args.attachment_exponent,
                         zipf_exponent=args.zipf_exponent, block_range=rng,
                         platform=Platform(args.platform))
    registry, records = generate_stream(params)
    pools, transfers = write_stream(registry, records, args.out_prefix)
    write_manifest(Path(str(args.out_prefix) + ".manifest.json"), "synth", vars(args),
                   outputs=[pools, transfers])
    print(f"{len(registry)} pool(s) -> {pools}\n{len(records)} transfer(s) -> {transfers}")
    return EXIT_OK


def cmd_build(args):
    rng = BlockRange.parse(args.range)
    seg = segment_blocks(rng, args.slices)
    registry, plog = load_pool_registry(args.pools, max_errors=args.max_errors)
    records, tlog = load_transfers(args.transfers, rng, max_errors=args.max_errors)
    for err in (plog.errors + tlog.errors)[:20]:
        log.warning("%s", err)
    events, skipped = resolve_edge_events(records, registry)
    bundle = GraphBundle.from_events(events, seg, args.platform, weighted=args.weighted)
    out = save_bundle(bundle, args.out)
    g0 = bundle.graph(WHOLE_RANGE)
    write_manifest(_manifest_for_file(out), "build", {
        **vars(args), "pool_errors": len(plog.errors), "transfer_errors": len(tlog.errors),
        "duplicate_pools": plog.duplicates, "rejected_pools": plog.rejected,
        "dropped_out_of_range": tlog.dropped_out_of_range, "unknown_pool_skips": skipped,
    }, inputs=[args.pools, args.transfers], outputs=[out])
    print(f"t_0: {g0.n_nodes} node(s), {g0.n_edges} edge(s); {len(events)} event(s), "
          f"{skipped} skipped; {len(plog.errors) + len(tlog.errors)} parse error(s)")
    return EXIT_OK


def _slices(bundle, choice):
    if choice == "all":  # whole range first, then every slice
        return [WHOLE_RANGE, *bundle.segmentation.indices]
    if choice != WHOLE_RANGE and choice > bundle.segmentation.n_segments:
        raise UsageError(f"slice {choice} outside 0..{bundle.segmentation.n_segments}")
    return [choice]


def _analysis_report(g, diameter_sample):
    metrics = {"n_nodes": g.n_nodes, "n_edges": g.n_edges}
    if g.n_nodes >= 1:
        metrics["average_degree"] = average_degree(g)
    if g.n_nodes >= 2:
        metrics["density"] = density(g)
    comps = connected_components(g)
    metrics["n_components"] = len(comps)
    metrics["giant_size"] = len(comps.giant)
    try:
        sw = small_world_report(g, sample=diameter_sample)
        metrics.update(diameter_of_giant=sw.diameter_of_giant, ln_n=sw.ln_n,
                       small_world_ratio=sw.ratio)
        if diameter_sample is not None:
            metrics["diameter_is_lower_bound"] = True
    except UndefinedMetricError:
        pass
    return AnalysisReport(str(g.platform), g.slice, metrics)


def cmd_analyze(args):
    bundle = load_bundle(args.graph)
    reports, hists = [], []
    for s in _slices(bundle, args.slice):
        g = bundle.graph(s, weighted=False)
        reports.append(_analysis_report(g, args.diameter_sample))
        hists.append((str(g.platform), s, degree_distribution(g)))
    results = ReportSet(metrics=reports, degree_histogram=hists)
    if args.slice == "all":
        try:
            rs = ratio_series(bundle.series())
        except UndefinedMetricError:
            rs = None
        if rs is not None:
            results.ratio_series = rs
            reports.append(AnalysisReport(str(bundle.platform), "all", {
                "ratio_mean": rs.mean, "ratio_variance_population": rs.variance,
                "ratio_empty_slices": rs.n_empty}))
    written = to_csv_reports(results, args.out_dir)
    write_manifest(Path(args.out_dir) / "manifest.json", "analyze", vars(args),
                   inputs=[args.graph], outputs=written)
    for rep in reports:
        print(f"t_{rep.slice}: " + ", ".join(f"{k}={float(v):.6g}" if not isinstance(v, bool)
                                             else f"{k}={v}" for k, v in rep.metrics.items()))
    return EXIT_OK


def cmd_centrality(args):
    bundle = load_bundle(args.graph)
    kw = {"tol": args.tol, "max_iter": args.max_iter}
    rankings, converged = [], True
    for s in _slices(bundle, args.slice):
        g = bundle.graph(s)
        if g.n_nodes == 0:
            continue
        cv = eigenvector_centrality(g, **kw)
        converged &= cv.converged
        rankings.append((str(g.platform), s, top_k(cv, args.top)))
    results = ReportSet(rankings=rankings)
    if args.token:
        tok = _token_from(bundle, args.token)
        series = bundle.series()
        ts = centrality_time_series(series, tok, **kw)
        results.centrality_series = [(ts, list(bundle.segmentation.indices))]
    written = to_csv_reports(results, args.out_dir)
    write_manifest(Path(args.out_dir) / "manifest.json", "centrality", vars(args),
                   inputs=[args.graph], outputs=written)
    for platform, s, ranked in rankings[:1] if args.slice == "all" else rankings:
        print(f"{platform} t_{s}: " + ", ".join(f"{t.label}={v:.3f}" for t, v in ranked))
    return EXIT_OK if converged else EXIT_NONCONVERGED


def cmd_anomalies(args):
    bundle = load_bundle(args.graph)
    series = bundle.series()
    kw = {"tol": args.tol, "max_iter": args.max_iter}
    cvs = series_centralities(series, **kw)
    flags = detect_anomalies(series, args.threshold, args.min_slices, args.exclude_top,
                             global_graph=bundle.graph(WHOLE_RANGE), centralities=cvs, **kw)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(csv_documents(ReportSet(anomalies=flags))["anomalies.csv"], encoding="utf-8")
    write_manifest(_manifest_for_file(out), "anomalies", vars(args), inputs=[args.graph],
                   outputs=[out])
    for f in flags[:10]:
        print(f"{f.token.label} t_{f.slice}: normalized {f.normalized:.2f}")
    print(f"{len(flags)} flag(s) written to {out}")
    ok = all(cv.converged for cv in cvs if cv is not None)
    return EXIT_OK if ok else EXIT_NONCONVERGED


def cmd_powerlaw(args):
    bundle = load_bundle(args.graph)
    g = bundle.graph(args.slice, weighted=False)
    points = loglog_points(degree_distribution(g), xmin=args.xmin, xmax=args.xmax,
                           log_bins=args.log_bins, min_bin_count=args.min_bin_count)
    fit = ols_fit(points)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix == ".json":
        out.write_text(powerlaw_json(str(g.platform), args.slice, fit), encoding="utf-8")
    else:
        out.write_text(csv_documents(ReportSet(powerlaw=[(str(g.platform), args.slice, fit)]))
                       ["powerlaw.csv"], encoding="utf-8")
    write_manifest(_manifest_for_file(out), "powerlaw", vars(args), inputs=[args.graph],
                   outputs=[out])
    print(f"slope={fit.slope:.4f} intercept={fit.intercept:.4f} r2={fit.r_squared:.4f} "
          f"p={fit.p_value:.3g} (n={fit.n_points})")
    return EXIT_OK


def cmd_communities(args):
    bundle = load_bundle(args.graph)
    g = bundle.graph(args.slice)
    ca = louvain(g, resolution=args.resolution, seed=args.seed, restarts=args.restarts)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(csv_documents(ReportSet(communities=ca))["communities.csv"], encoding="utf-8")
    write_manifest(_manifest_for_file(out), "communities",
                   {**vars(args), "n_communities": ca.n_communities, "modularity": ca.modularity},
                   inputs=[args.graph], outputs=[out])
    print(f"{ca.n_communities} communities, modularity {ca.modularity:.4f}")
    return EXIT_OK


def cmd_export(args):
    bundle = load_bundle(args.graph)
    full = bundle.graph(args.slice)
    g = filter_min_degree(full, args.min_degree) if args.min_degree else full
    cent = comm = None
    status = EXIT_OK
    if args.with_centrality and g.n_nodes:
        cv = eigenvector_centrality(full)
        if not cv.converged:
            status = EXIT_NONCONVERGED
        cent = {t: cv[t] for t in g.nodes}
    if args.with_communities and g.n_nodes:
        ca = louvain(full, seed=args.seed)
        comm = {t: ca[t] for t in g.nodes}
    out = write_graphml(args.out, g, cent, comm)
    write_manifest(_manifest_for_file(out), "export", vars(args), inputs=[args.graph],
                   outputs=[out])
    print(f"{g.n_nodes} node(s), {g.n_edges} edge(s) -> {out}")
    return status


# -- parser --------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dexnet", description="Token networks from DEX pool transfers.")
    p.add_argument("--version", action="version", version=f"dexnet {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    f = sub.add_parser("fetch-pools", help="enumerate factory pairs over JSON-RPC")
    f.add_argument("--rpc", required=True)
    f.add_argument("--factory", required=True)
    f.add_argument("--platform", required=True)
    f.add_argument("--out", required=True, type=Path)
    f.add_argument("--batch-size", type=int, default=100)
    f.add_argument("--parallelism", type=int, default=8)
    f.set_defaults(func=cmd_fetch_pools)

    s = sub.add_parser("synth", help="write a synthetic pool registry and transfer stream")
    s.add_argument("--tokens", type=int, required=True)
    s.add_argument("--transfers", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-prefix", required=True, type=Path)
    s.add_argument("--p-hub", type=float, default=SynthParams.p_hub)
    s.add_argument("--attachment-exponent", type=float, default=1.0)
    s.add_argument("--zipf-exponent", type=float, default=1.1)
    s.add_argument("--range", default=None, help="START:END (default: 10060850:15076596)")
    s.add_argument("--platform", default="uniswap")
    s.set_defaults(func=cmd_synth)

    b = sub.add_parser("build", help="build a sliced token graph bundle")
    b.add_argument("--pools", required=True, type=Path)
    b.add_argument("--transfers", required=True, type=Path)
    b.add_argument("--platform", required=True)
    b.add_argument("--range", required=True, help="START:END, both inclusive")
    b.add_argument("--slices", type=int, default=100)
    b.add_argument("--weighted", action="store_true")
    b.add_argument("--max-errors", type=int, default=1000)
    b.add_argument("--out", required=True, type=Path)
    b.set_defaults(func=cmd_build)

    a = sub.add_parser("analyze", help="structural metrics")
    a.add_argument("--graph", required=True, type=Path)
    a.add_argument("--slice", type=_slice_arg, default=WHOLE_RANGE)
    a.add_argument("--diameter-sample", type=int, default=None,
                   help="BFS from this many random sources (lower bound) instead of exact")
    a.add_argument("--out-dir", required=True, type=Path)
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("centrality", help="eigenvector centrality rankings")
    c.add_argument("--graph", required=True, type=Path)
    c.add_argument("--slice", type=_slice_arg, default=WHOLE_RANGE)
    c.add_argument("--top", type=int, default=5)
    c.add_argument("--token", default=None, help="token address for a per-slice series")
    c.add_argument("--tol", type=float, default=1e-10)
    c.add_argument("--max-iter", type=int, default=1000)
    c.add_argument("--out-dir", required=True, type=Path)
    c.set_defaults(func=cmd_centrality)

    n = sub.add_parser("anomalies", help="flag centrality spikes")
    n.add_argument("--graph", required=True, type=Path)
    n.add_argument("--threshold", type=float, default=5.0)
    n.add_argument("--min-slices", type=int, default=5)
    n.add_argument("--exclude-top", type=int, default=5)
    n.add_argument("--tol", type=float, default=1e-10)
    n.add_argument("--max-iter", type=int, default=1000)
    n.add_argument("--out", required=True, type=Path)
    n.set_defaults(func=cmd_anomalies)

    w = sub.add_parser("powerlaw", help="log-log OLS fit of the degree distribution")
    w.add_argument("--graph", required=True, type=Path)
    w.add_argument("--slice", type=int, default=WHOLE_RANGE)
    w.add_argument("--xmin", type=int, default=None)
    w.add_argument("--xmax", type=int, default=None)
    w.add_argument("--log-bins", type=int, default=None, help="bins per decade")
    w.add_argument("--min-bin-count", type=int, default=10,
                   help="with --log-bins, stop at the first bin holding fewer nodes")
    w.add_argument("--out", required=True, type=Path)
    w.set_defaults(func=cmd_powerlaw)

    m = sub.add_parser("communities", help="Louvain communities")
    m.add_argument("--graph", required=True, type=Path)
    m.add_argument("--slice", type=int, default=WHOLE_RANGE)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--resolution", type=float, default=1.0)
    m.add_argument("--restarts", type=int, default=5, help="independent shuffled runs; best kept")
    m.add_argument("--out", required=True, type=Path)
    m.set_defaults(func=cmd_communities)

    e = sub.add_parser("export", help="write GraphML for Gephi and similar tools")
    e.add_argument("--graph", required=True, type=Path)
    e.add_argument("--slice", type=int, default=WHOLE_RANGE)
    e.add_argument("--min-degree", type=int, default=None)
    e.add_argument("--with-centrality", action="store_true")
    e.add_argument("--with-communities", action="store_true")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--format", choices=["graphml"], default="graphml")
    e.add_argument("--out", required=True, type=Path)
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)  # surfaced via exit code 3
            return args.func(args)
    except UsageError as exc:
        print(f"dexnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DexnetError, ValueError, OSError) as exc:
        print(f"dexnet: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
