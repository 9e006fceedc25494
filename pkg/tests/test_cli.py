import csv
import json
import subprocess
import sys

import networkx as nx
import pytest

from dexnet.cli import main
from dexnet.store import load_bundle

from mock_rpc import FACTORY, MockFactory, addr


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert run("synth", "--tokens", 400, "--transfers", 5000, "--seed", 3,
               "--range", "0:99999", "--out-prefix", d / "s") == 0
    assert run("build", "--pools", d / "s.pools.jsonl", "--transfers", d / "s.transfers.jsonl",
               "--platform", "uniswap", "--range", "0:99999", "--slices", 20,
               "--weighted", "--out", d / "g.json.gz") == 0
    return d


def rows(path):
    return list(csv.DictReader(open(path, newline="")))


def test_build_output(pipeline):
    bundle = load_bundle(pipeline / "g.json.gz")
    assert bundle.segmentation.n_segments == 20 and bundle.weighted
    manifest = json.loads((pipeline / "g.json.gz.manifest.json").read_text())
    assert manifest["command"] == "build" and len(manifest["inputs"]) == 2


def test_analyze_all(pipeline):
    out = pipeline / "analyze"
    assert run("analyze", "--graph", pipeline / "g.json.gz", "--slice", "all",
               "--out-dir", out) == 0
    metrics = rows(out / "metrics.csv")
    assert {m["slice"] for m in metrics} >= {"0", "1", "20", "all"}
    assert len(rows(out / "ratio_series.csv")) == 20
    assert (out / "degree_histogram.csv").exists() and (out / "manifest.json").exists()


def test_centrality_with_token_series(pipeline):
    out = pipeline / "cent"
    hub = load_bundle(pipeline / "g.json.gz").graph(0).nodes[0].address
    assert run("centrality", "--graph", pipeline / "g.json.gz", "--top", 5, "--token", hub,
               "--out-dir", out) == 0
    assert len(rows(out / "rankings.csv")) == 5
    assert len(rows(out / "centrality_series.csv")) == 20


def test_powerlaw_json_and_csv(pipeline):
    assert run("powerlaw", "--graph", pipeline / "g.json.gz", "--out", pipeline / "pl.json") == 0
    fit = json.loads((pipeline / "pl.json").read_text())
    assert fit["slope"] < 0 and 0 <= fit["p_value"] <= 1
    assert run("powerlaw", "--graph", pipeline / "g.json.gz", "--log-bins", 5,
               "--out", pipeline / "pl.csv") == 0
    assert rows(pipeline / "pl.csv")[0]["slice"] == "0"


def test_anomalies_and_communities(pipeline):
    assert run("anomalies", "--graph", pipeline / "g.json.gz", "--threshold", 5.0,
               "--min-slices", 5, "--exclude-top", 5, "--out", pipeline / "an.csv") == 0
    assert (pipeline / "an.csv").read_text().startswith("address,symbol,slice")
    assert run("communities", "--graph", pipeline / "g.json.gz", "--seed", 0,
               "--resolution", 1.0, "--out", pipeline / "comm.csv") == 0
    labels = rows(pipeline / "comm.csv")
    assert len(labels) == load_bundle(pipeline / "g.json.gz").graph(0).n_nodes


def test_export_graphml(pipeline):
    out = pipeline / "g.graphml"
    assert run("export", "--graph", pipeline / "g.json.gz", "--min-degree", 2,
               "--with-centrality", "--with-communities", "--format", "graphml",
               "--out", out) == 0
    h = nx.read_graphml(out)
    assert all("centrality" in d and "community" in d for _, d in h.nodes(data=True))


def test_export_is_byte_deterministic(pipeline):
    for name in ("a.graphml", "b.graphml"):
        assert run("export", "--graph", pipeline / "g.json.gz", "--with-communities",
                   "--out", pipeline / name) == 0
    assert (pipeline / "a.graphml").read_bytes() == (pipeline / "b.graphml").read_bytes()


def test_non_convergence_exit_code(pipeline):
    assert run("centrality", "--graph", pipeline / "g.json.gz", "--max-iter", 1,
               "--out-dir", pipeline / "nc") == 3
    assert (pipeline / "nc" / "rankings.csv").exists()  # partial outputs still written


def test_data_error_exit_code(tmp_path):
    assert run("analyze", "--graph", tmp_path / "missing.json", "--out-dir", tmp_path) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert run("analyze", "--graph", bad, "--out-dir", tmp_path) == 2


def test_slice_out_of_range_is_usage_error(pipeline):
    assert run("analyze", "--graph", pipeline / "g.json.gz", "--slice", 99,
               "--out-dir", pipeline / "x") == 1


def test_usage_errors_exit_1():
    with pytest.raises(SystemExit) as exc:
        run("build", "--pools")
    assert exc.value.code == 1
    proc = subprocess.run([sys.executable, "-m", "dexnet", "analyze", "--slice", "abc"],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and "usage" in proc.stderr


def test_fetch_pools_against_mock(tmp_path):
    pools = [(addr("aa", 1), addr("01", 1), addr("01", 2))]
    with MockFactory(pools) as mock:
        assert run("fetch-pools", "--rpc", mock.url, "--factory", FACTORY,
                   "--platform", "sushiswap", "--out", tmp_path / "p.jsonl") == 0
    rec = json.loads((tmp_path / "p.jsonl").read_text())
    assert rec["pool"] == addr("aa", 1) and rec["platform"] == "sushiswap"
