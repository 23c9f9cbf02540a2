import json

import numpy as np
import pytest

from distgm.distributed import RunConfig, TopologyError, run
from distgm.graph import GraphValidationError, random_graph
from distgm.io import (
    graph_to_json,
    load_graph,
    load_topology,
    read_report_json,
    read_trace_csv,
    save_graph,
    trace_header,
    write_report_json,
    write_trace_csv,
)


@pytest.mark.parametrize("suffix", [".json", ".csv"])
def test_graph_roundtrip(tmp_path, suffix):
    A = random_graph(6, 0.5, seed=3)
    path = tmp_path / f"g{suffix}"
    save_graph(A, path)
    assert np.array_equal(load_graph(path).adj, A.adj)


def test_graph_json_layout(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"n": 3, "edges": [[0, 1, 2.0], [1, 2, 0.5]]}))
    A = load_graph(path)
    assert A.adj[1, 0] == 2.0 and A.adj[2, 1] == 0.5 and A.adj[0, 2] == 0
    assert graph_to_json(A) == {"n": 3, "edges": [[0, 1, 2.0], [1, 2, 0.5]]}


@pytest.mark.parametrize(
    "payload",
    [
        "[1, 2]",
        '{"n": 3}',
        '{"n": 1, "edges": []}',
        '{"n": 3, "edges": "x"}',
        '{"n": 3, "edges": [[0, 5, 1.0]]}',
        '{"n": 3, "edges": [[0, 1, -1.0]]}',
        '{"n": 3, "edges": [[1, 1, 1.0]]}',
        "{not json",
    ],
)
def test_malformed_graph_json(tmp_path, payload):
    path = tmp_path / "g.json"
    path.write_text(payload)
    with pytest.raises(GraphValidationError):
        load_graph(path)


@pytest.mark.parametrize("text", ["0,1\n1,0,2\n", "0,a\na,0\n", "0,1\n2,0\n"])
def test_malformed_graph_csv(tmp_path, text):
    path = tmp_path / "g.csv"
    path.write_text(text)
    with pytest.raises(GraphValidationError):
        load_graph(path)


def test_topology_sources(tmp_path, reference):
    A = reference[0]
    assert np.array_equal(load_topology("same-as-a", A).weights, (A.adj > 0).astype(float))
    path = tmp_path / "h.json"
    path.write_text(json.dumps({"n": 3, "edges": [[0, 1, 1.0], [1, 2, 2.0]]}))
    assert load_topology(path).weights[2, 1] == 2.0
    path.write_text(json.dumps({"n": 3, "edges": [[0, 1, 1.0]]}))
    with pytest.raises(TopologyError, match="connected"):
        load_topology(path)
    path.write_text(json.dumps({"n": 3, "edges": [[0, 1]]}))
    with pytest.raises(GraphValidationError):
        load_topology(path)


def test_trace_and_report_roundtrip(tmp_path, reference):
    A, B, H, Pi = reference
    res = run(A, B, H, RunConfig(max_time=5.0, stop_mode="horizon", reference=Pi))
    path = tmp_path / "trace.csv"
    write_trace_csv(res.trace, path, 6)
    header = path.read_text().splitlines()[0].split(",")
    assert header == trace_header(6)
    assert header[:2] == ["t", "err_1"] and header[-5:] == ["distortion", "V", "dV", "consensus", "feasibility"]
    back = read_trace_csv(path)
    assert len(back) == len(res.trace)
    for r, b in zip(res.trace, back):
        assert r.t == b.t and r.distortion_agent1 == b.distortion_agent1
        assert np.array_equal(r.per_agent_error, b.per_agent_error)
        assert b.lyapunov is None and b.dV_analytic is None
    rpath = tmp_path / "report.json"
    write_report_json(res.report, rpath)
    d = read_report_json(rpath)
    assert d["permutation"] == list(res.report.permutation.map) and d["steps"] == res.report.steps
    rpath.write_text('{"converged": true}')
    with pytest.raises(ValueError):
        read_report_json(rpath)


def test_trace_header_check(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("t,x\n1,2\n")
    with pytest.raises(ValueError):
        read_trace_csv(path)
