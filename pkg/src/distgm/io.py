"""File formats: graph JSON/CSV, trace CSV and run-report JSON."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .graph import GraphValidationError, WeightedGraph, graph_from_edges
from .distributed.runner import RunReport, TraceRecord
from .distributed.topology import NetworkTopology

SAME_AS_A = "same-as-a"


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def parse_graph_json(data) -> WeightedGraph:
    if not isinstance(data, dict):
        raise GraphValidationError("graph JSON must be an object with keys 'n' and 'edges'")
    missing = {"n", "edges"} - data.keys()
    if missing:
        raise GraphValidationError(f"graph JSON is missing key(s): {', '.join(sorted(missing))}")
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise GraphValidationError(f"'n' must be an integer >= 2, got {n!r}")
    if not isinstance(data["edges"], list):
        raise GraphValidationError("'edges' must be a list of [i, j, w] triples")
    return graph_from_edges(n, data["edges"])


def graph_to_json(graph: WeightedGraph) -> dict:
    return {"n": graph.n, "edges": [[i, j, w] for i, j, w in graph.edges()]}


def _read_matrix_csv(path: Path) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
        return np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise GraphValidationError(f"{path}: dense CSV must hold numbers only ({exc})") from exc


def load_graph(path) -> WeightedGraph:
    """Load a graph from ``.json`` (edge list) or ``.csv`` (dense matrix)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        adj = _read_matrix_csv(path)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise GraphValidationError(f"{path}: dense CSV must be n rows of n values")
        return WeightedGraph(adj)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise GraphValidationError(f"{path}: invalid JSON ({exc})") from exc
    return parse_graph_json(data)


def save_graph(graph: WeightedGraph, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows([[repr(float(v)) for v in row] for row in graph.adj])
    else:
        path.write_text(json.dumps(graph_to_json(graph)) + "\n")


def load_topology(source, A: WeightedGraph | None = None) -> NetworkTopology:
    """Topology from a graph file, or the unit-weight pattern of ``A`` for ``"same-as-a"``."""
    if source is None or str(source) == SAME_AS_A:
        if A is None:
            raise ValueError("'same-as-a' topology needs graph A")
        return NetworkTopology.from_graph(A)
    path = Path(source)
    if path.suffix.lower() == ".csv":
        return NetworkTopology(_read_matrix_csv(path))
    data = json.loads(path.read_text())
    if not isinstance(data, dict) or "n" not in data or "edges" not in data:
        raise GraphValidationError(f"{path}: topology JSON needs keys 'n' and 'edges'")
    try:
        n = int(data["n"])
        w = np.zeros((n, n))
        for i, j, wij in data["edges"]:
            w[int(i), int(j)] = w[int(j), int(i)] = float(wij)
    except (TypeError, ValueError, IndexError) as exc:
        raise GraphValidationError(f"{path}: malformed topology edges ({exc})") from exc
    return NetworkTopology(w)


def trace_header(n: int) -> list[str]:
    return ["t", *(f"err_{i + 1}" for i in range(n)), "distortion", "V", "dV", "consensus", "feasibility"]


def write_trace_csv(trace, path, n: int | None = None) -> None:
    if n is None:
        n = len(trace[0].per_agent_error)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(n))
        for r in trace:
            errs = [""] * n if r.per_agent_error is None else [_fmt(e) for e in r.per_agent_error]
            w.writerow(
                [
                    _fmt(r.t),
                    *errs,
                    _fmt(r.distortion_agent1),
                    _fmt(r.lyapunov),
                    _fmt(r.dV_analytic),
                    _fmt(r.consensus_residual),
                    _fmt(r.feasibility_residual),
                ]
            )


def read_trace_csv(path) -> list[TraceRecord]:
    def num(s):
        return None if s == "" else float(s)

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = len(header) - 6
        if n < 1 or header != trace_header(n):
            raise ValueError(f"{path}: unexpected trace header {header}")
        out = []
        for row in reader:
            errs = row[1 : n + 1]
            out.append(
                TraceRecord(
                    t=float(row[0]),
                    per_agent_error=None if all(e == "" for e in errs) else np.array([float(e) for e in errs]),
                    distortion_agent1=float(row[n + 1]),
                    lyapunov=num(row[n + 2]),
                    dV_analytic=num(row[n + 3]),
                    consensus_residual=float(row[n + 4]),
                    feasibility_residual=float(row[n + 5]),
                )
            )
    return out


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def write_report_json(report: RunReport | dict, path) -> None:
    d = report.as_dict() if isinstance(report, RunReport) else dict(report)
    Path(path).write_text(json.dumps({k: _json_safe(v) for k, v in d.items()}, indent=2) + "\n")


def read_report_json(path) -> dict:
    d = json.loads(Path(path).read_text())
    missing = {"converged", "T_round", "steps", "rate", "r_squared", "permutation"} - d.keys()
    if missing:
        raise ValueError(f"{path}: report is missing key(s): {', '.join(sorted(missing))}")
    return d
