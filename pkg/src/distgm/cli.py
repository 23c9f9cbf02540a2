"""Command-line front end.

Every command accepts ``--config FILE`` (a JSON object keyed by option
name); flags given on the command line override the file.  Exit codes:
0 success, 2 invalid input or configuration, 3 no convergence, 4 the
reference run did not reproduce the expected permutation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from .bench import BENCH_COLUMNS, NOISE_FRACTIONS, bench_sweep, matching_instance, noise_experiment, summarize
from .centralized import EXACT_GM_CAP, exact_gm
from .distributed.integrate import NonFiniteStateError
from .distributed.runner import RunConfig, run
from .distributed.topology import TopologyError
from .graph import DimensionMismatchError, GraphValidationError, UnfriendlyGraphError, automorphism_count, friendliness
from .instances import reference_instance
from .io import SAME_AS_A, load_graph, load_topology, write_report_json, write_trace_csv

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_MISMATCH = 0, 2, 3, 4

RUN_DEFAULTS = {
    "dt": 1e-3,
    "method": "rk4",
    "max_time": 50_000.0,
    "trace_stride": 1000,
    "stride_doubling": None,
    "stop_mode": "round-consistent",
    "init": "barycenter",
    "seed": 0,
    "out_trace": None,
    "out_report": None,
}

DEFAULTS = {
    "paper-example": {**RUN_DEFAULTS, "out_trace": "paper_example_trace.csv", "distortion_tol": 1e-6},
    "solve": {**RUN_DEFAULTS, "graph_a": None, "graph_b": None, "topology": SAME_AS_A, "distortion_tol": None},
    "oracle": {"graph_a": None, "graph_b": None},
    "check": {"graph": None, "out_report": None},
    "bench": {
        "n": [4, 5, 6],
        "trials": 3,
        "seed": 0,
        "dt": [1e-3],
        "topology": ["random"],
        "density": 0.5,
        "method": "rk4",
        "max_time": 200_000.0,
        "stride_doubling": 50,
        "out_report": None,
        "out_runs": None,
    },
    "noise": {
        "graph_a": None,
        "n": 6,
        "density": 0.5,
        "seed": 0,
        "trials": 20,
        "rho_fractions": list(NOISE_FRACTIONS),
        "topology": SAME_AS_A,
        "distributed": True,
        "out_report": None,
    },
}


class ConfigError(ValueError):
    def __init__(self, key: str, msg: str):
        super().__init__(f"invalid configuration for '{key}': {msg}")
        self.key = key


def _float_list(s: str) -> list[float]:
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--dt", type=float, default=S, help="integration step (virtual time, default 1e-3)")
    p.add_argument("--method", choices=("euler", "rk4"), default=S, help="integrator (default rk4)")
    p.add_argument("--max-time", type=float, default=S, help="time horizon guard (default 50000)")
    p.add_argument("--trace-stride", type=int, default=S, help="steps between trace samples (default 1000)")
    p.add_argument("--stride-doubling", type=int, default=S, help="double the trace stride every K samples")
    p.add_argument("--stop-mode", choices=("round-consistent", "kkt", "horizon"), default=S)
    p.add_argument("--init", choices=("barycenter", "random"), default=S, help="initial swarm (default barycenter)")
    p.add_argument("--seed", type=int, default=S, help="seed for random initialization")
    p.add_argument("--distortion-tol", type=float, default=S, help="also require ||P_1 A - B P_1||_F^2 below this to stop")
    p.add_argument("--out-trace", default=S, help="trace CSV path")
    p.add_argument("--out-report", default=S, help="report JSON path")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="distgm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_, argument_default=S)
        p.add_argument("--config", default=None, help="JSON file of option values; flags override it")
        return p

    p = add("paper-example", "solve the built-in six-vertex reference instance and check the result")
    _add_run_flags(p)

    p = add("solve", "run the distributed solver on two graph files")
    p.add_argument("graph_a", nargs="?", default=S)
    p.add_argument("graph_b", nargs="?", default=S)
    p.add_argument("--topology", default=S, help=f"topology graph file or '{SAME_AS_A}' (default)")
    _add_run_flags(p)

    p = add("oracle", f"exhaustive minimum-distortion permutation (n <= {EXACT_GM_CAP})")
    p.add_argument("graph_a", nargs="?", default=S)
    p.add_argument("graph_b", nargs="?", default=S)

    p = add("check", "spectral friendliness report of a graph")
    p.add_argument("graph", nargs="?", default=S)
    p.add_argument("--out-report", default=S, help="report JSON path")

    p = add("bench", "sweep random instances through the distributed solver")
    p.add_argument("--n", type=int, nargs="+", default=S, help="graph sizes (default 4 5 6)")
    p.add_argument("--trials", type=int, default=S, help="instances per setting (default 3)")
    p.add_argument("--seed", type=int, default=S, help="first instance seed (default 0)")
    p.add_argument("--dt", type=float, nargs="+", default=S, help="step sizes (default 1e-3)")
    p.add_argument(
        "--topology", nargs="+", choices=("random", "same-as-a", "complete", "ring"), default=S, help="topology kinds"
    )
    p.add_argument("--density", type=float, default=S, help="edge density of generated graphs (default 0.5)")
    p.add_argument("--method", choices=("euler", "rk4"), default=S)
    p.add_argument("--max-time", type=float, default=S)
    p.add_argument("--stride-doubling", type=int, default=S)
    p.add_argument("--out-report", default=S, help="summary table CSV path")
    p.add_argument("--out-runs", default=S, help="per-run CSV path")

    p = add("noise", "recovery rate under perturbations scaled to the noise bound")
    p.add_argument("graph_a", nargs="?", default=S, help="graph file (default: a generated instance)")
    p.add_argument("--n", type=int, default=S, help="size of the generated graph when no file is given")
    p.add_argument("--density", type=float, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--trials", type=int, default=S, help="trials per fraction (default 20)")
    p.add_argument("--rho-fractions", type=_float_list, default=S, help="comma-separated, default 0,0.5,1,2,5")
    p.add_argument("--topology", choices=("random", "same-as-a", "complete", "ring"), default=S)
    p.add_argument("--no-distributed", dest="distributed", action="store_false", default=S)
    p.add_argument("--out-report", default=S, help="success table CSV path")
    return parser


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve_config(command: str, ns: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    from_file = _load_config(getattr(ns, "config", None))
    unknown = sorted(set(from_file) - set(DEFAULTS[command]))
    if unknown:
        raise ConfigError(unknown[0], f"unknown option for '{command}'")
    cfg = {**DEFAULTS[command], **from_file, **flags}
    _validate(command, cfg)
    return cfg


def _validate(command: str, cfg: dict) -> None:
    def positive(key):
        v = cfg.get(key)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            raise ConfigError(key, f"must be a positive number, got {v!r}")

    def choice(key, options):
        if cfg.get(key) not in options:
            raise ConfigError(key, f"must be one of {options}, got {cfg.get(key)!r}")

    def pos_int(key, allow_none=False):
        v = cfg.get(key)
        if allow_none and v is None:
            return
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(key, f"must be a positive integer, got {v!r}")

    def required(key):
        if cfg.get(key) in (None, ""):
            raise ConfigError(key, "is required")

    if command in ("paper-example", "solve"):
        positive("dt")
        positive("max_time")
        choice("method", ("euler", "rk4"))
        choice("stop_mode", ("round-consistent", "kkt", "horizon"))
        choice("init", ("barycenter", "random"))
        pos_int("trace_stride")
        pos_int("stride_doubling", allow_none=True)
        if cfg.get("distortion_tol") is not None:
            positive("distortion_tol")
    if command == "solve":
        required("graph_a")
        required("graph_b")
    if command == "oracle":
        required("graph_a")
        required("graph_b")
    if command == "check":
        required("graph")
    if command == "bench":
        for key in ("n", "dt", "topology"):
            if not isinstance(cfg[key], list) or not cfg[key]:
                raise ConfigError(key, "must be a non-empty list")
        if any(not isinstance(v, int) or v < 2 for v in cfg["n"]):
            raise ConfigError("n", "sizes must be integers >= 2")
        if any(not isinstance(v, (int, float)) or not v > 0 for v in cfg["dt"]):
            raise ConfigError("dt", "step sizes must be positive")
        bad = [t for t in cfg["topology"] if t not in ("random", "same-as-a", "complete", "ring")]
        if bad:
            raise ConfigError("topology", f"unknown kind {bad[0]!r}")
        pos_int("trials")
        positive("max_time")
        choice("method", ("euler", "rk4"))
        pos_int("stride_doubling", allow_none=True)
    if command == "noise":
        pos_int("trials")
        if cfg.get("graph_a") is None and (not isinstance(cfg["n"], int) or cfg["n"] < 2):
            raise ConfigError("n", "must be an integer >= 2")
        fr = cfg["rho_fractions"]
        if not isinstance(fr, list) or not fr or any(not isinstance(v, (int, float)) or v < 0 for v in fr):
            raise ConfigError("rho_fractions", "must be a non-empty list of nonnegative numbers")
        choice("topology", ("random", "same-as-a", "complete", "ring"))
    if command in ("bench", "noise"):
        d = cfg.get("density")
        if not isinstance(d, (int, float)) or not 0 < d <= 1:
            raise ConfigError("density", f"must lie in (0, 1], got {d!r}")


def _run_config(cfg: dict, reference=None) -> RunConfig:
    return RunConfig(
        dt=float(cfg["dt"]),
        method=cfg["method"],
        max_time=float(cfg["max_time"]),
        trace_stride=int(cfg["trace_stride"]),
        stop_mode=cfg["stop_mode"],
        stride_doubling=cfg["stride_doubling"],
        distortion_tol=cfg.get("distortion_tol"),
        init=cfg["init"],
        seed=cfg["seed"],
        reference=reference,
    )


def _write_outputs(cfg: dict, result, n: int) -> None:
    if cfg.get("out_trace"):
        write_trace_csv(result.trace, cfg["out_trace"], n)
    if cfg.get("out_report"):
        write_report_json(result.report, cfg["out_report"])


def _mapping(perm) -> str:
    return ", ".join(f"{i}->{j}" for i, j in perm.one_based())


def cmd_paper_example(cfg: dict) -> int:
    A, B, H, expected = reference_instance()
    result = run(A, B, H, _run_config(cfg, reference=expected))
    _write_outputs(cfg, result, A.n)
    rep = result.report
    print(f"recovered permutation (1-based): {_mapping(rep.permutation)}")
    print(np.array2string(rep.permutation.matrix().astype(int)))
    print(f"T_round={rep.T_round} t_final={rep.t_final} distortion={rep.distortion:.3e} rate={rep.rate}")
    wrong = [i for i, p in enumerate(result.permutations) if p != expected]
    if wrong:
        print(f"MISMATCH: expected {_mapping(expected)}", file=sys.stderr)
        for i in wrong:
            print(f"  agent {i + 1}: {_mapping(result.permutations[i])}", file=sys.stderr)
        return EXIT_MISMATCH
    if not rep.converged:
        print("stop condition not reached before max_time", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    print("all agents match the expected permutation")
    return EXIT_OK


def cmd_solve(cfg: dict) -> int:
    A, B = load_graph(cfg["graph_a"]), load_graph(cfg["graph_b"])
    if A.n != B.n:
        raise DimensionMismatchError(f"graph_a has {A.n} vertices but graph_b has {B.n}")
    H = load_topology(cfg["topology"], A)
    if H.n != A.n:
        raise DimensionMismatchError(f"topology has {H.n} agents but the graphs have {A.n} vertices")
    if not friendliness(A).friendly:
        print("warning: graph_a is not spectrally friendly; the relaxation may not recover the matching", file=sys.stderr)
    result = run(A, B, H, _run_config(cfg))
    _write_outputs(cfg, result, A.n)
    rep = result.report
    print(json.dumps(rep.as_dict()))
    if not rep.converged:
        print("stop condition not reached before max_time", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_oracle(cfg: dict) -> int:
    A, B = load_graph(cfg["graph_a"]), load_graph(cfg["graph_b"])
    if A.n != B.n:
        raise DimensionMismatchError(f"graph_a has {A.n} vertices but graph_b has {B.n}")
    if A.n > EXACT_GM_CAP:
        raise ConfigError("graph_a", f"exhaustive search is capped at n <= {EXACT_GM_CAP}, got {A.n}")
    perm, dist = exact_gm(A, B)
    print(json.dumps({"permutation": list(perm.map), "distortion": dist}))
    return EXIT_OK


def cmd_check(cfg: dict) -> int:
    A = load_graph(cfg["graph"])
    out = friendliness(A).as_dict()
    if A.n <= EXACT_GM_CAP:
        out["automorphism_count"] = automorphism_count(A)
    text = json.dumps(out, indent=2)
    print(text)
    if cfg.get("out_report"):
        Path(cfg["out_report"]).write_text(text + "\n")
    return EXIT_OK


def _write_rows(rows: list[dict], path, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        w.writerows([{k: ("" if r[k] is None else r[k]) for k in columns} for r in rows])


def _print_table(rows: list[dict], columns) -> None:
    print("\t".join(columns))
    for r in rows:
        print("\t".join("" if r[c] is None else (f"{r[c]:.6g}" if isinstance(r[c], float) else str(r[c])) for c in columns))


def cmd_bench(cfg: dict) -> int:
    seeds = range(cfg["seed"], cfg["seed"] + cfg["trials"])
    rows = bench_sweep(
        cfg["n"], seeds, cfg["dt"], cfg["topology"], cfg["method"], cfg["max_time"], cfg["density"], cfg["stride_doubling"]
    )
    table = summarize(rows)
    columns = ("n", "dt", "topology", "runs", "success_rate", "mean_T_round", "mean_rate")
    _print_table(table, columns)
    if cfg.get("out_report"):
        _write_rows(table, cfg["out_report"], columns)
    if cfg.get("out_runs"):
        _write_rows(rows, cfg["out_runs"], BENCH_COLUMNS)
    return EXIT_OK


def cmd_noise(cfg: dict) -> int:
    if cfg.get("graph_a"):
        A = load_graph(cfg["graph_a"])
    else:
        A = matching_instance(cfg["n"], cfg["seed"], cfg["density"]).A
    rows = noise_experiment(
        A, cfg["rho_fractions"], cfg["trials"], cfg["seed"], distributed=cfg["distributed"], topology=cfg["topology"]
    )
    columns = ("fraction", "rho", "trials", "centralized_success", "distributed_success")
    _print_table(rows, columns)
    if cfg.get("out_report"):
        _write_rows(rows, cfg["out_report"], columns)
    return EXIT_OK


COMMANDS = {
    "paper-example": cmd_paper_example,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "check": cmd_check,
    "bench": cmd_bench,
    "noise": cmd_noise,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        cfg = resolve_config(ns.command, ns)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[ns.command](cfg)
    except (ConfigError, GraphValidationError, DimensionMismatchError, TopologyError, UnfriendlyGraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NonFiniteStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
