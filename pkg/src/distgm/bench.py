"""Instance generation and experiment sweeps."""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import product

import numpy as np

from .centralized import solve_rgm
from .distributed.runner import RunConfig, run
from .distributed.topology import NetworkTopology
from .graph import (
    Permutation,
    WeightedGraph,
    automorphism_count,
    friendliness,
    noise_bound,
    perturb,
    random_graph,
    relabel,
)
from .projection import try_round_project


@dataclass(frozen=True)
class MatchingInstance:
    A: WeightedGraph
    B: WeightedGraph
    perm: Permutation
    seed: int


def matching_instance(n: int, seed: int, density: float = 0.5, weight_range=(0.5, 2.0), max_tries: int = 1000) -> MatchingInstance:
    """Isomorphic pair ``(A, relabel(A, perm))`` with ``A`` asymmetric and friendly.

    Candidate graphs are drawn from a seed stream until one has a trivial
    automorphism group and passes the spectral friendliness test.
    """
    ss = np.random.SeedSequence(seed)
    for child in ss.spawn(max_tries):
        gseed, pseed = child.generate_state(2)
        A = random_graph(n, density, weight_range, seed=int(gseed))
        if automorphism_count(A, cap=max(n, 9)) == 1 and friendliness(A).friendly:
            perm = Permutation.random(n, seed=int(pseed))
            return MatchingInstance(A, relabel(A, perm), perm, seed)
    raise RuntimeError(f"no asymmetric friendly graph found in {max_tries} draws")


def make_topology(kind: str, A: WeightedGraph, seed: int | None = None, density: float = 0.5) -> NetworkTopology:
    """``"same-as-a"``, ``"random"``, ``"complete"`` or ``"ring"`` with unit weights."""
    n = A.n
    if kind == "same-as-a":
        return NetworkTopology.from_graph(A)
    if kind == "random":
        return NetworkTopology.random(n, density, seed=seed)
    if kind == "complete":
        return NetworkTopology(np.ones((n, n)) - np.eye(n))
    if kind == "ring":
        w = np.zeros((n, n))
        for i in range(n):
            w[i, (i + 1) % n] = w[(i + 1) % n, i] = 1.0
        return NetworkTopology(w)
    raise ValueError(f"unknown topology kind {kind!r}")


BENCH_COLUMNS = ("n", "seed", "dt", "topology", "success", "converged", "T_round", "rate", "r_squared", "t_final", "wall_s")


def bench_sweep(
    ns=(4, 5, 6),
    seeds=range(3),
    dts=(1e-3,),
    topologies=("random",),
    method: str = "rk4",
    max_time: float = 200_000.0,
    density: float = 0.5,
    stride_doubling: int | None = 50,
) -> list[dict]:
    """One row per (n, seed, dt, topology) run of the distributed solver."""
    rows = []
    for n, seed, dt, topo in product(ns, seeds, dts, topologies):
        inst = matching_instance(n, seed, density)
        H = make_topology(topo, inst.A, seed=seed + 10_000, density=density)
        cfg = RunConfig(dt=dt, method=method, max_time=max_time, stride_doubling=stride_doubling, reference=inst.perm)
        t0 = time.perf_counter()
        perms, _, rep, _ = run(inst.A, inst.B, H, cfg)
        rows.append(
            {
                "n": n,
                "seed": seed,
                "dt": dt,
                "topology": topo,
                "success": rep.converged and all(p == inst.perm for p in perms),
                "converged": rep.converged,
                "T_round": rep.T_round,
                "rate": rep.rate,
                "r_squared": rep.r_squared,
                "t_final": rep.t_final,
                "wall_s": time.perf_counter() - t0,
            }
        )
    return rows


def summarize(rows: list[dict]) -> list[dict]:
    """Success rate, mean ``T_round`` and mean fitted rate per (n, dt, topology)."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["n"], r["dt"], r["topology"]), []).append(r)
    out = []
    for (n, dt, topo), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        Ts = [r["T_round"] for r in rs if r["T_round"] is not None]
        rates = [r["rate"] for r in rs if r["rate"] is not None]
        out.append(
            {
                "n": n,
                "dt": dt,
                "topology": topo,
                "runs": len(rs),
                "success_rate": sum(r["success"] for r in rs) / len(rs),
                "mean_T_round": float(np.mean(Ts)) if Ts else None,
                "mean_rate": float(np.mean(rates)) if rates else None,
            }
        )
    return out


NOISE_FRACTIONS = (0.0, 0.5, 1.0, 2.0, 5.0)


def noise_experiment(
    A,
    fractions=NOISE_FRACTIONS,
    trials: int = 20,
    seed: int = 0,
    distributed: bool = True,
    topology: str = "same-as-a",
    eps: float | None = None,
    run_cfg: RunConfig | None = None,
) -> list[dict]:
    """Recovery of the planted permutation after perturbing ``B``.

    For each fraction ``f`` and trial ``k`` a random permutation relabels
    ``A`` into ``B``, ``B`` is perturbed at ``rho = f * noise_bound(A)``, and
    recovery means the relaxed solution rounds entrywise to the planted
    permutation (every agent's estimate, for the distributed solver).
    """
    A = A if isinstance(A, WeightedGraph) else WeightedGraph(np.asarray(A, dtype=float))
    bound = noise_bound(A, eps)
    H = make_topology(topology, A, seed=seed)
    cfg = run_cfg or RunConfig(stop_mode="kkt", kkt_tol=1e-8, stride_doubling=50, max_time=1e7)
    rows = []
    for f in fractions:
        central_ok = dist_ok = 0
        for k in range(trials):
            ss = np.random.SeedSequence([seed, k])
            pseed, rseed = (int(v) for v in ss.generate_state(2))
            perm = Permutation.random(A.n, seed=pseed)
            Bt = perturb(relabel(A, perm), f * bound, seed=rseed)
            central_ok += try_round_project(solve_rgm(A, Bt).P) == perm
            if distributed:
                perms = [try_round_project(a.P) for a in run(A, Bt, H, cfg).state.agents]
                dist_ok += all(p == perm for p in perms)
        rows.append(
            {
                "fraction": f,
                "rho": f * bound,
                "trials": trials,
                "centralized_success": central_ok / trials,
                "distributed_success": dist_ok / trials if distributed else None,
            }
        )
    return rows
