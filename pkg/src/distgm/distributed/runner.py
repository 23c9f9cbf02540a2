"""Run the swarm to a stop condition while sampling a trace."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, NamedTuple

import numpy as np

from ..graph import Permutation, distortion
from ..projection import hungarian_project, try_round_project
from . import monitors
from .dynamics import MatchingProblem
from .integrate import METHODS, CompiledFlow, step
from .state import SwarmState, init_swarm

STOP_MODES = ("round-consistent", "kkt", "horizon")
ENGINES = ("compiled", "agentwise")


class DegenerateTraceError(ValueError):
    """Too few usable records for a rate fit."""


@dataclass(frozen=True)
class RunConfig:
    """Settings for :func:`run`.

    Time is virtual; ``trace_stride`` counts integrator steps between
    samples, and with ``stride_doubling=k`` the stride doubles after every
    ``k`` samples (useful for slow tails).  Stop modes:

    ``"round-consistent"``
        every agent's ``P_i`` rounds to the same permutation, lies within
        Frobenius distance 1/2 of it, and that permutation's distortion is at
        most ``dis_tol`` (default ``1e-8 ||A||_F^2``).  If ``distortion_tol`` is set the first
        agent's ``||P_1 A - B P_1||_F^2`` must also be below it.
    ``"kkt"``
        the KKT residual is at most ``kkt_tol``.
    ``"horizon"``
        run to ``max_time``.

    ``reference`` is the permutation the per-agent errors are measured
    against; without it the final consensus permutation is used.  With
    ``q_star`` the trace also carries the Lyapunov value and its derivative.
    """

    dt: float = 1e-3
    method: Literal["euler", "rk4"] = "rk4"
    max_time: float = 50_000.0
    trace_stride: int = 1000
    stop_mode: Literal["round-consistent", "kkt", "horizon"] = "round-consistent"
    engine: Literal["compiled", "agentwise"] = "compiled"
    stride_doubling: int | None = None
    dis_tol: float | None = None
    distortion_tol: float | None = None
    kkt_tol: float = 1e-8
    init: Literal["barycenter", "random"] = "barycenter"
    seed: int | None = None
    reference: Permutation | None = None
    q_star: SwarmState | None = field(default=None, repr=False)
    tail_fraction: float = 0.5

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.max_time > 0:
            raise ValueError("max_time must be positive")
        if self.trace_stride < 1:
            raise ValueError("trace_stride must be >= 1")
        if self.stop_mode not in STOP_MODES:
            raise ValueError(f"stop_mode must be one of {STOP_MODES}, got {self.stop_mode!r}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.stride_doubling is not None and self.stride_doubling < 1:
            raise ValueError("stride_doubling must be >= 1")
        if not 0 < self.tail_fraction <= 1:
            raise ValueError("tail_fraction must be in (0, 1]")


@dataclass(frozen=True)
class TraceRecord:
    t: float
    per_agent_error: np.ndarray | None
    distortion_agent1: float
    lyapunov: float | None
    dV_analytic: float | None
    consensus_residual: float
    feasibility_residual: float
    row_sum_deviation: float | None = None
    kkt_residual: float | None = None


@dataclass(frozen=True)
class RunReport:
    converged: bool
    T_round: float | None
    steps: int
    rate: float | None
    r_squared: float | None
    permutation: Permutation
    t_final: float
    stop_mode: str
    agents_agree: bool
    kkt_residual: float
    distortion: float

    def as_dict(self) -> dict:
        return {
            "converged": self.converged,
            "T_round": self.T_round,
            "steps": self.steps,
            "rate": self.rate,
            "r_squared": self.r_squared,
            "permutation": list(self.permutation.map),
            "t_final": self.t_final,
            "stop_mode": self.stop_mode,
            "agents_agree": self.agents_agree,
            "kkt_residual": self.kkt_residual,
            "distortion": self.distortion,
        }


class RunResult(NamedTuple):
    permutations: tuple[Permutation, ...]
    trace: list[TraceRecord]
    report: RunReport
    state: SwarmState


def _common_rounding(s: SwarmState) -> Permutation | None:
    perms = [try_round_project(a.P) for a in s.agents]
    if perms[0] is None or any(p != perms[0] for p in perms[1:]):
        return None
    return perms[0]


def _within_half(s: SwarmState) -> bool:
    # every agent within Frobenius distance 1/2 of one common permutation
    first = try_round_project(s.agents[0].P)
    if first is None:
        return False
    return bool(np.sqrt(monitors.per_agent_error(s, first).max()) < 0.5)


def _record(s: SwarmState, pr: MatchingProblem, cfg: RunConfig) -> TraceRecord:
    err = None if cfg.reference is None else monitors.per_agent_error(s, cfg.reference)
    V = dV = None
    if cfg.q_star is not None:
        V = monitors.lyapunov(s, cfg.q_star)
        dV = monitors.dV_analytic(s, cfg.q_star, pr)
    return TraceRecord(
        t=s.t,
        per_agent_error=err,
        distortion_agent1=monitors.distortion_agent1(s, pr),
        lyapunov=V,
        dV_analytic=dV,
        consensus_residual=monitors.consensus_residual(s, pr.H),
        feasibility_residual=monitors.feasibility_residual(s, pr),
        row_sum_deviation=monitors.row_sum_deviation(s),
        kkt_residual=monitors.kkt_residual(s, pr),
    )


def _stop_met(s: SwarmState, rec: TraceRecord, pr: MatchingProblem, cfg: RunConfig, dis_tol: float) -> bool:
    if cfg.stop_mode == "kkt":
        return rec.kkt_residual <= cfg.kkt_tol
    perm = _common_rounding(s)
    if perm is None or not _within_half(s) or distortion(pr.A, pr.B, perm) ** 2 > dis_tol:
        return False
    return cfg.distortion_tol is None or rec.distortion_agent1 <= cfg.distortion_tol


class _Agentwise:
    def __init__(self, pr: MatchingProblem, cfg: RunConfig):
        self.pr, self.cfg = pr, cfg

    def advance(self, s: SwarmState, steps: int) -> SwarmState:
        for _ in range(steps):
            s = step(s, self.cfg.dt, self.cfg.method, self.pr)
        return s


class _Compiled:
    def __init__(self, pr: MatchingProblem, cfg: RunConfig, s0: SwarmState):
        self.flow = CompiledFlow.for_state(pr, s0, cfg.dt, cfg.method)

    def advance(self, s: SwarmState, steps: int) -> SwarmState:
        return self.flow.advance_state(s, steps)


def run(A, B=None, H=None, cfg: RunConfig | None = None, s0: SwarmState | None = None) -> RunResult:
    """Integrate the swarm from ``s0`` (default: ``init_swarm`` per ``cfg``)."""
    pr = A if isinstance(A, MatchingProblem) else MatchingProblem.build(A, B, H)
    cfg = cfg or RunConfig()
    s = s0 if s0 is not None else init_swarm(pr.A, pr.B, pr.H, cfg.init, cfg.seed)
    dis_tol = cfg.dis_tol if cfg.dis_tol is not None else 1e-8 * pr.A.frobenius() ** 2
    engine = _Compiled(pr, cfg, s) if cfg.engine == "compiled" else _Agentwise(pr, cfg)
    max_steps = int(round(cfg.max_time / cfg.dt))

    trace = [_record(s, pr, cfg)]
    snapshots = [s.stacked("P")]
    T_round = s.t if _within_half(s) else None
    done = cfg.stop_mode != "horizon" and _stop_met(s, trace[-1], pr, cfg, dis_tol)
    steps, stride, samples = 0, cfg.trace_stride, 0
    while not done and steps < max_steps:
        k = min(stride, max_steps - steps)
        s = engine.advance(s, k)
        steps += k
        s = s.with_time(steps * cfg.dt)
        rec = _record(s, pr, cfg)
        trace.append(rec)
        snapshots.append(s.stacked("P"))
        if T_round is None and _within_half(s):
            T_round = s.t
        if cfg.stop_mode != "horizon":
            done = _stop_met(s, rec, pr, cfg, dis_tol)
        samples += 1
        if cfg.stride_doubling and samples % cfg.stride_doubling == 0:
            stride *= 2

    converged = done if cfg.stop_mode != "horizon" else _stop_met(s, trace[-1], pr, replace(cfg, stop_mode="round-consistent"), dis_tol)
    perms = tuple(hungarian_project(a.P) for a in s.agents)
    if cfg.reference is None:
        ref = perms[0].matrix()
        trace = [replace(r, per_agent_error=((P - ref) ** 2).sum(axis=(1, 2))) for r, P in zip(trace, snapshots)]
    try:
        rate, r2 = exponential_rate_fit(trace, cfg.tail_fraction)
    except DegenerateTraceError:
        rate = r2 = None
    report = RunReport(
        converged=bool(converged),
        T_round=T_round,
        steps=steps,
        rate=rate,
        r_squared=r2,
        permutation=perms[0],
        t_final=s.t,
        stop_mode=cfg.stop_mode,
        agents_agree=all(p == perms[0] for p in perms),
        kkt_residual=trace[-1].kkt_residual,
        distortion=trace[-1].distortion_agent1,
    )
    return RunResult(perms, trace, report, s)


def exponential_rate_fit(trace, tail_fraction: float = 0.5, floor: float = 1e-12) -> tuple[float, float]:
    """Fit ``log(max_i err_i) ~ c - rate * t`` over the tail of the trace.

    Records from the first one at or below ``floor`` onward are dropped, and
    the fit uses the last ``tail_fraction`` of what remains.  Returns
    ``(rate, r_squared)``; a constant trace gives rate 0 and r^2 = 1.
    """
    if len(trace) < 10:
        raise DegenerateTraceError(f"need at least 10 records, got {len(trace)}")
    if any(r.per_agent_error is None for r in trace):
        raise DegenerateTraceError("trace has no per-agent errors")
    t = np.array([r.t for r in trace], dtype=float)
    e = np.array([np.max(r.per_agent_error) for r in trace], dtype=float)
    below = np.flatnonzero(e <= floor)
    cut = int(below[0]) if below.size else len(e)
    if cut < 3:
        raise DegenerateTraceError("errors are at the numerical floor from the start")
    m = max(3, math.ceil(tail_fraction * cut))
    t, y = t[cut - m : cut], np.log(e[cut - m : cut])
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-300:
        return 0.0, 1.0
    slope, intercept = np.polyfit(t, y, 1)
    ss_res = float(np.sum((y - (slope * t + intercept)) ** 2))
    return float(-slope), 1.0 - ss_res / ss_tot


def equilibrium(
    A, B=None, H=None, s0: SwarmState | None = None, dt: float = 1e-3, method: str = "rk4", tol: float = 1e-10, max_time: float = 1e9
) -> SwarmState:
    """Limit of the discrete trajectory from ``s0``, frozen once the KKT
    residual is at most ``tol``.

    Leaps of doubling length make the slow tail cheap.  Raises
    ``RuntimeError`` if ``max_time`` passes first.
    """
    pr = A if isinstance(A, MatchingProblem) else MatchingProblem.build(A, B, H)
    s = s0 if s0 is not None else init_swarm(pr.A, pr.B, pr.H)
    flow = CompiledFlow.for_state(pr, s, dt, method)
    x, steps, leap = flow.to_reduced(s), 0, 1024
    while steps * dt < max_time:
        x = flow.advance(x, leap)
        steps += leap
        q = flow.from_reduced(x, s.t + steps * dt)
        if monitors.kkt_residual(q, pr) <= tol:
            return q
        leap *= 2
    raise RuntimeError(f"no equilibrium within KKT tolerance {tol} by t={max_time}")
