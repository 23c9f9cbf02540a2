"""Agent-level simulation of the distributed matching dynamics."""

from .dynamics import LocalView, MatchingProblem, NeighborMessage, agent_derivative, derivative, local_views
from .integrate import CompiledFlow, NonFiniteStateError, step
from .monitors import (
    consensus_residual,
    dV_analytic,
    distortion_agent1,
    feasibility_residual,
    kkt_blocks,
    kkt_residual,
    lyapunov,
    per_agent_error,
)
from .runner import (
    DegenerateTraceError,
    RunConfig,
    RunReport,
    RunResult,
    TraceRecord,
    equilibrium,
    exponential_rate_fit,
    run,
)
from .state import AgentState, SwarmState, init_swarm
from .topology import NetworkTopology, TopologyError

__all__ = [
    "AgentState",
    "CompiledFlow",
    "DegenerateTraceError",
    "LocalView",
    "MatchingProblem",
    "NeighborMessage",
    "NetworkTopology",
    "NonFiniteStateError",
    "RunConfig",
    "RunReport",
    "RunResult",
    "SwarmState",
    "TopologyError",
    "TraceRecord",
    "agent_derivative",
    "consensus_residual",
    "dV_analytic",
    "derivative",
    "distortion_agent1",
    "equilibrium",
    "exponential_rate_fit",
    "feasibility_residual",
    "init_swarm",
    "kkt_blocks",
    "kkt_residual",
    "local_views",
    "lyapunov",
    "per_agent_error",
    "run",
    "step",
]
