"""Projected primal-dual dynamics evaluated agent by agent.

Each agent only ever receives a :class:`LocalView`: its own adjacency
columns, its own state, and the messages ``(P_j, Theta_j, K_j, Upsilon_j)``
of the agents it is linked to.  There is no path from a view to any other
data, so an agent cannot read a non-neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np

from ..graph import DimensionMismatchError, WeightedGraph, _as_graph
from ..projection import proj_pseudostochastic_tangent
from .state import AgentState, SwarmState
from .topology import NetworkTopology


@dataclass(frozen=True)
class MatchingProblem:
    A: WeightedGraph
    B: WeightedGraph
    H: NetworkTopology

    @classmethod
    def build(cls, A, B, H) -> "MatchingProblem":
        A, B = _as_graph(A), _as_graph(B)
        if not isinstance(H, NetworkTopology):
            H = NetworkTopology(np.asarray(H, dtype=float))
        if not (A.n == B.n == H.n):
            raise DimensionMismatchError(f"sizes differ: A={A.n}, B={B.n}, topology={H.n}")
        return cls(A, B, H)

    @property
    def n(self) -> int:
        return self.A.n


@dataclass(frozen=True, eq=False)
class NeighborMessage:
    """What an agent broadcasts to its neighbors."""

    P: np.ndarray
    Theta: np.ndarray
    K: np.ndarray
    Upsilon: np.ndarray

    @classmethod
    def of(cls, agent: AgentState) -> "NeighborMessage":
        return cls(agent.P, agent.Theta, agent.K, agent.Upsilon)


@dataclass(frozen=True, eq=False)
class LocalView:
    """Everything agent ``index`` may read during one derivative evaluation.

    ``inbox`` maps each neighbor ``j`` to ``(w_ij, message_j)``; looking up a
    non-neighbor raises ``KeyError``.
    """

    index: int
    a: np.ndarray
    b: np.ndarray
    own: AgentState
    inbox: Mapping[int, tuple[float, NeighborMessage]]

    def laplacian_sum(self, name: str, own_value: np.ndarray) -> np.ndarray:
        """``sum_j w_ij (X_i - X_j)`` over neighbors for message field ``name``."""
        acc = np.zeros_like(own_value)
        for w, msg in self.inbox.values():
            acc += w * (own_value - getattr(msg, name))
        return acc


def agent_derivative(view: LocalView) -> AgentState:
    """Time derivative of one agent's variables."""
    i = view.index
    a, b = view.a, view.b
    P, y, z, K, lam, Theta, Ups = (
        view.own.P,
        view.own.y,
        view.own.z,
        view.own.K,
        view.own.lam,
        view.own.Theta,
        view.own.Upsilon,
    )
    r = P @ a - y  # residual of the agent's column of P A
    f = b @ P - z  # residual of the agent's row of B P
    lap_P = view.laplacian_sum("P", P)
    lap_Theta = view.laplacian_sum("Theta", Theta)
    lap_K = view.laplacian_sum("K", K)
    lap_Ups = view.laplacian_sum("Upsilon", Ups)

    delta = -np.outer(r, a) - np.outer(b, lam) - lap_Theta - lap_P - np.outer(b, f)
    coupling = -lap_K - lap_Ups
    coupling[:, i] += y
    coupling[i, :] -= z
    return AgentState(
        P=proj_pseudostochastic_tangent(delta),
        y=r - Ups[:, i],
        z=lam + Ups[i, :] + f,
        K=lap_Ups,
        lam=f,
        Theta=lap_P,
        Upsilon=coupling,
    )


def local_views(s: SwarmState, problem: MatchingProblem) -> list[LocalView]:
    """Build every agent's view from one consistent snapshot of the swarm."""
    H = problem.H
    outbox = [NeighborMessage.of(agent) for agent in s.agents]
    views = []
    for i, agent in enumerate(s.agents):
        inbox = {j: (float(H.weights[i, j]), outbox[j]) for j in H.neighbors(i)}
        views.append(
            LocalView(
                index=i,
                a=problem.A.column(i),
                b=problem.B.column(i),
                own=agent,
                inbox=MappingProxyType(inbox),
            )
        )
    return views


def derivative(s: SwarmState, A, B=None, H=None) -> tuple[AgentState, ...]:
    """Derivatives of all agents at the snapshot ``s``.

    Accepts either ``(s, problem)`` or ``(s, A, B, H)``.
    """
    problem = A if isinstance(A, MatchingProblem) else MatchingProblem.build(A, B, H)
    if s.n != problem.n:
        raise DimensionMismatchError(f"swarm has {s.n} agents, problem has {problem.n} vertices")
    return tuple(agent_derivative(v) for v in local_views(s, problem))


def derivative_vector(s: SwarmState, problem: MatchingProblem) -> np.ndarray:
    return np.concatenate([d.to_vector() for d in derivative(s, problem)])
