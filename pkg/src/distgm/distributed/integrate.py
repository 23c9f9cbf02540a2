"""Explicit time stepping of the swarm dynamics.

Two engines share one right-hand side.  :func:`step` advances the swarm one
step by calling every agent's derivative (synchronous: all stages read the
same snapshot).  :class:`CompiledFlow` exploits that the dynamics are linear
and time invariant: it probes the same agent derivatives once to assemble
the system matrix, forms the exact one-step map of the chosen explicit
method, and advances many steps with powers of that map.  Both produce the
same discrete trajectory up to rounding.

The compiled engine works in reduced coordinates: each ``P_i`` keeps its
first ``n-1`` columns and the last column is rebuilt from the conserved row
sums, so unit row sums cannot drift however long the run is.
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from .dynamics import MatchingProblem, agent_derivative, derivative_vector, local_views
from .state import AgentState, SwarmState

METHODS = ("euler", "rk4")


class NonFiniteStateError(FloatingPointError):
    """The state blew up; the step size is too large for the dynamics."""


def _one_step(x: np.ndarray, dt: float, method: str, rhs) -> np.ndarray:
    if method == "euler":
        return x + dt * rhs(x)
    if method == "rk4":
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt * k2)
        k4 = rhs(x + dt * k3)
        return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    raise ValueError(f"unknown method {method!r}; use one of {METHODS}")


def step(s: SwarmState, dt: float, method: str, A, B=None, H=None) -> SwarmState:
    """Advance the swarm by one explicit step of size ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    problem = A if isinstance(A, MatchingProblem) else MatchingProblem.build(A, B, H)
    n = s.n

    def rhs(x):
        return derivative_vector(SwarmState.from_vector(n, x), problem)

    with np.errstate(over="ignore", invalid="ignore"):
        x = _one_step(s.to_vector(), dt, method, rhs)
    if not np.all(np.isfinite(x)):
        raise NonFiniteStateError(f"non-finite state at t={s.t + dt}; reduce dt")
    return SwarmState.from_vector(n, x, s.t + dt)


class CompiledFlow:
    """Exact multi-step map of an explicit integrator for one problem.

    ``row_sums[i]`` is the conserved vector ``P_i 1`` of agent ``i``; it is
    baked into the affine part of the reduced system.
    """

    def __init__(self, problem: MatchingProblem, dt: float, method: str = "rk4", row_sums=None, cache_size: int = 4):
        if not dt > 0:
            raise ValueError("dt must be positive")
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; use one of {METHODS}")
        self.problem = problem
        self.dt = float(dt)
        self.method = method
        n = problem.n
        self.n = n
        self.row_sums = np.ones((n, n)) if row_sums is None else np.array(row_sums, dtype=float).reshape(n, n)
        self.agent_size = AgentState.size(n) - n
        self.size = n * self.agent_size
        self.matrix, self.offset = self._assemble()
        self._step_map = self._build_step_map()
        self._cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self._cache_size = cache_size

    @classmethod
    def for_state(cls, problem: MatchingProblem, s: SwarmState, dt: float, method: str = "rk4") -> "CompiledFlow":
        return cls(problem, dt, method, row_sums=s.stacked("P").sum(axis=2))

    def _reduce_agent(self, agent: AgentState) -> np.ndarray:
        head = np.ravel(agent.P[:, : self.n - 1])
        return np.concatenate([head, agent.to_vector()[self.n * self.n :]])

    def _expand_agent(self, block: np.ndarray, row_sum: np.ndarray) -> AgentState:
        n = self.n
        head = block[: n * (n - 1)].reshape(n, n - 1)
        P = np.empty((n, n))
        P[:, : n - 1] = head
        P[:, n - 1] = row_sum - head.sum(axis=1)
        return AgentState.from_vector(n, np.concatenate([P.ravel(), block[n * (n - 1) :]]))

    def to_reduced(self, s: SwarmState) -> np.ndarray:
        return np.concatenate([self._reduce_agent(a) for a in s.agents])

    def from_reduced(self, x: np.ndarray, t: float = 0.0, row_sums=None) -> SwarmState:
        rs = self.row_sums if row_sums is None else row_sums
        m = self.agent_size
        return SwarmState(t, tuple(self._expand_agent(x[i * m : (i + 1) * m], rs[i]) for i in range(self.n)))

    def _assemble(self) -> tuple[np.ndarray, np.ndarray]:
        # The right-hand side is linear, so each column of the system matrix is
        # the derivative of a unit state.  A unit entry in agent j only reaches
        # j and its neighbors, so only those agents are evaluated per probe.
        n, m = self.n, self.agent_size
        H = self.problem.H
        zero_rows = np.zeros((n, n))
        M = np.zeros((self.size, self.size))
        for j in range(n):
            touched = (j, *H.neighbors(j))
            for k in range(m):
                x = np.zeros(self.size)
                x[j * m + k] = 1.0
                views = local_views(self.from_reduced(x, row_sums=zero_rows), self.problem)
                for i in touched:
                    M[i * m : (i + 1) * m, j * m + k] = self._reduce_agent(agent_derivative(views[i]))
        base = self.from_reduced(np.zeros(self.size))
        c = np.concatenate([self._reduce_agent(d) for d in (agent_derivative(v) for v in local_views(base, self.problem))])
        return M, c

    def _build_step_map(self) -> np.ndarray:
        N = self.size
        G = np.zeros((N + 1, N + 1))
        G[:N, :N] = self.matrix
        G[:N, N] = self.offset
        hG = self.dt * G
        eye = np.eye(N + 1)
        if self.method == "euler":
            return eye + hG
        return eye + hG @ (eye + hG / 2.0 @ (eye + hG / 3.0 @ (eye + hG / 4.0)))

    def operator(self, steps: int) -> np.ndarray:
        """Augmented map advancing ``steps`` steps (acts on ``[x; 1]``)."""
        if steps < 1:
            raise ValueError("steps must be >= 1")
        if steps in self._cache:
            self._cache.move_to_end(steps)
            return self._cache[steps]
        with np.errstate(over="ignore", invalid="ignore"):
            op = self._compose(steps)
        self._cache[steps] = op
        while len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return op

    def _compose(self, steps: int) -> np.ndarray:
        if steps % 2 == 0 and steps // 2 in self._cache:
            half = self._cache[steps // 2]
            op = half @ half
        else:
            op, power, k = None, self._step_map, steps
            while k:
                if k & 1:
                    op = power if op is None else power @ op
                k >>= 1
                if k:
                    power = power @ power
        return op

    def advance(self, x: np.ndarray, steps: int) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.operator(steps) @ np.append(x, 1.0)
        if not np.all(np.isfinite(out)):
            raise NonFiniteStateError("non-finite state in compiled flow; reduce dt")
        return out[:-1]

    def advance_state(self, s: SwarmState, steps: int) -> SwarmState:
        return self.from_reduced(self.advance(self.to_reduced(s), steps), s.t + steps * self.dt)
