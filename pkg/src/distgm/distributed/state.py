"""Per-agent and swarm state containers with a flat-vector adapter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..projection import to_pseudostochastic

# Field order defines the flat layout of one agent.
FIELD_NAMES = ("P", "y", "z", "K", "lam", "Theta", "Upsilon")


def _shapes(n: int) -> dict[str, tuple[int, ...]]:
    return {"P": (n, n), "y": (n,), "z": (n,), "K": (n, n), "lam": (n,), "Theta": (n, n), "Upsilon": (n, n)}


@dataclass(frozen=True, eq=False)
class AgentState:
    """One agent's variables.

    ``P`` estimates the matching, ``y`` the agent's column of ``P A``, ``z``
    its row of ``B P``, ``K`` is the coupling compensator, and ``lam``,
    ``Theta``, ``Upsilon`` are the multipliers of the row, consensus and
    coupling constraints.  The same container carries time derivatives.
    """

    P: np.ndarray
    y: np.ndarray
    z: np.ndarray
    K: np.ndarray
    lam: np.ndarray
    Theta: np.ndarray
    Upsilon: np.ndarray

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @staticmethod
    def size(n: int) -> int:
        return 4 * n * n + 3 * n

    @classmethod
    def zeros(cls, n: int) -> "AgentState":
        return cls(**{k: np.zeros(s) for k, s in _shapes(n).items()})

    def to_vector(self) -> np.ndarray:
        return np.concatenate([np.ravel(getattr(self, k)) for k in FIELD_NAMES])

    @classmethod
    def from_vector(cls, n: int, vec) -> "AgentState":
        vec = np.asarray(vec, dtype=float)
        out, offset = {}, 0
        for k, shape in _shapes(n).items():
            size = int(np.prod(shape))
            out[k] = vec[offset : offset + size].reshape(shape)
            offset += size
        return cls(**out)


@dataclass(frozen=True, eq=False)
class SwarmState:
    t: float
    agents: tuple[AgentState, ...]

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        dims = {a.n for a in self.agents}
        if len(dims) != 1 or dims.pop() != len(self.agents):
            raise ValueError("swarm needs n agents, each holding n-dimensional variables")

    @property
    def n(self) -> int:
        return len(self.agents)

    def stacked(self, name: str) -> np.ndarray:
        return np.stack([getattr(a, name) for a in self.agents])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([a.to_vector() for a in self.agents])

    @classmethod
    def from_vector(cls, n: int, vec, t: float = 0.0) -> "SwarmState":
        vec = np.asarray(vec, dtype=float)
        m = AgentState.size(n)
        if vec.shape != (n * m,):
            raise ValueError(f"expected a vector of length {n * m}, got {vec.shape}")
        return cls(t, tuple(AgentState.from_vector(n, vec[i * m : (i + 1) * m]) for i in range(n)))

    def with_time(self, t: float) -> "SwarmState":
        return SwarmState(t, self.agents)


def init_swarm(A, B, H, mode: str = "barycenter", seed=None, scale: float = 0.1) -> SwarmState:
    """Initial swarm with every ``P_i`` in the pseudo-stochastic set.

    ``"barycenter"``: ``P_i = 11^T/n`` and all other variables zero.
    ``"random"``: ``P_i`` is a Gaussian matrix with rows shifted to unit sum,
    all other variables Gaussian with standard deviation ``scale``.
    """
    from .dynamics import MatchingProblem

    problem = MatchingProblem.build(A, B, H)
    n = problem.n
    if mode == "barycenter":
        agents = []
        for _ in range(n):
            vals = {k: np.zeros(s) for k, s in _shapes(n).items()}
            vals["P"] = np.full((n, n), 1.0 / n)
            agents.append(AgentState(**vals))
        return SwarmState(0.0, tuple(agents))
    if mode == "random":
        rng = np.random.default_rng(seed)
        agents = []
        for _ in range(n):
            vals = {k: scale * rng.standard_normal(s) for k, s in _shapes(n).items()}
            vals["P"] = to_pseudostochastic(rng.standard_normal((n, n)))
            agents.append(AgentState(**vals))
        return SwarmState(0.0, tuple(agents))
    raise ValueError(f"unknown init mode {mode!r}; use 'barycenter' or 'random'")
