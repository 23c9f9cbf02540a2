from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..graph import WeightedGraph, _is_connected


class TopologyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NetworkTopology:
    """Communication graph of the agents with symmetric edge weights ``w_ij``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise TopologyError(f"topology weights must be square, got shape {w.shape}")
        if w.shape[0] < 2:
            raise TopologyError("topology needs at least 2 agents")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise TopologyError("topology weights must be finite and nonnegative")
        if not np.array_equal(w, w.T):
            raise TopologyError("topology weights must be symmetric")
        if np.any(np.diag(w) != 0):
            raise TopologyError("topology weights must have a zero diagonal")
        if not _is_connected(w):
            raise TopologyError("topology is not connected: every agent must be reachable")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(
            self, "_neighbors", tuple(tuple(int(j) for j in np.flatnonzero(w[i])) for i in range(w.shape[0]))
        )

    @classmethod
    def from_graph(cls, graph: WeightedGraph, unit_weights: bool = True) -> "NetworkTopology":
        adj = graph.adj
        return cls((adj > 0).astype(float) if unit_weights else adj.copy())

    @classmethod
    def random(cls, n: int, density: float = 0.5, seed=None) -> "NetworkTopology":
        from ..graph import random_graph

        return cls.from_graph(random_graph(n, density, seed=seed))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._neighbors[i]

    def edges(self) -> list[tuple[int, int, float]]:
        """Unordered edges ``(i, j, w_ij)`` with ``i < j``."""
        return [(i, j, float(self.weights[i, j])) for i in range(self.n) for j in self._neighbors[i] if i < j]

    def laplacian(self) -> np.ndarray:
        return np.diag(self.weights.sum(axis=1)) - self.weights
