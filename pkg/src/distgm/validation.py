"""Input checks shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .graph import DimensionMismatchError, GraphValidationError, Permutation, WeightedGraph
from .distributed.topology import NetworkTopology


def check_adjacency(X, name: str = "A") -> WeightedGraph:
    """Coerce ``X`` to a validated :class:`WeightedGraph`; errors name the input."""
    if isinstance(X, WeightedGraph):
        return X
    try:
        return WeightedGraph(np.asarray(X, dtype=float))
    except (TypeError, ValueError) as exc:
        raise GraphValidationError(f"{name}: {exc}") from exc


def check_pair(A, B) -> tuple[WeightedGraph, WeightedGraph]:
    A, B = check_adjacency(A, "A"), check_adjacency(B, "B")
    if A.n != B.n:
        raise DimensionMismatchError(f"A has {A.n} vertices but B has {B.n}")
    return A, B


def check_topology(H, A: WeightedGraph) -> NetworkTopology:
    """``None`` gives the unit-weight topology of ``A``."""
    if H is None:
        return NetworkTopology.from_graph(A)
    if not isinstance(H, NetworkTopology):
        H = NetworkTopology(np.asarray(H, dtype=float))
    if H.n != A.n:
        raise DimensionMismatchError(f"topology has {H.n} agents but the graphs have {A.n} vertices")
    return H


def check_permutation(p, n: int | None = None) -> Permutation:
    if not isinstance(p, Permutation):
        arr = np.asarray(p)
        p = Permutation.from_matrix(arr) if arr.ndim == 2 else Permutation(tuple(int(v) for v in arr))
    if n is not None and p.n != n:
        raise DimensionMismatchError(f"permutation has length {p.n}, expected {n}")
    return p
