"""Built-in six-vertex reference instance.

``B`` is a relabeling of ``A`` under ``REFERENCE_PERMUTATION`` (0-based map,
``Pi[i, map[i]] = 1``), so ``A = Pi^T B Pi``.  Both graphs are asymmetric.
"""

from __future__ import annotations

import numpy as np

from .graph import Permutation, WeightedGraph

_A = np.array(
    [
        [0.0, 1.0, 0.0, 0.0, 0.95, 0.0],
        [1.0, 0.0, 0.9, 0.0, 0.85, 0.0],
        [0.0, 0.9, 0.0, 1.5, 0.0, 0.0],
        [0.0, 0.0, 1.5, 0.0, 1.75, 0.0],
        [0.95, 0.85, 0.0, 1.75, 0.0, 0.8],
        [0.0, 0.0, 0.0, 0.0, 0.8, 0.0],
    ]
)

_B = np.array(
    [
        [0.0, 0.0, 0.95, 1.75, 0.8, 0.85],
        [0.0, 0.0, 0.0, 1.5, 0.0, 0.9],
        [0.95, 0.0, 0.0, 0.0, 0.0, 1.0],
        [1.75, 1.5, 0.0, 0.0, 0.0, 0.0],
        [0.8, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.85, 0.9, 1.0, 0.0, 0.0, 0.0],
    ]
)

REFERENCE_PERMUTATION = Permutation((4, 2, 0, 3, 5, 1))


def reference_graphs() -> tuple[WeightedGraph, WeightedGraph]:
    return WeightedGraph(_A), WeightedGraph(_B)


def reference_instance():
    """``(A, B, H, Pi)`` with ``H`` the unit-weight topology of ``A``."""
    from .distributed.topology import NetworkTopology

    A, B = reference_graphs()
    return A, B, NetworkTopology.from_graph(A), REFERENCE_PERMUTATION
