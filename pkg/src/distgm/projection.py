"""Projections onto the pseudo-stochastic set and onto permutations."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .graph import Permutation


class NotAPermutation(ValueError):
    """Entrywise rounding did not produce a permutation matrix."""


@lru_cache(maxsize=64)
def tangent_projector(n: int) -> np.ndarray:
    """``I - (1/n) 1 1^T``, cached per dimension and read-only."""
    P = np.eye(n) - np.full((n, n), 1.0 / n)
    P.setflags(write=False)
    return P


def proj_hyperplane(v) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the subspace orthogonal to ``1``."""
    v = np.asarray(v, dtype=float)
    return tangent_projector(v.shape[0]) @ v


def proj_pseudostochastic_tangent(V) -> np.ndarray:
    """Project every row of ``V`` onto the zero-sum hyperplane: ``V (I - 11^T/n)``.

    Applied to a derivative it keeps a trajectory inside the set of matrices
    with unit row sums.
    """
    V = np.asarray(V, dtype=float)
    return V @ tangent_projector(V.shape[1])


def to_pseudostochastic(M) -> np.ndarray:
    """Affine projection onto ``{P : P 1 = 1}``: shift each row to unit sum."""
    M = np.asarray(M, dtype=float)
    return M - (M.sum(axis=1, keepdims=True) - 1.0) / M.shape[1]


def _min_cost_assignment(cost: np.ndarray) -> list[int]:
    # Shortest augmenting path with row/column potentials, O(n^3).
    # Rows are inserted in index order; on equal reduced cost the lowest
    # column index wins because only strict improvements replace the pick.
    n = cost.shape[0]
    c = cost.tolist()
    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    owner = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = owner[j0]
            row = c[i0 - 1]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[owner[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    assign = [0] * n
    for j in range(1, n + 1):
        assign[owner[j] - 1] = j - 1
    return assign


def hungarian_project(P) -> Permutation:
    """Permutation maximising ``tr(Pi^T P)`` (maximum-profit linear assignment).

    Solved as a minimum-cost assignment on ``max(P) - P`` with the Hungarian
    method.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValueError("matrix has non-finite entries")
    return Permutation(tuple(_min_cost_assignment(P.max() - P)))


def round_project(P) -> Permutation:
    """Snap each entry to the nearer of {0, 1}; fail unless that is a permutation.

    Succeeds whenever ``P`` lies within Frobenius distance 1/2 of a permutation
    matrix.  Exact halves round down.
    """
    P = np.asarray(P, dtype=float)
    R = (P > 0.5).astype(int)
    if not (np.all(R.sum(axis=0) == 1) and np.all(R.sum(axis=1) == 1)):
        raise NotAPermutation("rounded matrix is not a permutation matrix")
    return Permutation(tuple(int(j) for j in R.argmax(axis=1)))


def try_round_project(P) -> Permutation | None:
    try:
        return round_project(P)
    except NotAPermutation:
        return None
