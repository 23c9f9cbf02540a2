"""Observers of a swarm snapshot: errors, residuals, KKT and Lyapunov terms.

Monitors see the whole swarm; they are measurements, not part of the
dynamics, so the locality contract does not apply here.
"""

from __future__ import annotations

import numpy as np

from ..graph import DimensionMismatchError, WeightedGraph, _as_perm
from ..projection import proj_pseudostochastic_tangent
from .dynamics import MatchingProblem, derivative
from .state import FIELD_NAMES, SwarmState

KKT_BLOCKS = ("P", "lam", "Theta", "Upsilon", "y", "z", "K")


def _problem(A, B, H) -> MatchingProblem:
    return A if isinstance(A, MatchingProblem) else MatchingProblem.build(A, B, H)


def _adj(g) -> np.ndarray:
    return g.adj if isinstance(g, WeightedGraph) else np.asarray(g, dtype=float)


def _laplacian_apply(L: np.ndarray, X: np.ndarray) -> np.ndarray:
    # row i of the result is sum_j w_ij (X_i - X_j) for a stack X of shape (n, ...)
    return np.tensordot(L, X, axes=1)


def per_agent_error(s: SwarmState, perm) -> np.ndarray:
    """``||P_i - Pi||_F^2`` for every agent."""
    Pi = _as_perm(perm).matrix()
    return ((s.stacked("P") - Pi) ** 2).sum(axis=(1, 2))


def distortion_agent(s: SwarmState, A, B=None, agent: int = 0) -> float:
    """``||P_i A - B P_i||_F^2`` for one agent (the first by default)."""
    a, b = (A.A.adj, A.B.adj) if isinstance(A, MatchingProblem) else (_adj(A), _adj(B))
    P = s.agents[agent].P
    R = P @ a - b @ P
    return float(np.sum(R * R))


def distortion_agent1(s: SwarmState, A, B=None) -> float:
    return distortion_agent(s, A, B, 0)


def consensus_residual(s: SwarmState, H) -> float:
    """``max ||P_i - P_j||_F`` over edges of the topology."""
    H = H.H if isinstance(H, MatchingProblem) else H
    P = s.stacked("P")
    return max(float(np.linalg.norm(P[i] - P[j])) for i, j, _ in H.edges())


def feasibility_residual(s: SwarmState, B) -> float:
    """``max_i ||b_i^T P_i - z_i||``."""
    b = B.B.adj if isinstance(B, MatchingProblem) else _adj(B)
    P, z = s.stacked("P"), s.stacked("z")
    bP = np.einsum("ki,ikl->il", b, P)
    return float(np.linalg.norm(bP - z, axis=1).max())


def row_sum_deviation(s: SwarmState) -> float:
    return float(np.abs(s.stacked("P").sum(axis=2) - 1.0).max())


def kkt_blocks(s: SwarmState, A, B=None, H=None) -> dict[str, np.ndarray]:
    """Per-agent norms of the seven optimality residuals, keyed by variable.

    The ``P`` block is measured after projection onto the tangent space of
    the pseudo-stochastic set.  Laplacian sums carry the edge weights ``w_ij``.
    """
    pr = _problem(A, B, H)
    n = pr.n
    a, b, L = pr.A.adj, pr.B.adj, pr.H.laplacian()
    P, y, z = s.stacked("P"), s.stacked("y"), s.stacked("z")
    K, lam, Th, Ups = s.stacked("K"), s.stacked("lam"), s.stacked("Theta"), s.stacked("Upsilon")
    idx = np.arange(n)
    r = np.einsum("ijk,ki->ij", P, a) - y
    f = np.einsum("ki,ikl->il", b, P) - z
    lap_Th, lap_P, lap_K, lap_U = (_laplacian_apply(L, X) for X in (Th, P, K, Ups))
    grad_P = np.einsum("ij,ki->ijk", r, a) + np.einsum("ki,il->ikl", b, lam) + lap_Th
    YZ = np.zeros((n, n, n))
    YZ[idx, :, idx] += y
    YZ[idx, idx, :] -= z
    return {
        "P": np.linalg.norm(proj_pseudostochastic_tangent(grad_P), axis=(1, 2)),
        "lam": np.linalg.norm(f, axis=1),
        "Theta": np.linalg.norm(lap_P, axis=(1, 2)),
        "Upsilon": np.linalg.norm(YZ - lap_K, axis=(1, 2)),
        "y": np.linalg.norm(-r + Ups[idx, :, idx], axis=1),
        "z": np.linalg.norm(-lam - Ups[idx, idx, :], axis=1),
        "K": np.linalg.norm(lap_U, axis=(1, 2)),
    }


def kkt_residual(s: SwarmState, A, B=None, H=None) -> float:
    return float(max(v.max() for v in kkt_blocks(s, A, B, H).values()))


def derivative_norms(s: SwarmState, A, B=None, H=None) -> dict[str, float]:
    """Largest per-agent norm of each derivative block."""
    ds = derivative(s, _problem(A, B, H))
    return {k: float(max(np.linalg.norm(getattr(d, k)) for d in ds)) for k in FIELD_NAMES}


def coupling_gap(s: SwarmState) -> float:
    """``||Y - Z||_F`` with ``Y = [y_1 .. y_n]`` and ``Z`` stacking the ``z_i`` as rows."""
    return float(np.linalg.norm(s.stacked("y").T - s.stacked("z")))


def _check_same(s: SwarmState, q: SwarmState) -> None:
    if s.n != q.n:
        raise DimensionMismatchError(f"swarm has {s.n} agents, reference has {q.n}")


def lyapunov(s: SwarmState, q_star: SwarmState) -> float:
    """``V = ||Q - Q*||_F^2 / 2`` over all blocks of all agents."""
    _check_same(s, q_star)
    d = s.to_vector() - q_star.to_vector()
    return 0.5 * float(d @ d)


def dV_analytic(s: SwarmState, q_star: SwarmState, A, B=None, H=None) -> float:
    """Closed-form time derivative of :func:`lyapunov` along the dynamics."""
    _check_same(s, q_star)
    pr = _problem(A, B, H)
    a, b = pr.A.adj, pr.B.adj
    P, y, z, Ups = s.stacked("P"), s.stacked("y"), s.stacked("z"), s.stacked("Upsilon")
    dP, dy = P - q_star.stacked("P"), y - q_star.stacked("y")
    r = np.einsum("ijk,ki->ij", dP, a) - dy
    f = np.einsum("ki,ikl->il", b, P) - z
    total = -float(np.sum(r * r) + np.sum(f * f))
    for i, j, w in pr.H.edges():
        total -= w * float(np.sum((P[i] - P[j]) ** 2) + np.sum((Ups[i] - Ups[j]) ** 2))
    return total


def dV_chain(s: SwarmState, q_star: SwarmState, A, B=None, H=None) -> float:
    """``<dQ/dt, Q - Q*>`` evaluated with the actual derivative."""
    _check_same(s, q_star)
    ds = derivative(s, _problem(A, B, H))
    dq = np.concatenate([d.to_vector() for d in ds])
    return float(dq @ (s.to_vector() - q_star.to_vector()))
