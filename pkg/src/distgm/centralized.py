"""Centralized solvers: exhaustive matching and the pseudo-stochastic relaxation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from .graph import (
    DimensionMismatchError,
    Permutation,
    WeightedGraph,
    _as_graph,
    enumerate_permutations,
)
from .projection import hungarian_project, proj_pseudostochastic_tangent

EXACT_GM_CAP = 9
# relative to ||A||_F^2; tight enough that ill-conditioned pairs land within 1e-6 of the optimum
DEFAULT_GRAD_TOL = 1e-13


class RGMConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CentralizedConfig:
    """Settings for :func:`solve_rgm`.

    ``method="cg"`` runs conjugate gradients on the tangent space of the
    pseudo-stochastic set with exact line search; ``method="pgd"`` is plain
    projected gradient descent with ``step_size`` (``"auto"`` gives
    ``1 / (4 (||A||_F^2 + ||B||_F^2))``), optionally halving the step while
    the objective fails to decrease.  ``grad_tol=None`` means
    ``1e-13 * ||A||_F^2``.
    """

    step_size: Union[float, Literal["auto"]] = "auto"
    max_iters: int = 200_000
    grad_tol: float | None = None
    method: Literal["cg", "pgd"] = "cg"
    backtracking: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.grad_tol is not None and self.grad_tol < 0:
            raise ValueError("grad_tol must be >= 0")
        if self.step_size != "auto" and not float(self.step_size) > 0:
            raise ValueError("step_size must be positive or 'auto'")
        if self.method not in ("cg", "pgd"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class RGMResult:
    P: np.ndarray
    objective: float
    grad_norm: float
    iterations: int
    converged: bool


def _check_pair(A, B) -> tuple[WeightedGraph, WeightedGraph]:
    A, B = _as_graph(A), _as_graph(B)
    if A.n != B.n:
        raise DimensionMismatchError(f"graphs have different sizes: {A.n} vs {B.n}")
    return A, B


def exact_gm(A, B, cap: int = EXACT_GM_CAP) -> tuple[Permutation, float]:
    """Exhaustive minimiser of ``||A - P^T B P||_F`` over all ``n!`` permutations.

    Ties go to the lexicographically smallest permutation map.
    """
    A, B = _check_pair(A, B)
    n = A.n
    if n > cap:
        raise ValueError(f"exact_gm enumerates n! permutations; n={n} exceeds cap {cap}")
    a, b = A.adj, B.adj
    best, best_val = None, np.inf
    for perms in enumerate_permutations(n):
        d2 = ((a[perms[:, :, None], perms[:, None, :]] - b[None]) ** 2).sum(axis=(1, 2))
        k = int(np.argmin(d2))
        if d2[k] < best_val:
            best_val, best = float(d2[k]), perms[k]
    return Permutation(tuple(best)), float(np.sqrt(best_val))


def rgm_objective(P, A, B) -> float:
    """``||P A - B P||_F^2``."""
    R = P @ A - B @ P
    return float(np.sum(R * R))


def rgm_gradient(P, A, B) -> np.ndarray:
    # valid for symmetric A, B
    R = P @ A - B @ P
    return 2.0 * (R @ A - B @ R)


def _auto_step(a, b) -> float:
    return 1.0 / (4.0 * (np.sum(a * a) + np.sum(b * b)))


def solve_rgm(A, B, cfg: CentralizedConfig | None = None, P0=None) -> RGMResult:
    """Minimise ``||P A - B P||_F^2`` over matrices with unit row sums.

    Starts from the barycenter ``11^T/n`` unless ``P0`` is given (it must have
    unit row sums).  Every search direction is a projected gradient, so all
    iterates keep unit row sums.  If ``max_iters`` runs out first the last
    iterate is returned with ``converged=False`` and a warning.
    """
    A, B = _check_pair(A, B)
    cfg = cfg or CentralizedConfig()
    a, b = A.adj, B.adj
    n = A.n
    tol = cfg.grad_tol if cfg.grad_tol is not None else DEFAULT_GRAD_TOL * A.frobenius() ** 2
    P = np.full((n, n), 1.0 / n) if P0 is None else np.array(P0, dtype=float)
    if cfg.method == "cg":
        P, it, g = _cg(P, a, b, tol, cfg.max_iters)
    else:
        P, it, g = _pgd(P, a, b, tol, cfg)
    gnorm = float(np.linalg.norm(g))
    converged = gnorm <= tol
    if not converged:
        warnings.warn(
            f"solve_rgm stopped after {it} iterations with gradient norm {gnorm:.3e} > {tol:.3e}",
            RGMConvergenceWarning,
            stacklevel=2,
        )
    return RGMResult(P=P, objective=rgm_objective(P, a, b), grad_norm=gnorm, iterations=it, converged=converged)


def _pgd(P, a, b, tol, cfg):
    eta = _auto_step(a, b) if cfg.step_size == "auto" else float(cfg.step_size)
    g = proj_pseudostochastic_tangent(rgm_gradient(P, a, b))
    f = rgm_objective(P, a, b)
    it = 0
    while it < cfg.max_iters and np.linalg.norm(g) > tol:
        it += 1
        Pn = P - eta * g
        fn = rgm_objective(Pn, a, b)
        if cfg.backtracking:
            while fn > f and eta > 1e-300:
                eta *= 0.5
                Pn = P - eta * g
                fn = rgm_objective(Pn, a, b)
        P, f = Pn, fn
        g = proj_pseudostochastic_tangent(rgm_gradient(P, a, b))
    return P, it, g


def _cg(P, a, b, tol, max_iters):
    n = P.shape[0]
    restart = max(1, n * (n - 1))
    g = proj_pseudostochastic_tangent(rgm_gradient(P, a, b))
    d = -g
    gg = float(np.sum(g * g))
    it = 0
    while it < max_iters and np.sqrt(gg) > tol:
        it += 1
        Hd = proj_pseudostochastic_tangent(rgm_gradient(d, a, b))
        curv = float(np.sum(d * Hd))
        if curv <= 0:
            break
        P = P + (-float(np.sum(g * d)) / curv) * d
        g_new = proj_pseudostochastic_tangent(rgm_gradient(P, a, b))
        gg_new = float(np.sum(g_new * g_new))
        if it % restart == 0:
            beta = 0.0
        else:
            beta = max(0.0, float(np.sum(g_new * (g_new - g))) / gg)
        d = -g_new + beta * d
        g, gg = g_new, gg_new
    return P, it, g


def solve_gm_centralized(A, B, cfg: CentralizedConfig | None = None) -> Permutation:
    """Relax, solve, then project onto permutations with the Hungarian method."""
    return hungarian_project(solve_rgm(A, B, cfg).P)
