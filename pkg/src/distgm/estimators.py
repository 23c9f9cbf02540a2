"""Estimator-style wrappers around the matching solvers.

``fit(A, B)`` learns the permutation matching the pair, ``transform(X)``
relabels a graph on B's vertex set onto A's labels (``Pi^T X Pi``), and
``score(A, B)`` is the negated distortion, so larger is better.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .centralized import EXACT_GM_CAP, CentralizedConfig, exact_gm, solve_rgm
from .distributed.runner import RunConfig, run
from .graph import distortion
from .projection import hungarian_project
from .validation import check_adjacency, check_pair, check_topology


class _MatcherMixin:
    def transform(self, X):
        check_is_fitted(self, "permutation_")
        X = check_adjacency(X, "X")
        p = np.asarray(self.permutation_.map)
        inv = np.argsort(p)
        return X.adj[np.ix_(inv, inv)]

    def fit_transform(self, A, B):
        return self.fit(A, B).transform(B)

    def score(self, A, B) -> float:
        check_is_fitted(self, "permutation_")
        A, B = check_pair(A, B)
        return -distortion(A, B, self.permutation_)


class ExhaustiveMatcher(_MatcherMixin, BaseEstimator):
    """Exact matching by enumerating all permutations (small ``n`` only)."""

    def __init__(self, cap: int = EXACT_GM_CAP):
        self.cap = cap

    def fit(self, A, B):
        A, B = check_pair(A, B)
        self.permutation_, self.distortion_ = exact_gm(A, B, self.cap)
        self.n_vertices_ = A.n
        return self


class RelaxedMatcher(_MatcherMixin, BaseEstimator):
    """Relax to unit-row-sum matrices, solve, then project with the Hungarian method."""

    def __init__(self, method="cg", step_size="auto", max_iters=200_000, grad_tol=None, backtracking=False):
        self.method = method
        self.step_size = step_size
        self.max_iters = max_iters
        self.grad_tol = grad_tol
        self.backtracking = backtracking

    def fit(self, A, B):
        A, B = check_pair(A, B)
        cfg = CentralizedConfig(
            step_size=self.step_size,
            max_iters=self.max_iters,
            grad_tol=self.grad_tol,
            method=self.method,
            backtracking=self.backtracking,
        )
        self.result_ = solve_rgm(A, B, cfg)
        self.P_ = self.result_.P
        self.permutation_ = hungarian_project(self.P_)
        self.distortion_ = distortion(A, B, self.permutation_)
        self.n_vertices_ = A.n
        return self


class DistributedMatcher(_MatcherMixin, BaseEstimator):
    """Simulated multi-agent matching; agent ``i`` holds column ``i`` of A and B.

    ``topology=None`` lets the agents communicate along the edges of A with
    unit weights.
    """

    def __init__(
        self,
        topology=None,
        dt=1e-3,
        method="rk4",
        max_time=50_000.0,
        trace_stride=1000,
        stop_mode="round-consistent",
        engine="compiled",
        stride_doubling=None,
        distortion_tol=None,
        kkt_tol=1e-8,
        init="barycenter",
        random_state=None,
    ):
        self.topology = topology
        self.dt = dt
        self.method = method
        self.max_time = max_time
        self.trace_stride = trace_stride
        self.stop_mode = stop_mode
        self.engine = engine
        self.stride_doubling = stride_doubling
        self.distortion_tol = distortion_tol
        self.kkt_tol = kkt_tol
        self.init = init
        self.random_state = random_state

    def fit(self, A, B, reference=None):
        A, B = check_pair(A, B)
        H = check_topology(self.topology, A)
        cfg = RunConfig(
            dt=self.dt,
            method=self.method,
            max_time=self.max_time,
            trace_stride=self.trace_stride,
            stop_mode=self.stop_mode,
            engine=self.engine,
            stride_doubling=self.stride_doubling,
            distortion_tol=self.distortion_tol,
            kkt_tol=self.kkt_tol,
            init=self.init,
            seed=self.random_state,
            reference=reference,
        )
        perms, self.trace_, self.report_, self.state_ = run(A, B, H, cfg)
        self.agent_permutations_ = perms
        self.permutation_ = self.report_.permutation
        self.converged_ = self.report_.converged
        self.n_vertices_ = A.n
        return self
