"""Weighted undirected graphs, vertex permutations and spectral diagnostics."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_AUTOMORPHISM_CAP = 9


class GraphValidationError(ValueError):
    """Raised when an adjacency matrix violates the graph invariants."""


class DimensionMismatchError(ValueError):
    pass


class UnfriendlyGraphError(ValueError):
    pass


def _is_connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(adj[i]):
            if not seen[j]:
                seen[j] = True
                stack.append(j)
    return bool(seen.all())


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph with a symmetric, nonnegative, zero-diagonal adjacency.

    The stored matrix is exactly symmetric (the upper triangle is mirrored) and
    read-only.  Construction fails with :class:`GraphValidationError` when the
    input is not square, not symmetric within ``sym_tol``, has a nonzero
    diagonal, negative or non-finite entries, or is disconnected.
    """

    adj: np.ndarray
    sym_tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        a = np.array(self.adj, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphValidationError(f"adjacency must be square, got shape {a.shape}")
        n = a.shape[0]
        if n < 2:
            raise GraphValidationError("a graph needs at least 2 vertices")
        if not np.all(np.isfinite(a)):
            raise GraphValidationError("adjacency has non-finite entries")
        scale = max(1.0, float(np.abs(a).max()))
        if np.abs(a - a.T).max() > self.sym_tol * scale:
            raise GraphValidationError("adjacency is not symmetric")
        if np.any(np.diag(a) != 0):
            raise GraphValidationError("adjacency has nonzero diagonal (self-loops)")
        if np.any(a < 0):
            raise GraphValidationError("adjacency has negative weights")
        upper = np.triu(a, 1)
        a = upper + upper.T
        if not _is_connected(a):
            raise GraphValidationError("graph is not connected")
        a.setflags(write=False)
        object.__setattr__(self, "adj", a)

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def column(self, i: int) -> np.ndarray:
        """Copy of the i-th adjacency column (the only slice an agent may hold)."""
        return self.adj[:, i].copy()

    def edges(self) -> list[tuple[int, int, float]]:
        iu, ju = np.nonzero(np.triu(self.adj, 1))
        return [(int(i), int(j), float(self.adj[i, j])) for i, j in zip(iu, ju)]

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.adj))

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self.adj.shape == other.adj.shape and bool(np.array_equal(self.adj, other.adj))

    def __hash__(self):
        return hash(self.adj.tobytes())


@dataclass(frozen=True)
class Permutation:
    """Bijection ``i -> map[i]`` on ``0..n-1``.

    The matrix view ``M`` has ``M[i, map[i]] = 1``.  A pair is matched when
    ``A = M.T @ B @ M``, equivalently ``B[i, j] = A[map[i], map[j]]``: vertex
    ``i`` of B corresponds to vertex ``map[i]`` of A.
    """

    map: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.map)
        if sorted(m) != list(range(len(m))):
            raise ValueError(f"not a bijection on 0..{len(m) - 1}: {m}")
        object.__setattr__(self, "map", m)

    @property
    def n(self) -> int:
        return len(self.map)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_matrix(cls, M) -> "Permutation":
        M = np.asarray(M)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("permutation matrix must be square")
        if not np.all((M == 0) | (M == 1)):
            raise ValueError("permutation matrix entries must be 0 or 1")
        if not (np.all(M.sum(axis=0) == 1) and np.all(M.sum(axis=1) == 1)):
            raise ValueError("permutation matrix must have one 1 per row and column")
        return cls(tuple(int(j) for j in M.argmax(axis=1)))

    @classmethod
    def random(cls, n: int, seed=None) -> "Permutation":
        return cls(tuple(np.random.default_rng(seed).permutation(n)))

    def matrix(self) -> np.ndarray:
        M = np.zeros((self.n, self.n))
        M[np.arange(self.n), self.map] = 1.0
        return M

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.map):
            inv[j] = i
        return Permutation(tuple(inv))

    def __len__(self):
        return self.n

    def one_based(self) -> list[tuple[int, int]]:
        return [(i + 1, j + 1) for i, j in enumerate(self.map)]


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    min_gap: float
    spectral_radius: float
    min_alignment: float
    max_alignment: float
    gap_tol: float
    align_tol: float

    @property
    def friendly(self) -> bool:
        return self.min_gap > self.gap_tol and self.min_alignment > self.align_tol

    def as_dict(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "min_gap": self.min_gap,
            "spectral_radius": self.spectral_radius,
            "min_alignment": self.min_alignment,
            "max_alignment": self.max_alignment,
            "gap_tol": self.gap_tol,
            "align_tol": self.align_tol,
            "friendly": self.friendly,
        }


def _as_graph(g) -> WeightedGraph:
    return g if isinstance(g, WeightedGraph) else WeightedGraph(np.asarray(g, dtype=float))


def _as_perm(p) -> Permutation:
    if isinstance(p, Permutation):
        return p
    arr = np.asarray(p)
    return Permutation.from_matrix(arr) if arr.ndim == 2 else Permutation(tuple(arr))


def distortion(A, B, perm) -> float:
    """Frobenius adjacency disagreement ``||A - P^T B P||_F``."""
    A, B, perm = _as_graph(A), _as_graph(B), _as_perm(perm)
    if not (A.n == B.n == perm.n):
        raise DimensionMismatchError(f"sizes differ: A={A.n}, B={B.n}, perm={perm.n}")
    p = np.asarray(perm.map)
    return float(np.linalg.norm(A.adj[np.ix_(p, p)] - B.adj))


def relabel(A, perm) -> WeightedGraph:
    """Return ``B = P A P^T`` so that ``perm`` matches the pair ``(A, B)``."""
    A, perm = _as_graph(A), _as_perm(perm)
    if A.n != perm.n:
        raise DimensionMismatchError(f"sizes differ: A={A.n}, perm={perm.n}")
    p = np.asarray(perm.map)
    return WeightedGraph(A.adj[np.ix_(p, p)])


def random_graph(n: int, density: float = 0.5, weight_range=(0.5, 2.0), seed=None) -> WeightedGraph:
    """Connected random weighted graph.

    A random spanning tree is drawn first (each vertex, in random order,
    attaches to a uniformly chosen earlier one), then extra edges are added
    uniformly at random until ``round(density * n(n-1)/2)`` edges exist.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    lo, hi = map(float, weight_range)
    if not 0 < lo <= hi:
        raise ValueError("weight_range must be a positive interval")
    rng = np.random.default_rng(seed)
    mask = np.zeros((n, n), dtype=bool)
    order = rng.permutation(n)
    for k in range(1, n):
        i, j = order[k], order[rng.integers(k)]
        mask[i, j] = mask[j, i] = True
    free = [(i, j) for i in range(n) for j in range(i + 1, n) if not mask[i, j]]
    extra = max(0, int(round(density * n * (n - 1) / 2)) - (n - 1))
    for idx in rng.permutation(len(free))[:extra]:
        i, j = free[idx]
        mask[i, j] = mask[j, i] = True
    w = np.triu(rng.uniform(lo, hi, size=(n, n)), 1)
    adj = np.where(mask, w + w.T, 0.0)
    return WeightedGraph(adj)


def friendliness(A, gap_tol: float | None = None, align_tol: float | None = None) -> SpectralReport:
    """Spectral friendliness diagnostics of a graph.

    A graph is friendly when its adjacency has a simple spectrum and no
    eigenvector is orthogonal to the all-ones vector.  Both conditions are
    tested against scale-relative thresholds: ``gap_tol`` defaults to
    ``1e-8 * spectral_radius`` and ``align_tol`` to ``1e-8 * sqrt(n)``.
    """
    A = _as_graph(A)
    try:
        lam, U = np.linalg.eigh(A.adj)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigensolver failed on degenerate input: {exc}") from exc
    radius = float(np.abs(lam).max())
    gaps = np.diff(lam)
    align = np.abs(U.sum(axis=0))
    if gap_tol is None:
        gap_tol = 1e-8 * radius
    if align_tol is None:
        align_tol = 1e-8 * math.sqrt(A.n)
    return SpectralReport(
        eigenvalues=lam,
        eigenvectors=U,
        min_gap=float(gaps.min()),
        spectral_radius=radius,
        min_alignment=float(align.min()),
        max_alignment=float(align.max()),
        gap_tol=float(gap_tol),
        align_tol=float(align_tol),
    )


def automorphism_count(A, cap: int = DEFAULT_AUTOMORPHISM_CAP, tol: float | None = None) -> int:
    """Number of permutations ``p`` with ``distortion(A, A, p) < tol``.

    ``tol`` defaults to ``1e-9 * ||A||_F``.  The search is a backtracking
    enumeration of all ``n!`` permutations that prunes a branch as soon as one
    assigned entry already differs by ``tol`` or more (a necessary condition
    for the Frobenius test to fail); surviving leaves are checked exactly.
    """
    A = _as_graph(A)
    n = A.n
    if n > cap:
        raise ValueError(f"automorphism_count is exhaustive; n={n} exceeds cap {cap}")
    a = A.adj
    if tol is None:
        tol = 1e-9 * A.frobenius()
    images = [-1] * n
    used = [False] * n
    count = 0

    def extend(k: int) -> None:
        nonlocal count
        if k == n:
            p = np.asarray(images)
            if np.linalg.norm(a - a[np.ix_(p, p)]) < tol:
                count += 1
            return
        for v in range(n):
            if used[v]:
                continue
            if any(abs(a[k, i] - a[v, images[i]]) >= tol for i in range(k)):
                continue
            images[k] = v
            used[v] = True
            extend(k + 1)
            used[v] = False
        images[k] = -1

    extend(0)
    return count


def perturb(B, rho: float, seed=None) -> WeightedGraph:
    """Return ``B + rho R`` with ``R`` symmetric, zero-diagonal, ``||R||_F = 1``.

    ``R`` is nonnegative where ``B`` has no edge; entries that would turn
    negative are clamped to zero, which only shrinks the perturbation.
    """
    B = _as_graph(B)
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    if rho == 0:
        return B
    n = B.n
    rng = np.random.default_rng(seed)
    R = np.triu(rng.standard_normal((n, n)), 1)
    R = R + R.T
    R = np.where(B.adj == 0, np.abs(R), R)
    np.fill_diagonal(R, 0.0)
    R /= np.linalg.norm(R)
    out = np.clip(B.adj + rho * R, 0.0, None)
    np.fill_diagonal(out, 0.0)
    return WeightedGraph(out)


def noise_bound(A, eps: float | None = None, report: SpectralReport | None = None) -> float:
    """Largest perturbation radius for which relaxed recovery is guaranteed.

    ``min(sqrt(2) sigma, delta^2 eps^4 / (12 sigma n^1.5))`` with ``sigma`` the
    spectral radius and ``delta`` the minimal eigenvalue gap of ``A``.  ``eps``
    must satisfy ``eps < |u_i . 1| < 1/eps`` for every unit eigenvector; when
    omitted it defaults to ``0.9 * min(min_alignment, 1/max_alignment)``.
    """
    A = _as_graph(A)
    if report is None:
        report = friendliness(A)
    if not report.friendly:
        raise UnfriendlyGraphError("noise_bound requires a friendly graph")
    if eps is None:
        eps = 0.9 * min(report.min_alignment, 1.0 / report.max_alignment)
    if not (0 < eps < report.min_alignment and report.max_alignment < 1.0 / eps):
        raise ValueError(
            f"eps={eps} must satisfy eps < {report.min_alignment} and {report.max_alignment} < 1/eps"
        )
    sigma, delta, n = report.spectral_radius, report.min_gap, A.n
    return float(min(math.sqrt(2.0) * sigma, delta**2 * eps**4 / (12.0 * sigma * n**1.5)))


def graph_from_edges(n: int, edges: Sequence[Sequence[float]]) -> WeightedGraph:
    adj = np.zeros((n, n))
    seen = set()
    for k, e in enumerate(edges):
        if len(e) != 3:
            raise GraphValidationError(f"edge {k} must be [i, j, w], got {e!r}")
        i, j, w = e
        if int(i) != i or int(j) != j:
            raise GraphValidationError(f"edge {k}: indices must be integers")
        i, j, w = int(i), int(j), float(w)
        if not (0 <= i < n and 0 <= j < n):
            raise GraphValidationError(f"edge {k}: index out of range 0..{n - 1}")
        if i == j:
            raise GraphValidationError(f"edge {k}: self-loop on vertex {i}")
        if i > j:
            raise GraphValidationError(f"edge {k}: expected i < j, got ({i}, {j})")
        if not w > 0 or not math.isfinite(w):
            raise GraphValidationError(f"edge {k}: weight must be positive and finite")
        if (i, j) in seen:
            raise GraphValidationError(f"edge {k}: duplicate edge ({i}, {j})")
        seen.add((i, j))
        adj[i, j] = adj[j, i] = w
    return WeightedGraph(adj)


def enumerate_permutations(n: int, chunk: int = 40320):
    """Yield ``(k, n)`` integer arrays of permutations in lexicographic order."""
    it = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.intp)
