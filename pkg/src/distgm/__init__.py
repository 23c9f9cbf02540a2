"""Graph matching by convex relaxation, centrally or by a simulated agent network."""

from .centralized import CentralizedConfig, RGMConvergenceWarning, RGMResult, exact_gm, solve_gm_centralized, solve_rgm
from .distributed import NetworkTopology, RunConfig, init_swarm, run
from .estimators import DistributedMatcher, ExhaustiveMatcher, RelaxedMatcher
from .graph import (
    DimensionMismatchError,
    GraphValidationError,
    Permutation,
    SpectralReport,
    UnfriendlyGraphError,
    WeightedGraph,
    automorphism_count,
    distortion,
    friendliness,
    noise_bound,
    perturb,
    random_graph,
    relabel,
)
from .projection import NotAPermutation, hungarian_project, proj_hyperplane, proj_pseudostochastic_tangent, round_project

__version__ = "0.1.0"

__all__ = [
    "CentralizedConfig",
    "DimensionMismatchError",
    "DistributedMatcher",
    "ExhaustiveMatcher",
    "GraphValidationError",
    "NetworkTopology",
    "NotAPermutation",
    "Permutation",
    "RGMConvergenceWarning",
    "RGMResult",
    "RelaxedMatcher",
    "RunConfig",
    "SpectralReport",
    "UnfriendlyGraphError",
    "WeightedGraph",
    "automorphism_count",
    "distortion",
    "exact_gm",
    "friendliness",
    "hungarian_project",
    "init_swarm",
    "noise_bound",
    "perturb",
    "proj_hyperplane",
    "proj_pseudostochastic_tangent",
    "random_graph",
    "relabel",
    "round_project",
    "run",
    "solve_gm_centralized",
    "solve_rgm",
]
