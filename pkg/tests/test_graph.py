import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distgm.graph import (
    DimensionMismatchError,
    GraphValidationError,
    Permutation,
    UnfriendlyGraphError,
    WeightedGraph,
    automorphism_count,
    distortion,
    friendliness,
    graph_from_edges,
    noise_bound,
    perturb,
    random_graph,
    relabel,
)
from distgm.instances import REFERENCE_PERMUTATION, reference_graphs

PATH3 = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 2.0], [0.0, 2.0, 0.0]])


def test_weighted_graph_validation():
    with pytest.raises(GraphValidationError, match="symmetric"):
        WeightedGraph(np.array([[0, 1.0], [2.0, 0]]))
    with pytest.raises(GraphValidationError, match="diagonal"):
        WeightedGraph(np.array([[1.0, 1.0], [1.0, 0]]))
    with pytest.raises(GraphValidationError, match="negative"):
        WeightedGraph(np.array([[0, -1.0], [-1.0, 0]]))
    with pytest.raises(GraphValidationError, match="connected"):
        WeightedGraph(np.zeros((3, 3)))
    with pytest.raises(GraphValidationError, match="square"):
        WeightedGraph(np.zeros((2, 3)))
    with pytest.raises(GraphValidationError):
        WeightedGraph(np.zeros((1, 1)))


def test_graph_is_immutable():
    G = WeightedGraph(PATH3)
    with pytest.raises(ValueError):
        G.adj[0, 1] = 5.0
    col = G.column(1)
    col[0] = 9.0
    assert G.adj[0, 1] == 1.0


def test_permutation_matrix_and_inverse():
    p = Permutation((2, 0, 1))
    M = p.matrix()
    assert np.array_equal(M.sum(axis=0), np.ones(3)) and np.array_equal(M.sum(axis=1), np.ones(3))
    assert M[0, 2] == 1 and M[1, 0] == 1 and M[2, 1] == 1
    assert Permutation.from_matrix(M) == p
    assert np.array_equal(p.inverse().matrix(), M.T)
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))


def test_distortion_reference_pair_is_zero():
    A, B = reference_graphs()
    assert distortion(A, B, REFERENCE_PERMUTATION) <= 1e-12


def test_distortion_matches_matrix_definition():
    # ||A - Pi^T B Pi||_F with the explicit matrix product
    A, B = reference_graphs()
    for seed in range(5):
        p = Permutation.random(6, seed=seed)
        M = p.matrix()
        assert distortion(A, B, p) == pytest.approx(np.linalg.norm(A.adj - M.T @ B.adj @ M), abs=1e-12)


def test_distortion_identity_case():
    G = random_graph(5, seed=3)
    assert distortion(G, G, Permutation.identity(5)) == 0.0


def test_distortion_three_vertex_path_by_hand():
    # swapping the endpoints of the path with weights 1, 2 moves both weights
    # onto the other edge: four entries differ by 1, so the norm is sqrt(4) = 2
    G = WeightedGraph(PATH3)
    assert distortion(G, G, Permutation((2, 1, 0))) == pytest.approx(2.0, abs=1e-15)


def test_distortion_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        distortion(WeightedGraph(PATH3), WeightedGraph(PATH3), Permutation((0, 1)))


def test_relabel_reference_gives_B_entrywise():
    A, B = reference_graphs()
    assert np.array_equal(relabel(A, REFERENCE_PERMUTATION).adj, B.adj)


def test_relabel_identity_and_spectrum():
    G = random_graph(5, seed=11)
    assert relabel(G, Permutation.identity(5)) == G
    p = Permutation.random(5, seed=4)
    H = relabel(G, p)
    assert distortion(G, H, p) == 0.0
    np.testing.assert_allclose(np.linalg.eigvalsh(H.adj), np.linalg.eigvalsh(G.adj), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 7), gseed=st.integers(0, 10_000), pseed=st.integers(0, 10_000))
def test_relabel_properties(n, gseed, pseed):
    G = random_graph(n, seed=gseed)
    p = Permutation.random(n, seed=pseed)
    H = relabel(G, p)
    np.testing.assert_allclose(np.linalg.eigvalsh(H.adj), np.linalg.eigvalsh(G.adj), atol=1e-9)
    q = Permutation.random(n, seed=pseed + 1)
    assert distortion(G, H, q) == pytest.approx(distortion(H, G, q.inverse()), abs=1e-12)
    assert friendliness(G).friendly == friendliness(H).friendly


def test_random_graph_complete_and_single_edge():
    G = random_graph(6, 1.0, (0.5, 2.0), seed=1)
    upper = G.adj[np.triu_indices(6, 1)]
    assert np.all(upper > 0) and len(set(upper)) == 15
    assert np.all((upper >= 0.5) & (upper <= 2.0))
    E = random_graph(2, 0.3, (1.0, 3.0), seed=5)
    assert E.adj[0, 1] > 0 and len(E.edges()) == 1


def test_random_graph_deterministic_and_connected():
    assert random_graph(7, 0.4, seed=9) == random_graph(7, 0.4, seed=9)
    for seed in range(30):
        G = random_graph(8, 0.05, seed=seed)
        assert len(G.edges()) == 7  # spanning tree only


def test_random_graph_edge_count():
    G = random_graph(8, 0.5, seed=2)
    assert len(G.edges()) == round(0.5 * 28)


def test_friendliness_reference_and_uniform_complete():
    A, _ = reference_graphs()
    rep = friendliness(A)
    assert rep.friendly
    U, lam = rep.eigenvectors, rep.eigenvalues
    assert np.linalg.norm(U @ np.diag(lam) @ U.T - A.adj) <= 1e-10 * A.frobenius()
    assert np.all(np.diff(lam) >= 0)
    K = WeightedGraph(np.ones((5, 5)) - np.eye(5))
    assert not friendliness(K).friendly


def test_friendliness_tolerances_are_scale_relative():
    G = random_graph(6, seed=8)
    r1, r2 = friendliness(G), friendliness(WeightedGraph(3.0 * G.adj))
    assert r2.gap_tol == pytest.approx(3.0 * r1.gap_tol)
    assert r1.align_tol == pytest.approx(1e-8 * math.sqrt(6))
    assert r1.friendly == r2.friendly


def test_friendliness_generic_on_random_graphs():
    friendly = sum(friendliness(random_graph(8, 0.5, seed=s)).friendly for s in range(100))
    assert friendly >= 99


def test_automorphism_counts():
    A, _ = reference_graphs()
    assert automorphism_count(A) == 1
    assert automorphism_count(WeightedGraph(np.ones((3, 3)) - np.eye(3))) == 6
    assert automorphism_count(WeightedGraph(np.array([[0, 1.0], [1.0, 0]]))) == 2
    with pytest.raises(ValueError):
        automorphism_count(random_graph(10, seed=0))


def test_automorphism_count_against_brute_force():
    # unweighted small graphs have many automorphisms, exercising the pruning
    for seed in range(10):
        G = WeightedGraph((random_graph(6, 0.5, seed=seed).adj > 0).astype(float))
        brute = sum(
            np.linalg.norm(G.adj - G.adj[np.ix_(p, p)]) < 1e-9 * G.frobenius()
            for p in map(list, itertools.permutations(range(6)))
        )
        assert automorphism_count(G) == brute


def test_perturb_properties():
    _, B = reference_graphs()
    assert perturb(B, 0.0, seed=1) == B
    for seed in range(20):
        for rho in (1e-3, 0.1, 1.0):
            Bt = perturb(B, rho, seed=seed)
            assert np.linalg.norm(Bt.adj - B.adj) <= rho + 1e-12
            assert np.all(Bt.adj >= 0) and np.all(np.diag(Bt.adj) == 0)
            assert np.array_equal(Bt.adj, Bt.adj.T)
    R = perturb(B, 1e-3, seed=3).adj - B.adj
    assert np.linalg.norm(R) == pytest.approx(1e-3)
    assert np.all(R[B.adj == 0] >= 0)
    with pytest.raises(ValueError):
        perturb(B, -1.0)


def test_noise_bound_formula_and_scaling():
    A, _ = reference_graphs()
    rep = friendliness(A)
    eps = 0.9 * min(rep.min_alignment, 1 / rep.max_alignment)
    expected = min(math.sqrt(2) * rep.spectral_radius, rep.min_gap**2 * eps**4 / (12 * rep.spectral_radius * 6**1.5))
    assert noise_bound(A) == pytest.approx(expected, rel=1e-12)
    # regression constant for the reference graph with the default eps
    assert noise_bound(A) == pytest.approx(2.8221551081169766e-08, rel=1e-6)
    assert noise_bound(WeightedGraph(2 * A.adj), eps) == pytest.approx(2 * noise_bound(A, eps), rel=1e-9)
    for seed in range(10):
        G = random_graph(6, seed=seed)
        if friendliness(G).friendly:
            assert noise_bound(G) > 0


def test_noise_bound_rejects_unfriendly_and_bad_eps():
    with pytest.raises(UnfriendlyGraphError):
        noise_bound(WeightedGraph(np.ones((4, 4)) - np.eye(4)))
    A, _ = reference_graphs()
    with pytest.raises(ValueError):
        noise_bound(A, eps=10.0)


def test_graph_from_edges_validation():
    G = graph_from_edges(3, [[0, 1, 1.0], [1, 2, 2.0]])
    assert np.array_equal(G.adj, PATH3)
    for bad, msg in [
        ([[0, 0, 1.0], [1, 2, 1.0]], "self-loop"),
        ([[0, 1, 1.0], [0, 1, 2.0], [1, 2, 1.0]], "duplicate"),
        ([[1, 0, 1.0], [1, 2, 1.0]], "i < j"),
        ([[0, 1, -1.0], [1, 2, 1.0]], "positive"),
        ([[0, 5, 1.0]], "range"),
        ([[0, 1]], r"\[i, j, w\]"),
    ]:
        with pytest.raises(GraphValidationError, match=msg):
            graph_from_edges(3, bad)
    with pytest.raises(GraphValidationError, match="connected"):
        graph_from_edges(3, [[0, 1, 1.0]])
