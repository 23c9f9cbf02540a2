import numpy as np
import pytest

from distgm.bench import matching_instance
from distgm.distributed import (
    AgentState,
    CompiledFlow,
    MatchingProblem,
    NetworkTopology,
    SwarmState,
    agent_derivative,
    derivative,
    init_swarm,
    local_views,
)
from distgm.distributed.state import FIELD_NAMES
from distgm.graph import DimensionMismatchError, WeightedGraph


def weighted_problem(n=4, seed=0):
    inst = matching_instance(n, seed)
    rng = np.random.default_rng(seed)
    w = np.triu((NetworkTopology.random(n, 0.5, seed=seed + 100).weights > 0) * rng.uniform(0.5, 2.0, (n, n)), 1)
    return MatchingProblem.build(inst.A, inst.B, w + w.T)


def global_oracle(s, pr):
    """All agents' derivatives at once with stacked arrays and the Laplacian."""
    n = pr.n
    A, B, L = pr.A.adj, pr.B.adj, pr.H.laplacian()
    P, y, z, K, lam, Th, Up = (s.stacked(k) for k in FIELD_NAMES)
    proj = np.eye(n) - np.ones((n, n)) / n
    lap = lambda X: np.einsum("ij,j...->i...", L, X)  # noqa: E731
    r = np.einsum("ijk,ki->ij", P, A) - y
    f = np.einsum("ki,ikl->il", B, P) - z
    D = -np.einsum("ij,ki->ijk", r, A) - np.einsum("ki,il->ikl", B, lam) - lap(Th) - lap(P) - np.einsum("ki,il->ikl", B, f)
    YZ = np.zeros((n, n, n))
    for i in range(n):
        YZ[i][:, i] += y[i]
        YZ[i][i, :] -= z[i]
    return {
        "P": D @ proj,
        "y": r - np.array([Up[i][:, i] for i in range(n)]),
        "z": lam + np.array([Up[i][i, :] for i in range(n)]) + f,
        "K": lap(Up),
        "lam": f,
        "Theta": lap(P),
        "Upsilon": YZ - lap(K) - lap(Up),
    }


def test_two_agent_derivative_by_hand():
    # two agents on one unit edge, entries written out scalar by scalar
    a01, b01 = 1.3, 1.3
    A = np.array([[0.0, a01], [a01, 0.0]])
    B = np.array([[0.0, b01], [b01, 0.0]])
    pr = MatchingProblem.build(A, B, np.array([[0.0, 1.0], [1.0, 0.0]]))
    s = init_swarm(A, B, pr.H, "random", seed=3)
    d = derivative(s, pr)
    for i in range(2):
        j = 1 - i
        me, other = s.agents[i], s.agents[j]
        a, b = A[:, i], B[:, i]
        r = [sum(me.P[k, m] * a[m] for m in range(2)) - me.y[k] for k in range(2)]
        f = [sum(b[m] * me.P[m, k] for m in range(2)) - me.z[k] for k in range(2)]
        delta = np.zeros((2, 2))
        for k in range(2):
            for m in range(2):
                delta[k, m] = (
                    -r[k] * a[m]
                    - b[k] * me.lam[m]
                    - (me.Theta[k, m] - other.Theta[k, m])
                    - (me.P[k, m] - other.P[k, m])
                    - b[k] * f[m]
                )
        # post-multiplying by I - 11^T/2 subtracts each row's mean
        dP = np.array([[delta[k, m] - (delta[k, 0] + delta[k, 1]) / 2 for m in range(2)] for k in range(2)])
        np.testing.assert_allclose(d[i].P, dP, atol=1e-14)
        np.testing.assert_allclose(d[i].lam, f, atol=1e-14)
        np.testing.assert_allclose(d[i].Theta, me.P - other.P, atol=1e-14)
        dU = -(me.K - other.K) - (me.Upsilon - other.Upsilon)
        dU[:, i] += me.y
        dU[i, :] -= me.z
        np.testing.assert_allclose(d[i].Upsilon, dU, atol=1e-14)
        np.testing.assert_allclose(d[i].y, np.array(r) - me.Upsilon[:, i], atol=1e-14)
        np.testing.assert_allclose(d[i].z, me.lam + me.Upsilon[i, :] + np.array(f), atol=1e-14)
        np.testing.assert_allclose(d[i].K, me.Upsilon - other.Upsilon, atol=1e-14)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_derivative_matches_global_oracle_weighted(seed):
    pr = weighted_problem(5, seed)
    s = init_swarm(pr.A, pr.B, pr.H, "random", seed=seed)
    d = derivative(s, pr)
    ref = global_oracle(s, pr)
    for k in FIELD_NAMES:
        np.testing.assert_allclose(np.stack([getattr(x, k) for x in d]), ref[k], atol=1e-12)


def test_derivative_rows_sum_to_zero(random_swarm, reference_problem):
    for d in derivative(random_swarm, reference_problem):
        assert np.abs(d.P.sum(axis=1)).max() <= 1e-13


def test_derivative_accepts_graphs_and_checks_sizes(reference, random_swarm):
    A, B, H, _ = reference
    d1 = derivative(random_swarm, A, B, H)
    d2 = derivative(random_swarm, MatchingProblem.build(A, B, H))
    assert all(np.array_equal(x.P, y.P) for x, y in zip(d1, d2))
    with pytest.raises(DimensionMismatchError):
        MatchingProblem.build(A, WeightedGraph(np.array([[0, 1.0], [1.0, 0]])), H)
    small = init_swarm(np.array([[0, 1.0], [1.0, 0]]), np.array([[0, 1.0], [1.0, 0]]), np.array([[0, 1.0], [1.0, 0]]))
    with pytest.raises(DimensionMismatchError):
        derivative(small, A, B, H)


def test_local_view_exposes_only_neighbors(reference_problem, random_swarm):
    H = reference_problem.H
    for view in local_views(random_swarm, reference_problem):
        i = view.index
        assert set(view.inbox) == set(H.neighbors(i))
        for j in set(range(H.n)) - set(H.neighbors(i)):
            with pytest.raises(KeyError):
                view.inbox[j]
        with pytest.raises(TypeError):
            view.inbox[i] = None
        np.testing.assert_array_equal(view.a, reference_problem.A.adj[:, i])
        # a message carries only the four exchanged blocks
        for _, msg in view.inbox.values():
            assert set(vars(msg)) == {"P", "Theta", "K", "Upsilon"}


def test_non_neighbor_state_cannot_affect_an_agent(reference_problem, random_swarm):
    H = reference_problem.H
    i = 5
    far = [j for j in range(H.n) if j != i and j not in H.neighbors(i)]
    assert far
    agents = list(random_swarm.agents)
    for j in far:
        agents[j] = AgentState(**{k: getattr(agents[j], k) + 100.0 for k in FIELD_NAMES})
    changed = SwarmState(random_swarm.t, agents)
    before = agent_derivative(local_views(random_swarm, reference_problem)[i])
    after = agent_derivative(local_views(changed, reference_problem)[i])
    for k in FIELD_NAMES:
        np.testing.assert_array_equal(getattr(before, k), getattr(after, k))


def test_compiled_system_is_block_sparse_on_topology():
    pr = weighted_problem(5, 1)
    flow = CompiledFlow(pr, 1e-3)
    m = flow.agent_size
    for i in range(pr.n):
        for j in range(pr.n):
            block = flow.matrix[i * m : (i + 1) * m, j * m : (j + 1) * m]
            if i != j and pr.H.weights[i, j] == 0:
                assert not block.any()
            elif i != j:
                assert block.any()


def test_state_vector_roundtrip(random_swarm):
    v = random_swarm.to_vector()
    assert v.shape == (6 * AgentState.size(6),)
    back = SwarmState.from_vector(6, v, 2.5)
    np.testing.assert_array_equal(back.to_vector(), v)
    assert back.t == 2.5
    with pytest.raises(ValueError):
        SwarmState.from_vector(6, v[:-1])


def test_init_swarm_modes(reference):
    A, B, H, _ = reference
    s = init_swarm(A, B, H)
    for a in s.agents:
        assert np.array_equal(a.P, np.full((6, 6), 1 / 6))
        assert np.array_equal(a.P.sum(axis=1), np.ones(6)) or np.abs(a.P.sum(axis=1) - 1).max() <= 1e-15
        assert not a.Upsilon.any() and not a.y.any()
    r1, r2 = init_swarm(A, B, H, "random", seed=4), init_swarm(A, B, H, "random", seed=4)
    np.testing.assert_array_equal(r1.to_vector(), r2.to_vector())
    for a in r1.agents:
        assert np.abs(a.P.sum(axis=1) - 1).max() <= 1e-15
        assert a.y.std() < 0.5
    with pytest.raises(ValueError):
        init_swarm(A, B, H, "warm")
