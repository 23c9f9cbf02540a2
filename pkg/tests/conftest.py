import numpy as np
import pytest

from distgm.distributed import MatchingProblem, RunConfig, equilibrium, init_swarm, run
from distgm.instances import reference_instance

# lines reported by the acceptance suite, printed once at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def reference():
    return reference_instance()


@pytest.fixture(scope="session")
def reference_problem(reference):
    A, B, H, _ = reference
    return MatchingProblem.build(A, B, H)


@pytest.fixture(scope="session")
def reference_qstar(reference_problem):
    return equilibrium(reference_problem, tol=1e-10)


@pytest.fixture(scope="session")
def golden_run(reference, reference_problem, reference_qstar):
    _, _, _, Pi = reference
    cfg = RunConfig(reference=Pi, distortion_tol=1e-6, q_star=reference_qstar)
    return run(reference_problem, cfg=cfg)


@pytest.fixture(scope="session")
def long_run(reference, reference_problem, reference_qstar):
    """Reference instance run until the KKT residual is tiny."""
    _, _, _, Pi = reference
    cfg = RunConfig(reference=Pi, stop_mode="kkt", kkt_tol=1e-9, q_star=reference_qstar)
    return run(reference_problem, cfg=cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_swarm(reference_problem):
    return init_swarm(reference_problem.A, reference_problem.B, reference_problem.H, "random", seed=7)
