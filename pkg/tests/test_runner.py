import numpy as np
import pytest

from distgm.bench import make_topology, matching_instance
from distgm.distributed import DegenerateTraceError, RunConfig, TraceRecord, equilibrium, exponential_rate_fit, run


def synthetic(ts, errs):
    return [TraceRecord(float(t), np.array([e, e / 2]), 0.0, None, None, 0.0, 0.0) for t, e in zip(ts, errs)]


def test_rate_fit_recovers_known_rate():
    t = np.linspace(0, 5, 40)
    rate, r2 = exponential_rate_fit(synthetic(t, 2.0 * np.exp(-3.0 * t)))
    assert rate == pytest.approx(3.0, rel=1e-9)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_rate_fit_ignores_floor():
    t = np.arange(40.0)
    e = np.maximum(np.exp(-t), 1e-13)
    rate, r2 = exponential_rate_fit(synthetic(t, e))
    assert rate == pytest.approx(1.0, rel=1e-9) and r2 == pytest.approx(1.0)


def test_rate_fit_constant_trace():
    assert exponential_rate_fit(synthetic(range(12), [0.3] * 12)) == (0.0, 1.0)


def test_rate_fit_degenerate():
    with pytest.raises(DegenerateTraceError):
        exponential_rate_fit(synthetic(range(9), [1.0] * 9))
    with pytest.raises(DegenerateTraceError):
        exponential_rate_fit(synthetic(range(20), [1e-13] * 20))
    no_err = [TraceRecord(float(t), None, 0.0, None, None, 0.0, 0.0) for t in range(12)]
    with pytest.raises(DegenerateTraceError):
        exponential_rate_fit(no_err)


@pytest.mark.parametrize(
    "kw",
    [
        {"dt": 0},
        {"method": "heun"},
        {"max_time": -1},
        {"trace_stride": 0},
        {"stop_mode": "never"},
        {"engine": "gpu"},
        {"stride_doubling": 0},
        {"tail_fraction": 0},
    ],
)
def test_run_config_validation(kw):
    with pytest.raises(ValueError):
        RunConfig(**kw)


@pytest.fixture(scope="module")
def small():
    inst = matching_instance(4, 0)
    return inst, make_topology("ring", inst.A)


def test_run_recovers_small_instance(small):
    inst, H = small
    res = run(inst.A, inst.B, H, RunConfig(max_time=1e6, stride_doubling=20))
    assert res.report.converged and res.report.agents_agree
    assert all(p == inst.perm for p in res.permutations)
    assert res.report.T_round is not None and res.report.T_round <= res.report.t_final
    assert res.report.steps == round(res.report.t_final / 1e-3)
    # without a reference the errors are measured against the consensus permutation
    last = res.trace[-1].per_agent_error
    assert last is not None and last.max() < 0.25


def test_engines_agree(small):
    inst, H = small
    cfg = RunConfig(max_time=2.0, trace_stride=500, stop_mode="horizon", reference=inst.perm)
    a = run(inst.A, inst.B, H, cfg)
    b = run(inst.A, inst.B, H, RunConfig(**{**cfg.__dict__, "engine": "agentwise"}))
    assert len(a.trace) == len(b.trace) == 5
    for ra, rb in zip(a.trace, b.trace):
        assert ra.t == rb.t
        np.testing.assert_allclose(ra.per_agent_error, rb.per_agent_error, rtol=1e-11)
    np.testing.assert_allclose(a.state.to_vector(), b.state.to_vector(), atol=1e-12)


def test_horizon_mode_runs_to_max_time(small):
    inst, H = small
    res = run(inst.A, inst.B, H, RunConfig(max_time=3.0, stop_mode="horizon"))
    assert res.report.t_final == pytest.approx(3.0)
    assert not res.report.converged


def test_stride_doubling_spacing(small):
    inst, H = small
    res = run(inst.A, inst.B, H, RunConfig(max_time=20.0, stop_mode="horizon", trace_stride=1000, stride_doubling=2))
    gaps = np.diff([r.t for r in res.trace])
    np.testing.assert_allclose(gaps[:6], [1, 1, 2, 2, 4, 4])


def test_kkt_stop(small):
    inst, H = small
    res = run(inst.A, inst.B, H, RunConfig(stop_mode="kkt", kkt_tol=1e-6, max_time=1e7, stride_doubling=20))
    assert res.report.converged and res.report.kkt_residual <= 1e-6


def test_equilibrium_gives_up(small):
    inst, H = small
    with pytest.raises(RuntimeError):
        equilibrium(inst.A, inst.B, H, tol=1e-30, max_time=10.0)
