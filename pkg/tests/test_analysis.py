from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhythmctl.analysis import (
    ScenarioResult,
    profile_error,
    cumulative_square_error,
    extract_profile,
    fit_decay_rate,
    sync_spread,
    tail_metrics,
    tail_start,
)
from rhythmctl.design import (
    RhythmicProfile,
    design_complex_leading,
    design_real_leading,
    hopf_critical_alpha,
    random_profile,
    random_tail,
)
from rhythmctl.dynamics import simulate
from rhythmctl.errors import ConfigError, NotRhythmicError, PreconditionError
from rhythmctl.model import NetworkConfig, StateLayout, Trajectory


def _closed_traj(times, ce2, n=2, x=None, X=None):
    layout = StateLayout(n, n, closed_loop=True)
    samples = np.zeros((times.size, layout.size))
    if x is not None:
        samples[:, layout.x] = x
    if X is not None:
        samples[:, layout.X] = X
    return Trajectory(times, samples, layout, float(times[1] - times[0]), ce2=np.asarray(ce2, dtype=float))


# ---------------------------------------------------------------- CE^2

def test_ce2_examples():
    assert cumulative_square_error([0.3, -0.2], [0.3, -0.2]) == 0.0
    assert cumulative_square_error([1.0, 0.0], [0.0, 0.0]) == 1.0
    assert cumulative_square_error([1.0, 2.0], [0.0, 0.0]) == 5.0


def test_ce2_with_mapping_and_mismatch():
    assert cumulative_square_error([2.0], [1.0, 0.0, 2.0], mapping=[0, 0, 0]) == pytest.approx(5.0)
    with pytest.raises(ConfigError):
        cumulative_square_error([1.0, 2.0], [1.0, 2.0, 3.0])


@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=12),
       st.randoms(use_true_random=False))
def test_ce2_nonnegative_and_permutation_symmetric(pairs, rnd):
    X = np.array([p[0] for p in pairs])
    x = np.array([p[1] for p in pairs])
    perm = list(range(len(pairs)))
    rnd.shuffle(perm)
    value = cumulative_square_error(X, x)
    assert value >= 0.0
    assert cumulative_square_error(X[perm], x[perm]) == pytest.approx(value, rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------- tail metrics

def test_tail_window_counting():
    assert 101 - tail_start(101, 0.2) == 21
    with pytest.raises(ConfigError):
        tail_start(101, 1.0)


def test_tail_metrics_exponential_decay_rate():
    t = np.linspace(0.0, 10.0, 101)
    m = tail_metrics(_closed_traj(t, np.exp(-2.0 * t)), 0.2)
    assert m["decay_rate"] == pytest.approx(2.0, rel=0.02)
    assert m["steady_ce2_mean"] == pytest.approx(np.exp(-2.0 * t[80:]).mean())


def test_tail_metrics_constant():
    t = np.linspace(0.0, 10.0, 101)
    m = tail_metrics(_closed_traj(t, np.full(101, 0.3)), 0.2)
    assert m["decay_rate"] == pytest.approx(0.0, abs=1e-12)
    assert m["steady_ce2_mean"] == pytest.approx(0.3)
    assert m["steady_ce2_max"] == pytest.approx(0.3)


def test_tail_metrics_exact_zero_omits_rate():
    t = np.linspace(0.0, 10.0, 101)
    ce2 = np.exp(-t)
    ce2[50:] = 0.0
    m = tail_metrics(_closed_traj(t, ce2), 0.2)
    assert m["decay_rate"] is None
    assert m["steady_ce2_mean"] == 0.0


def test_tail_metrics_error_levels():
    t = np.linspace(0.0, 1.0, 11)
    x = np.zeros((11, 2))
    X = np.zeros((11, 2))
    X[:, 1] = 0.5
    X[-1, 0] = 2.0
    m = tail_metrics(_closed_traj(t, np.ones(11), x=x, X=X), 0.2)
    assert m["steady_error_peak"] == pytest.approx(2.0)
    assert m["steady_error_level"] == pytest.approx(2.0 / 3.0)


def test_sync_spread():
    x = np.zeros((4, 3))
    assert sync_spread(x) == 0.0
    x[:, 2] = [1.0, -1.0, 1.0, -1.0]
    assert sync_spread(x) == pytest.approx(1.0)


def test_fit_decay_rate_rejects_nonpositive():
    with pytest.raises(ConfigError):
        fit_decay_rate([0, 1], [1.0, 0.0])


def test_scenario_result_round_trip():
    r = ScenarioResult(1e-3, 2e-3, 0.1, 0.01, 0.02, decay_rate=0.04, f_bound=1.2,
                       extracted_profile=RhythmicProfile([1.0, 0.5], [0.0, 1.0], 30.0))
    assert ScenarioResult.from_dict(r.to_dict()) == r


# ---------------------------------------------------------------- profile extraction

@pytest.mark.parametrize("seed", range(5))
def test_extract_synthetic_profile(seed):
    rng = np.random.default_rng(seed)
    n = 5
    rho = np.concatenate([[1.0], rng.uniform(0.2, 0.95, n - 1)])
    theta = np.concatenate([[0.0], rng.uniform(0, 2 * np.pi, n - 1)])
    period = rng.uniform(20.0, 60.0)
    t = np.arange(0.0, 20 * period, 0.01)
    data = rho * np.sin(2 * np.pi * t[:, None] / period + theta)
    got = extract_profile((t, data), 0.5)
    assert np.allclose(got.rho, rho, rtol=0.01)
    assert got.period == pytest.approx(period, rel=0.01)
    assert np.max(np.abs(np.angle(np.exp(1j * (got.theta - theta))))) <= 0.02
    assert got.permutation is None


def test_extract_permutes_dominant_node():
    t = np.arange(0.0, 600.0, 0.05)
    w = 2 * np.pi / 40.0
    data = np.column_stack([0.5 * np.sin(w * t + 0.4), np.sin(w * t + 1.0), 0.25 * np.sin(w * t)])
    got = extract_profile((t, data), 0.5)
    assert got.permutation == (1, 0, 2)
    assert np.allclose(got.rho, [1.0, 0.5, 0.25], rtol=0.01)
    expected = np.mod([0.0, -0.6, -1.0], 2 * np.pi)
    assert np.max(np.abs(np.angle(np.exp(1j * (got.theta - expected))))) < 0.02


def test_extract_identical_channels():
    t = np.arange(0.0, 300.0, 0.05)
    s = np.sin(2 * np.pi * t / 25.0)
    got = extract_profile((t, np.column_stack([s, s, s])), 0.5)
    assert np.allclose(got.rho, 1.0)
    assert np.allclose(got.theta, 0.0)


def test_extract_constant_channel_not_rhythmic():
    t = np.arange(0.0, 300.0, 0.05)
    data = np.column_stack([np.sin(t), np.full_like(t, 0.4)])
    with pytest.raises(NotRhythmicError) as info:
        extract_profile((t, data), 0.5)
    assert info.value.node == 1


def test_extract_needs_enough_periods():
    t = np.arange(0.0, 100.0, 0.05)
    data = np.sin(2 * np.pi * t / 40.0)[:, None]
    with pytest.raises(PreconditionError):
        extract_profile((t, data), 0.5)


def test_profile_error_ignores_dominant_node_choice():
    expected = RhythmicProfile([1.0, 0.9], [0.0, 0.5])
    # measurement picked node 1 as dominant: node 0 at 0.95 of it, lagging by 0.5 rad
    measured = RhythmicProfile([1.0, 0.95], [0.0, np.mod(-0.5, 2 * np.pi)], permutation=(1, 0))
    rho_err, theta_err = profile_error(measured, expected)
    assert theta_err == pytest.approx(0.0, abs=1e-12)
    assert rho_err == pytest.approx(abs(1 / 0.95 - 0.9) / 0.9)
    assert profile_error(expected, expected) == (0.0, 0.0)


def test_design_round_trip_on_random_five_node_references():
    rng = np.random.default_rng(5)
    failures = []
    for i in range(20):
        complex_case = i % 2 == 1
        if complex_case:
            p = random_profile(5, rng, phases=True)
            A = design_complex_leading(p, complex(1.0, rng.uniform(0.1, 0.5)), random_tail(1.0, 3, rng))
        else:
            p = random_profile(5, rng)
            A = design_real_leading(p, np.concatenate([[1.0], random_tail(1.0, 4, rng)]))
        cfg = NetworkConfig(A, hopf_critical_alpha(A, 0.5, 0.01).alpha + 0.01, 0.5, 0.01)
        s0 = np.concatenate([0.1 * p.rho * np.cos(p.theta), np.zeros(5)])
        traj = simulate(cfg, s0, dt=0.01, t_end=1500.0, sample_stride=5)
        rho_err, theta_err = profile_error(extract_profile(traj, 0.5), p)
        if rho_err > 0.15 or theta_err > 0.15:
            failures.append((i, round(rho_err, 3), round(theta_err, 3)))
    assert not failures
