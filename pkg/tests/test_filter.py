import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levybandit.filter import (
    BeliefState,
    Observation,
    drift_only,
    init_belief,
    log_likelihood_ratio,
    log_odds,
    logistic,
    update_belief,
)
from levybandit.levy_core import ArmType, BanditProblem, JumpMeasure, krc

from conftest import problems


def bayes(p, obs, problem):
    """Posterior by the textbook product of densities, without log-odds."""
    like = []
    for arm in (problem.high, problem.low):
        value = 1.0
        if problem.sigma > 0:
            s2 = problem.sigma**2 * obs.dt
            value *= math.exp(-((obs.continuous_increment - arm.drift * obs.dt) ** 2) / (2 * s2))
        value *= math.exp(-arm.nu.total_mass * obs.dt)
        for h in obs.jumps:
            value *= arm.nu.rate(h)
        like.append(value)
    num = p * like[0]
    return num / (num + (1 - p) * like[1])


def test_initial_log_odds():
    assert init_belief(0.5).log_odds == 0.0
    assert init_belief(1.0).log_odds == math.inf and init_belief(1.0).absorbed_high
    assert init_belief(0.0).log_odds == -math.inf
    assert init_belief(1.0 / 3.0).log_odds == pytest.approx(-math.log(2.0), abs=1e-15)


def test_init_rejects_out_of_range():
    with pytest.raises(ValueError):
        init_belief(1.2)


def test_logistic_is_stable_at_extremes():
    assert logistic(-800.0) == 0.0 or logistic(-800.0) > 0.0
    assert logistic(800.0) == 1.0
    assert logistic(log_odds(0.3)) == pytest.approx(0.3, abs=1e-15)


def test_jump_update(kr_problem):
    state = update_belief(init_belief(0.5), Observation(1e-12, 0.0, (1.0,)), kr_problem)
    assert state.p == pytest.approx(2.0 / 3.0, abs=1e-11)


def test_pure_drift_update():
    problem = BanditProblem(
        ArmType(1.1, 0.0, JumpMeasure(((1.0, 1.0),))),
        ArmType(0.6, 0.0, JumpMeasure(((1.0, 0.5),))),
        0.8,
        1.0,
    )
    state = update_belief(init_belief(0.5), Observation(0.2), problem)
    assert state.p == pytest.approx(1.0 / (1.0 + math.exp(0.1)), abs=1e-15)


def test_absorbing_jump_and_stays_absorbed(krc_problem):
    state = update_belief(init_belief(0.2), Observation(0.1, 0.0, (1.0,)), krc_problem)
    assert state.absorbed_high and state.p == 1.0
    after = update_belief(state, Observation(5.0), krc_problem)
    assert after == state


def test_absorbed_state_still_validates_marks(krc_problem):
    with pytest.raises(ValueError):
        update_belief(init_belief(1.0), Observation(0.1, 0.0, (3.0,)), krc_problem)


def test_unsupported_jump(mixed):
    with pytest.raises(ValueError):
        log_likelihood_ratio(Observation(0.1, 0.0, (4.0,)), mixed)


def test_observation_requires_positive_dt():
    with pytest.raises(ValueError):
        Observation(0.0)


def test_drift_only():
    problem = krc(lam=math.log(2.0) / 1.0)
    assert drift_only(0.5, 1.0, problem) == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert drift_only(0.0, 1.0, problem) == 0.0


def test_drift_only_is_continuous_in_time(krc_problem):
    assert drift_only(0.3, 0.0, krc_problem) == pytest.approx(0.3, abs=1e-15)
    assert drift_only(0.3, 2.0, krc_problem) < drift_only(0.3, 1.0, krc_problem) < 0.3


def test_drift_only_rejects_brownian(bh_problem):
    with pytest.raises(ValueError):
        drift_only(0.5, 1.0, bh_problem)


@settings(max_examples=60, deadline=None)
@given(problems, st.floats(0.02, 0.98), st.floats(1e-3, 0.5), st.floats(-2.0, 2.0), st.integers(0, 3))
def test_matches_direct_bayes(problem, p, dt, z, n_jumps):
    support = problem.support
    jumps = tuple(support[i % len(support)] for i in range(n_jumps)) if support else ()
    inc = problem.high.drift * dt + problem.sigma * math.sqrt(dt) * z
    obs = Observation(dt, inc, jumps)
    expected = bayes(p, obs, problem)
    got = update_belief(init_belief(p), obs, problem).p
    assert got == pytest.approx(expected, rel=1e-9, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(problems, st.floats(0.02, 0.98))
def test_jumps_are_good_news(problem, p):
    for h in problem.support:
        got = update_belief(init_belief(p), Observation(1e-9, problem.high.drift * 1e-9, (h,)), problem).p
        assert got >= p - 1e-9


def test_sequential_equals_batch(mixed):
    rng = np.random.default_rng(3)
    state = init_belief(0.4)
    total = 0.0
    for _ in range(50):
        obs = Observation(0.01, float(rng.normal(0.0, 0.1)), (1.0,) if rng.random() < 0.1 else ())
        total += log_likelihood_ratio(obs, mixed)
        state = update_belief(state, obs, mixed)
    assert state.log_odds == pytest.approx(log_odds(0.4) + total, abs=1e-12)
    assert isinstance(state, BeliefState)
