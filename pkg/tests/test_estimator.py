import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from levybandit import CutoffPolicy, SimConfig
from levybandit.levy_core import krc


def test_params_round_trip():
    policy = CutoffPolicy(g1=2.0, g0=0.0)
    assert policy.get_params() == {"g1": 2.0, "g0": 0.0, "tol": 1e-12}
    twin = clone(policy)
    assert twin.get_params() == policy.get_params() and twin is not policy


def test_fit_predict(krc_problem):
    policy = CutoffPolicy().fit(krc_problem)
    assert policy.p_star_ == pytest.approx(1.0 / 3.0, abs=1e-12)
    np.testing.assert_allclose(policy.predict([0.0, 2.0 / 3.0, 1.0]), [0.5, 0.6875, 1.0], atol=1e-14)
    np.testing.assert_array_equal(policy.decide([0.2, 0.5]), [0.0, 1.0])
    assert policy.transform([[0.5]]).shape == (1, 2)


def test_fit_accepts_config_dict():
    policy = CutoffPolicy(g1=2.0, g0=0.0).fit(krc().to_dict())
    assert policy.p_star_ == pytest.approx(1.0 / 7.0, abs=1e-12)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        CutoffPolicy().predict([0.5])


def test_input_validation(krc_problem):
    policy = CutoffPolicy().fit(krc_problem)
    with pytest.raises(ValueError):
        policy.predict([1.2])
    with pytest.raises(ValueError):
        policy.predict(np.ones((2, 2)))
    with pytest.raises(TypeError):
        CutoffPolicy().fit("krc")


def test_score(krc_problem):
    policy = CutoffPolicy().fit(krc_problem)
    value = policy.score(2.0 / 3.0, SimConfig(paths=2000, dt=2e-3, seed=9))
    assert value == pytest.approx(0.6875, abs=0.01)
