import json

import numpy as np
import pytest
from hypothesis import strategies as st

from levybandit.levy_core import ArmType, BanditProblem, JumpMeasure, brownian, krc, poisson_pair, validate


def mixed_problem():
    """Jump-diffusion with two atoms, one of each sign; jump means differ between types."""
    return BanditProblem(
        high=ArmType(3.0, 1.0, JumpMeasure(((1.0, 2.0), (-0.5, 1.0)))),
        low=ArmType(0.0, 1.0, JumpMeasure(((1.0, 1.0), (-0.5, 0.5)))),
        rho=1.0,
        r=1.0,
    )


def mixed_with_absorbing():
    """Jump-diffusion in which the atom at 2.0 can only come from the High type."""
    return BanditProblem(
        high=ArmType(2.0, 0.8, JumpMeasure(((1.0, 1.5), (2.0, 0.3)))),
        low=ArmType(-0.5, 0.8, JumpMeasure(((1.0, 0.5),))),
        rho=0.4,
        r=0.7,
    )


@pytest.fixture
def krc_problem():
    return krc(lam=1.0, r=1.0, rho=0.5)


@pytest.fixture
def bh_problem():
    return brownian(mu1=1.0, mu0=-1.0, sigma=1.0, rho=0.0, r=1.0)


@pytest.fixture
def kr_problem():
    return poisson_pair(lam_high=2.0, lam_low=1.0, r=1.0)


@pytest.fixture
def mixed():
    return mixed_problem()


@pytest.fixture
def mixed_absorbing():
    return mixed_with_absorbing()


@pytest.fixture
def write_config(tmp_path):
    def write(data, name="problem.json"):
        path = tmp_path / name
        path.write_text(data if isinstance(data, str) else json.dumps(data))
        return str(path)

    return write


def random_problem(rng: np.random.Generator) -> BanditProblem:
    """Draw a valid, signal-carrying problem."""
    while True:
        sigma = 0.0 if rng.random() < 0.3 else rng.uniform(0.2, 2.0)
        n = rng.integers(0, 4) if sigma > 0 else rng.integers(1, 4)
        sizes = rng.choice([-2.0, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0, 3.0], size=n, replace=False)
        rate1 = rng.uniform(0.1, 3.0, size=n)
        ratio = np.where(rng.random(n) < 0.2, 0.0, rng.uniform(0.0, 1.0, size=n))
        rate0 = rate1 * ratio
        nu1 = JumpMeasure(tuple(zip(sizes, rate1)))
        nu0 = JumpMeasure(tuple((h, q) for h, q in zip(sizes, rate0) if q > 0))
        mu0 = rng.uniform(-2.0, 1.0)
        b0 = mu0 - nu0.first_moment
        if sigma == 0.0:
            mu1 = b0 + nu1.first_moment
        else:
            mu1 = mu0 + rng.uniform(0.1, 3.0)
        if mu1 <= mu0 + 1e-3:
            continue
        rho = mu0 + rng.uniform(0.05, 0.95) * (mu1 - mu0)
        problem = BanditProblem(ArmType(mu1, sigma, nu1), ArmType(mu0, sigma, nu0), rho, rng.uniform(0.1, 5.0))
        if validate(problem).ok:
            return problem


problems = st.integers(0, 2**32 - 1).map(lambda s: random_problem(np.random.default_rng(s)))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
