"""Posterior belief that the risky arm is High, updated from structured observations.

Beliefs are carried as log-odds so that extreme posteriors neither underflow
nor saturate; ``+inf`` and ``-inf`` are the absorbing states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .levy_core import BanditProblem, derive


@dataclass(frozen=True)
class Observation:
    """What the risky arm revealed over ``dt`` units of experimentation time.

    ``continuous_increment`` is the increment of the drift-plus-Brownian part;
    ``jumps`` lists every jump size observed in the interval.
    """

    dt: float
    continuous_increment: float = 0.0
    jumps: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        object.__setattr__(self, "jumps", tuple(float(h) for h in self.jumps))


@dataclass(frozen=True)
class BeliefState:
    log_odds: float
    absorbed_high: bool = False

    @property
    def p(self) -> float:
        return logistic(self.log_odds)


def logistic(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def log_odds(p: float) -> float:
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return math.inf
    return math.log(p) - math.log1p(-p)


def init_belief(p0: float) -> BeliefState:
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"prior must lie in [0, 1], got {p0!r}")
    return BeliefState(log_odds(p0), absorbed_high=p0 == 1.0)


def log_likelihood_ratio(obs: Observation, problem: BanditProblem) -> float:
    """log dP_high / dP_low of one observation; ``+inf`` if it can only come from High."""
    d = derive(problem)
    dt = obs.dt
    out = -d.mass_gap * dt
    sigma = problem.sigma
    if sigma > 0.0:
        b1, b0 = problem.high.drift, problem.low.drift
        out += (b1 - b0) / sigma**2 * (obs.continuous_increment - 0.5 * (b1 + b0) * dt)
    for h in obs.jumps:
        rate1, rate0 = problem.rates(h)
        if rate1 <= 0.0:
            raise ValueError(f"jump size {h!r} is not charged by the High measure")
        if rate0 == 0.0:
            return math.inf
        if rate0 != rate1:
            out += math.log(rate1 / rate0)
    return out


def update_belief(state: BeliefState, obs: Observation, problem: BanditProblem) -> BeliefState:
    if state.absorbed_high or math.isinf(state.log_odds):
        # still validate the marks so a bad observation is never silently accepted
        log_likelihood_ratio(obs, problem)
        return state
    step = log_likelihood_ratio(obs, problem)
    if math.isinf(step):
        return BeliefState(math.inf, absorbed_high=True)
    return BeliefState(state.log_odds + step)


def drift_only(p: float, dt: float, problem: BanditProblem) -> float:
    """Belief after ``dt`` of experimentation without jumps, for a problem with no Brownian part."""
    if problem.sigma > 0.0:
        raise ValueError("drift_only applies only when sigma == 0")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    return logistic(log_odds(p) - derive(problem).mass_gap * dt)
