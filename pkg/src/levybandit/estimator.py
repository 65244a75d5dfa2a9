"""Estimator-style front end: ``fit`` a bandit problem, ``predict`` values of beliefs."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .levy_core import BanditProblem, check_problem, parse_problem
from .solver import DEFAULT_TOL, solve_general
from .simulator import SimConfig, Strategy, estimate


def check_beliefs(p) -> np.ndarray:
    """Coerce to a 1-D float array of beliefs in [0, 1]."""
    p = np.asarray(p, dtype=float)
    if p.ndim == 2 and p.shape[1] == 1:
        p = p[:, 0]
    if p.ndim > 1:
        raise ValueError(f"expected a 1-D array of beliefs, got shape {p.shape}")
    p = np.atleast_1d(p)
    if not np.all(np.isfinite(p)):
        raise ValueError("beliefs must be finite")
    if np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("beliefs must lie in [0, 1]")
    return p


def check_bandit_problem(problem) -> BanditProblem:
    if isinstance(problem, dict):
        problem = parse_problem(problem)
    if not isinstance(problem, BanditProblem):
        raise TypeError(f"expected a BanditProblem or a config dict, got {type(problem).__name__}")
    return check_problem(problem)


class CutoffPolicy(BaseEstimator):
    """Optimal cut-off policy and value function of a two-armed Lévy bandit.

    Parameters
    ----------
    g1, g0 : float or None
        Flow payoffs of the High and Low types; ``None`` uses the drifts.
    tol : float
        Root tolerance for the exponent.

    Attributes
    ----------
    alpha_star_, p_star_, p_myopic_, c_alpha_ : float
    solution_ : Solution
    """

    def __init__(self, g1=None, g0=None, tol=DEFAULT_TOL):
        self.g1 = g1
        self.g0 = g0
        self.tol = tol

    def fit(self, problem, y=None):
        problem = check_bandit_problem(problem)
        self.solution_ = solve_general(problem, self.g1, self.g0, self.tol)
        self.problem_ = problem
        self.alpha_star_ = self.solution_.alpha_star
        self.p_star_ = self.solution_.p_star
        self.p_myopic_ = self.solution_.p_myopic
        self.c_alpha_ = self.solution_.c_alpha
        return self

    def predict(self, p):
        """Optimal expected discounted payoff at each belief."""
        check_is_fitted(self, "solution_")
        return np.asarray(self.solution_.value(check_beliefs(p)), dtype=float)

    def decide(self, p):
        """Share of time on the risky arm: 1 above the cut-off, 0 otherwise."""
        check_is_fitted(self, "solution_")
        return self.solution_.policy(check_beliefs(p))

    def transform(self, p):
        """Columns ``[value, action]`` for each belief."""
        return np.column_stack([self.predict(p), self.decide(p)])

    def fit_transform(self, problem, p):
        return self.fit(problem).transform(p)

    def strategy(self) -> Strategy:
        check_is_fitted(self, "solution_")
        return Strategy.cutoff_at(self.p_star_)

    def score(self, p0, config: SimConfig | None = None):
        """Monte Carlo estimate of the fitted policy's payoff from prior ``p0``."""
        check_is_fitted(self, "solution_")
        base = config or SimConfig()
        cfg = SimConfig(dt=base.dt, horizon=base.horizon, paths=base.paths, seed=base.seed,
                        estimator=base.estimator, p0=float(p0), workers=base.workers, tail=base.tail)
        return estimate(self.problem_, self.strategy(), cfg).mean
