"""Closed-form solution of the two-armed Lévy bandit.

The information content of a problem is summarised by a single exponent
``alpha_star``, the positive root of an increasing scalar function.  Given
``alpha_star`` the optimal policy is a cut-off in the posterior belief and
the value function above the cut-off is the expected payoff of always
experimenting plus an option value ``C * (1 - p) * ((1 - p) / p) ** alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .levy_core import ArmType, BanditProblem, JumpMeasure, ProblemError, derive

DEFAULT_TOL = 1e-12
MAX_ITER = 200


class SolverError(RuntimeError):
    pass


class NoSignalError(SolverError):
    """Both types generate the same law; experimentation carries no information."""


class NonConvergenceError(SolverError):
    def __init__(self, lo: float, hi: float):
        super().__init__(f"bisection did not converge; bracket [{lo!r}, {hi!r}]")
        self.bracket = (lo, hi)


def root_function(problem: BanditProblem, alpha: float) -> float:
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    d = derive(problem)
    return _root_function(_jump_terms(problem), d.mass_gap, d.snr, problem.r, alpha)


def _jump_terms(problem: BanditProblem) -> list[tuple[float, float]]:
    """(log ratio low/high, low rate) for atoms charged by the Low measure."""
    terms = []
    for h, rate1 in problem.high.nu.atoms:
        rate0 = problem.low.nu.rate(h)
        # B_inf atoms contribute 0**alpha * 0; skip rather than evaluate 0**0 near alpha=0
        if rate0 > 0.0 and rate1 > 0.0:
            terms.append((math.log(rate0 / rate1), rate0))
    return terms


def _root_function(terms, mass_gap, snr, r, alpha):
    jump = math.fsum(math.expm1(alpha * lr) * rate0 for lr, rate0 in terms)
    return jump + alpha * mass_gap + 0.5 * alpha * (alpha + 1.0) * snr - r


def has_signal(problem: BanditProblem) -> bool:
    d = derive(problem, check=False)
    return d.snr > 0.0 or d.mass_gap > 0.0 or any(lr < 0.0 for lr, _ in _jump_terms(problem))


def solve_alpha(problem: BanditProblem, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> float:
    """Positive root of the information equation by bracket doubling and bisection.

    The function equals ``-r`` at zero and is strictly increasing, so the
    upper bracket is found by doubling from 1.  Bisection stops once the
    bracket is narrower than ``tol`` and ``|f| <= tol * r``, or when the
    bracket cannot be split further in floating point.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if not has_signal(problem):
        raise NoSignalError("types are indistinguishable: the information equation is identically -r")
    d = derive(problem)
    terms = _jump_terms(problem)
    r = problem.r

    def f(a):
        return _root_function(terms, d.mass_gap, d.snr, r, a)

    lo, hi = 0.0, 1.0
    f_hi = f(hi)
    while f_hi <= 0.0:
        lo, hi = hi, 2.0 * hi
        if math.isinf(hi):
            raise NonConvergenceError(lo, hi)
        f_hi = f(hi)
    f_lo = -r if lo == 0.0 else f(lo)

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        best, f_best = (lo, f_lo) if abs(f_lo) < abs(f_hi) else (hi, f_hi)
        if (hi - lo <= tol and abs(f_best) <= tol * r) or mid <= lo or mid >= hi:
            return best if best > 0.0 else hi
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if f_mid < 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    raise NonConvergenceError(lo, hi)


def myopic_cutoff(g1: float, g0: float, rho: float) -> float:
    return (rho - g0) / (g1 - g0)


def cutoff(alpha_star: float, g1: float, g0: float, rho: float) -> float:
    if not g0 < rho < g1:
        raise ProblemError(f"payoffs must satisfy g0 < rho < g1, got {g0!r}, {rho!r}, {g1!r}")
    if not alpha_star > 0.0:
        raise ValueError("alpha_star must be positive")
    below = rho - g0
    p_star = alpha_star * below / ((alpha_star + 1.0) * (g1 - rho) + alpha_star * below)
    if not 0.0 < p_star < 1.0:
        raise SolverError(f"degenerate cut-off {p_star!r}")
    return p_star


def option_coefficient(alpha_star: float, p_star: float, g1: float, g0: float, rho: float) -> float:
    if not 0.0 < p_star < 1.0:
        raise ValueError(f"p_star must lie in (0, 1), got {p_star!r}")
    gap = rho - g0 - p_star * (g1 - g0)
    return gap / _option_shape(p_star, alpha_star)


def _option_shape(p, alpha):
    """(1 - p) * ((1 - p) / p) ** alpha, computed in log space."""
    return math.exp((alpha + 1.0) * math.log1p(-p) - alpha * math.log(p))


@dataclass(frozen=True)
class Solution:
    alpha_star: float
    p_star: float
    c_alpha: float
    problem: BanditProblem
    g1: float
    g0: float

    @property
    def rho(self) -> float:
        return self.problem.rho

    @property
    def p_myopic(self) -> float:
        return myopic_cutoff(self.g1, self.g0, self.rho)

    def policy(self, p):
        """Optimal share of time on the risky arm: 0 at or below the cut-off, 1 above."""
        return np.where(np.asarray(p, dtype=float) > self.p_star, 1.0, 0.0)

    def upper_branch(self, p):
        """Experimentation branch of the value, valid as a formula on (0, 1]."""
        p = np.asarray(p, dtype=float)
        a = self.alpha_star
        with np.errstate(divide="ignore"):
            shape = np.exp((a + 1.0) * np.log1p(-p) - a * np.log(p))
        out = self.g1 * p + self.g0 * (1.0 - p) + self.c_alpha * shape
        return out if out.ndim else float(out)

    def value(self, p):
        p = _check_belief(p)
        inside = np.clip(p, self.p_star, 1.0)
        out = np.where(p <= self.p_star, self.rho, self.upper_branch(inside))
        return out if out.ndim else float(out)

    __call__ = value

    def value_derivatives(self, p):
        """First and second derivatives of the value above the cut-off."""
        p = np.asarray(p, dtype=float)
        if np.any(p <= self.p_star) or np.any(p >= 1.0):
            raise ValueError("derivatives are available only on (p_star, 1)")
        a, c = self.alpha_star, self.c_alpha
        base = np.exp(a * np.log1p(-p) - (a + 1.0) * np.log(p))
        d1 = (self.g1 - self.g0) - c * (p + a) * base
        d2 = c * a * (a + 1.0) * base / (p * (1.0 - p))
        if p.ndim == 0:
            return float(d1), float(d2)
        return d1, d2

    def upper_derivative(self, p: float) -> float:
        """Derivative of the upper-branch formula; defined at the cut-off itself."""
        a, c = self.alpha_star, self.c_alpha
        base = math.exp(a * math.log1p(-p) - (a + 1.0) * math.log(p))
        return (self.g1 - self.g0) - c * (p + a) * base

    def to_dict(self) -> dict:
        return {
            "alphaStar": self.alpha_star,
            "pStar": self.p_star,
            "pMyopic": self.p_myopic,
            "cAlpha": self.c_alpha,
            "g1": self.g1,
            "g0": self.g0,
        }


def _check_belief(p):
    p = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("beliefs must lie in [0, 1]")
    return p


def solve_general(problem: BanditProblem, g1: float | None = None, g0: float | None = None,
                  tol: float = DEFAULT_TOL) -> Solution:
    """Solve with flow payoffs ``g1`` / ``g0`` decoupled from the drifts.

    The exponent depends only on the information-relevant parameters, so it
    is shared with the default payoff pair ``(mu_high, mu_low)``.
    """
    g1 = problem.high.mu if g1 is None else float(g1)
    g0 = problem.low.mu if g0 is None else float(g0)
    if not g0 < problem.rho < g1:
        raise ProblemError(f"payoffs must satisfy g0 < rho < g1, got {g0!r}, {problem.rho!r}, {g1!r}")
    alpha_star = solve_alpha(problem, tol)
    p_star = cutoff(alpha_star, g1, g0, problem.rho)
    c_alpha = option_coefficient(alpha_star, p_star, g1, g0, problem.rho)
    return Solution(alpha_star, p_star, c_alpha, problem, g1, g0)


def solve(problem: BanditProblem, tol: float = DEFAULT_TOL) -> Solution:
    return solve_general(problem, tol=tol)


SWEEP_PARAMETERS = ("r", "sigma", "rho", "jumpScale")


@dataclass(frozen=True)
class SweepRow:
    value: float
    alpha_star: float
    p_star: float
    p_myopic: float
    probe_value: float


class SweepError(ValueError):
    def __init__(self, index: int, value: float, reason: str):
        super().__init__(f"grid point {index} ({value!r}): {reason}")
        self.index = index
        self.value = value


def scale_jumps(problem: BanditProblem, scale: float) -> BanditProblem:
    """Multiply every jump rate by ``scale``, holding the continuous drifts fixed."""

    def arm(a: ArmType) -> ArmType:
        nu = JumpMeasure(tuple((h, rate * scale) for h, rate in a.nu.atoms))
        return ArmType(mu=a.drift + nu.first_moment, sigma=a.sigma, nu=nu)

    return problem.replace(high=arm(problem.high), low=arm(problem.low))


def with_parameter(problem: BanditProblem, parameter: str, value: float) -> BanditProblem:
    if parameter == "r":
        return problem.replace(r=value)
    if parameter == "rho":
        return problem.replace(rho=value)
    if parameter == "sigma":
        return problem.replace(
            high=ArmType(problem.high.mu, value, problem.high.nu),
            low=ArmType(problem.low.mu, value, problem.low.nu),
        )
    if parameter == "jumpScale":
        return scale_jumps(problem, value)
    raise ValueError(f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")


def sweep(problem: BanditProblem, parameter: str, grid: Sequence[float], probe: float = 0.5,
          tol: float = DEFAULT_TOL) -> list[SweepRow]:
    rows = []
    for i, value in enumerate(grid):
        try:
            sol = solve(with_parameter(problem, parameter, float(value)), tol)
        except (ProblemError, SolverError) as exc:
            raise SweepError(i, float(value), str(exc)) from exc
        rows.append(SweepRow(float(value), sol.alpha_star, sol.p_star, sol.p_myopic, sol.value(probe)))
    return rows
