"""Infinitesimal operator of the belief process and the HJB residual of a solution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .levy_core import BanditProblem, derive
from .solver import Solution


@dataclass(frozen=True)
class GeneratorInput:
    """A test function with its first two derivatives, evaluated at belief ``p`` under control ``k``."""

    f: Callable[[float], float]
    df: Callable[[float], float]
    d2f: Callable[[float], float]
    p: float
    k: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p!r}")
        if not 0.0 <= self.k <= 1.0:
            raise ValueError(f"k must lie in [0, 1], got {self.k!r}")


def belief_jump(p: float, h: float, problem: BanditProblem) -> float:
    """Posterior after a jump of size ``h`` is observed at prior ``p``."""
    rate1, rate0 = problem.rates(h)
    if rate1 <= 0.0:
        raise ValueError(f"jump size {h!r} is not charged by the High measure")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if p == 0.0:
        return 0.0
    num = p * rate1
    return num / (num + (1.0 - p) * rate0)


def _jump_sum(f, p, k, problem):
    total = 0.0
    fp = f(p)
    for h in problem.support:
        rate1, rate0 = problem.rates(h)
        intensity = p * rate1 + (1.0 - p) * rate0
        total += (f(belief_jump(p, h, problem)) - fp) * intensity
    return total * k


def apply_generator(inp: GeneratorInput, problem: BanditProblem) -> float:
    if inp.k == 0.0:
        return 0.0
    d = derive(problem)
    p, k = inp.p, inp.k
    q = p * (1.0 - p)
    out = -d.mass_gap * q * inp.df(p) * k
    if d.snr > 0.0:
        out += 0.5 * d.snr * inp.d2f(p) * q * q * k
    return out + _jump_sum(inp.f, p, k, problem)


def flow_payoff(solution: Solution, p: float, k: float) -> float:
    return (solution.g1 * p + solution.g0 * (1.0 - p)) * k + solution.rho * (1.0 - k)


def hjb_residual(solution: Solution, p: float, k: float) -> float:
    """Generator of the value plus r * (flow payoff - value).

    Non-positive for every control and zero under the optimal one.  The value
    is not twice differentiable at the cut-off, which is therefore rejected.
    """
    if p == solution.p_star:
        raise ValueError("the residual is undefined at the cut-off")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"k must lie in [0, 1], got {k!r}")
    problem = solution.problem
    r = problem.r
    if p < solution.p_star:
        # value is flat at rho here: only the jump term survives in the generator
        gen = _jump_sum(solution.value, p, k, problem) if k > 0.0 else 0.0
        return gen + r * (flow_payoff(solution, p, k) - solution.rho)

    def df(x):
        return solution.value_derivatives(x)[0]

    def d2f(x):
        return solution.value_derivatives(x)[1]

    gen = apply_generator(GeneratorInput(solution.value, df, d2f, p, k), problem)
    return gen + r * (flow_payoff(solution, p, k) - solution.value(p))
