"""Monte Carlo evaluation of Markov strategies on sampled Lévy paths.

Every path draws the arm's type from the prior, samples the risky process on
a time grid and runs the exact Bayes filter on what it observes.  Two coupled
estimates of the discounted payoff are accumulated on the same path: the
realised payoff stream, and the belief-weighted expected flow payoff.  Both
are unbiased for the same quantity; the second has lower variance.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numba as nb
import numpy as np

from .levy_core import ArmType, BanditProblem, check_problem
from .filter import Observation
from .rng import path_key, uniform

ESTIMATORS = ("payoff", "belief", "both")
CHUNK = 2048


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Strategy:
    """Piecewise-constant Markov control.

    ``values[i]`` is the share of time on the risky arm for beliefs ``p`` with
    exactly ``i`` edges strictly below ``p``; a cut-off at ``c`` is
    ``edges=(c,), values=(0, 1)`` so that it plays safe iff ``p <= c``.
    """

    edges: tuple[float, ...]
    values: tuple[float, ...]
    label: str = "table"

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        values = tuple(float(v) for v in self.values)
        if len(values) != len(edges) + 1:
            raise ValueError("need exactly one more value than edges")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError("edges must be strictly increasing")
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError("controls must lie in [0, 1]")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", values)

    @classmethod
    def cutoff_at(cls, threshold: float) -> "Strategy":
        return cls((threshold,), (0.0, 1.0), f"cutoff:{threshold!r}")

    @classmethod
    def always_risky(cls) -> "Strategy":
        return cls((), (1.0,), "always-risky")

    @classmethod
    def always_safe(cls) -> "Strategy":
        return cls((), (0.0,), "always-safe")

    @classmethod
    def constant(cls, k: float) -> "Strategy":
        return cls((), (k,), f"constant:{k!r}")

    @classmethod
    def table(cls, edges, values) -> "Strategy":
        return cls(tuple(edges), tuple(values), "table")

    def __call__(self, p: float) -> float:
        return self.values[sum(1 for e in self.edges if e < p)]


def parse_strategy(text: str, p_star: float | None = None) -> Strategy:
    """Parse ``cutoff[:c]``, ``always-risky``, ``always-safe``, ``constant:k`` or ``table:EDGES/VALUES``.

    A bare ``cutoff`` uses ``p_star``.  Table edges and values are comma separated.
    """
    name, _, arg = text.partition(":")
    try:
        if name == "always-risky" and not arg:
            return Strategy.always_risky()
        if name == "always-safe" and not arg:
            return Strategy.always_safe()
        if name == "cutoff":
            if not arg:
                if p_star is None:
                    raise ValueError("bare 'cutoff' needs a solved cut-off")
                return Strategy.cutoff_at(p_star)
            return Strategy.cutoff_at(float(arg))
        if name == "constant" and arg:
            return Strategy.constant(float(arg))
        if name == "table" and arg:
            edges, _, values = arg.partition("/")
            edge_list = [float(x) for x in edges.split(",") if x]
            return Strategy.table(edge_list, [float(x) for x in values.split(",")])
    except ValueError as exc:
        raise ValueError(f"invalid strategy {text!r}: {exc}") from exc
    raise ValueError(f"invalid strategy {text!r}")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    horizon: float | None = None
    paths: int = 100_000
    seed: int = 0
    estimator: str = "both"
    p0: float = 0.5
    workers: int = 1
    tail: float = 1e-3

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.horizon is not None and not self.horizon > 0.0:
            raise ValueError("horizon must be positive")
        if self.paths < 1:
            raise ValueError("paths must be positive")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError("p0 must lie in [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        if not 0.0 < self.tail < 1.0:
            raise ValueError("tail must lie in (0, 1)")

    def n_steps(self, r: float) -> int:
        horizon = self.horizon if self.horizon is not None else math.log(1.0 / self.tail) / r
        return max(1, math.ceil(horizon / self.dt - 1e-9))


@dataclass(frozen=True)
class EstimatorSummary:
    mean: float
    stderr: float


@dataclass(frozen=True)
class SimResult:
    mean: float
    stderr: float
    paths: int
    tail_bound: float
    estimator: str
    horizon: float
    dt: float
    steps: int
    per_estimator: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "paths": self.paths,
            "tailBound": self.tail_bound,
            "estimator": self.estimator,
            "horizon": self.horizon,
            "dt": self.dt,
            "steps": self.steps,
            "perEstimator": {k: asdict(v) for k, v in self.per_estimator.items()},
        }


@dataclass(frozen=True)
class PathBatch:
    payoff: np.ndarray
    belief: np.ndarray
    final_belief: np.ndarray
    high: np.ndarray


@nb.njit(nogil=True, cache=True)
def _poisson(u, mean, p_zero):
    """Inverse-transform Poisson draw; ``p_zero`` must equal exp(-mean)."""
    if mean <= 0.0 or u <= p_zero:
        return 0
    pk = p_zero
    cdf = pk
    k = 0
    while u > cdf and pk > 0.0:
        k += 1
        pk *= mean / k
        cdf += pk
    return k


@nb.njit(nogil=True, cache=True)
def _sample_step(key, counter, drift, sigma, rates, dk, counts, p_zero):
    """Continuous increment over ``dk``; jump counts per atom are written to ``counts``.

    ``p_zero[j]`` is exp(-rates[j] * dk).  Uses counters ``counter`` ..
    ``counter + 1 + len(rates)``.
    """
    xc = drift * dk
    if sigma > 0.0:
        u1 = uniform(key, counter)
        u2 = uniform(key, counter + np.uint64(1))
        xi = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        xc += sigma * math.sqrt(dk) * xi
    for j in range(rates.shape[0]):
        counts[j] = _poisson(uniform(key, counter + np.uint64(2 + j)), rates[j] * dk, p_zero[j])
    return xc


@nb.njit(nogil=True, cache=True)
def _logistic(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@nb.njit(nogil=True, cache=True)
def _run_paths(start, seed, p0, sizes, rate1, rate0, log_ratio, b1, b0, sigma, mu1, mu0, rho, r,
               edges, values, dt, n_steps, drift_sign, out_payoff, out_belief, out_final, out_high):
    n_atoms = sizes.shape[0]
    stride = np.uint64(2 + n_atoms)
    mass_gap = rate1.sum() - rate0.sum()
    disc_end = math.exp(-r * dt * n_steps)
    counts = np.zeros(n_atoms, dtype=np.int64)
    if p0 <= 0.0:
        ell0 = -np.inf
    elif p0 >= 1.0:
        ell0 = np.inf
    else:
        ell0 = math.log(p0) - math.log1p(-p0)
    q = math.exp(-r * dt)
    full1 = np.exp(-rate1 * dt)
    full0 = np.exp(-rate0 * dt)
    p_zero = np.empty(n_atoms)
    drift_factor = math.exp(-drift_sign * mass_gap * dt)
    sqrt_dt = math.sqrt(dt)
    for i in range(out_payoff.shape[0]):
        key = path_key(seed, np.uint64(start + i))
        high = uniform(key, np.uint64(0)) < p0
        drift = b1 if high else b0
        rates = rate1 if high else rate0
        full = full1 if high else full0
        ell = ell0
        frozen = math.isinf(ell)
        pay = 0.0
        bel = 0.0
        disc = 1.0
        p = _logistic(ell)
        odds = math.exp(min(ell, 700.0))
        spare = 0.0
        spare_ok = False
        for s in range(n_steps):
            m = 0
            while m < edges.shape[0] and edges[m] < p:
                m += 1
            kappa = values[m]
            if kappa <= 0.0:
                # a Markov control that stops experimenting never observes again
                tail = rho * (disc - disc_end)
                pay += tail
                bel += tail
                break
            disc_next = disc * q
            w = disc - disc_next
            bel += w * ((mu1 * p + mu0 * (1.0 - p)) * kappa + rho * (1.0 - kappa))
            dk = kappa * dt
            pz = full
            if kappa != 1.0:
                for j in range(n_atoms):
                    p_zero[j] = math.exp(-rates[j] * dk)
                pz = p_zero
            counter = np.uint64(1) + np.uint64(s) * stride
            xc = drift * dk
            if sigma > 0.0:
                # Box-Muller yields two normals; the second serves the next step
                if spare_ok:
                    xi = spare
                    spare_ok = False
                else:
                    radius = math.sqrt(-2.0 * math.log(uniform(key, counter)))
                    angle = 2.0 * math.pi * uniform(key, counter + np.uint64(1))
                    xi = radius * math.cos(angle)
                    spare = radius * math.sin(angle)
                    spare_ok = True
                xc += sigma * (sqrt_dt if kappa == 1.0 else math.sqrt(dk)) * xi
            for j in range(n_atoms):
                counts[j] = _poisson(uniform(key, counter + np.uint64(2 + j)), rates[j] * dk, pz[j])
            jump_sum = 0.0
            for j in range(n_atoms):
                jump_sum += sizes[j] * counts[j]
            pay += w / dt * (xc + jump_sum + rho * (1.0 - kappa) * dt)
            if not frozen:
                dl = -drift_sign * mass_gap * dk
                jumped = False
                if sigma > 0.0:
                    dl += (b1 - b0) / (sigma * sigma) * (xc - 0.5 * (b1 + b0) * dk)
                for j in range(n_atoms):
                    if counts[j] > 0:
                        jumped = True
                        if math.isinf(log_ratio[j]):
                            frozen = True
                        else:
                            dl += counts[j] * log_ratio[j]
                if frozen:
                    ell = np.inf
                    p = 1.0
                elif sigma == 0.0 and kappa == 1.0 and not jumped:
                    # deterministic between jumps: scale the odds instead of calling exp
                    ell += dl
                    odds *= drift_factor
                    p = odds / (1.0 + odds)
                else:
                    ell += dl
                    p = _logistic(ell)
                    if sigma == 0.0:
                        odds = math.exp(min(ell, 700.0))
            disc = disc_next
        out_payoff[i] = pay
        out_belief[i] = bel
        out_final[i] = _logistic(ell)
        out_high[i] = high


@nb.njit(nogil=True, cache=True)
def _sample_many(seed, drift, sigma, sizes, rates, dt, out):
    counts = np.zeros(sizes.shape[0], dtype=np.int64)
    stride = np.uint64(2 + sizes.shape[0])
    key = path_key(seed, np.uint64(0))
    p_zero = np.exp(-rates * dt)
    for i in range(out.shape[0]):
        xc = _sample_step(key, np.uint64(1) + np.uint64(i) * stride, drift, sigma, rates, dt, counts, p_zero)
        total = xc
        for j in range(sizes.shape[0]):
            total += sizes[j] * counts[j]
        out[i] = total


def _atoms(problem: BanditProblem):
    sizes = np.array(problem.support, dtype=float)
    rate1 = np.array([problem.rates(h)[0] for h in sizes], dtype=float)
    rate0 = np.array([problem.rates(h)[1] for h in sizes], dtype=float)
    with np.errstate(divide="ignore"):
        log_ratio = np.log(rate1) - np.log(rate0)
    return sizes, rate1, rate0, log_ratio


def _seed(seed: int) -> np.uint64:
    return np.uint64(int(seed) % 2**64)


class StepSampler:
    """Counter-based source of one-step observations for a single arm type."""

    def __init__(self, seed: int = 0, path_index: int = 0):
        self.key = path_key(_seed(seed), np.uint64(path_index))
        self.counter = 1

    def draw(self, arm: ArmType, dt: float) -> Observation:
        return sample_path_step(arm, dt, self)


def sample_path_step(arm: ArmType, dt: float, rng: StepSampler) -> Observation:
    """One step of the Lévy-Itô decomposition: drift plus Brownian increment plus Poisson jumps."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    sizes = np.array(arm.nu.sizes, dtype=float)
    rates = np.array([rate for _, rate in arm.nu.atoms], dtype=float)
    counts = np.zeros(sizes.shape[0], dtype=np.int64)
    xc = _sample_step(rng.key, np.uint64(rng.counter), arm.drift, arm.sigma, rates, dt, counts,
                      np.exp(-rates * dt))
    rng.counter += 2 + sizes.shape[0]
    jumps = tuple(float(h) for h, c in zip(sizes, counts) for _ in range(int(c)))
    return Observation(dt, float(xc), jumps)


def sample_increments(arm: ArmType, dt: float, n: int, seed: int = 0) -> np.ndarray:
    """``n`` independent one-step total increments (continuous part plus jumps)."""
    sizes = np.array(arm.nu.sizes, dtype=float)
    rates = np.array([rate for _, rate in arm.nu.atoms], dtype=float)
    out = np.empty(n)
    _sample_many(_seed(seed), arm.drift, arm.sigma, sizes, rates, float(dt), out)
    return out


def simulate_paths(problem: BanditProblem, strategy: Strategy, config: SimConfig, *, start: int = 0,
                   count: int | None = None, _drift_sign: float = 1.0) -> PathBatch:
    """Simulate paths ``start .. start + count``; results do not depend on ``config.workers``.

    ``_drift_sign`` flips the no-jump drift of the filter; it exists only to
    give the martingale diagnostic a negative control.
    """
    check_problem(problem)
    count = config.paths if count is None else count
    sizes, rate1, rate0, log_ratio = _atoms(problem)
    n_steps = config.n_steps(problem.r)
    high, low = problem.high, problem.low
    edges = np.array(strategy.edges, dtype=float)
    values = np.array(strategy.values, dtype=float)
    seed = _seed(config.seed)

    payoff = np.empty(count)
    belief = np.empty(count)
    final = np.empty(count)
    is_high = np.empty(count, dtype=np.bool_)

    def run(lo: int, hi: int) -> None:
        _run_paths(start + lo, seed, config.p0, sizes, rate1, rate0, log_ratio, high.drift, low.drift,
                   problem.sigma, high.mu, low.mu, problem.rho, problem.r, edges, values, config.dt,
                   n_steps, _drift_sign, payoff[lo:hi], belief[lo:hi], final[lo:hi], is_high[lo:hi])

    chunks = [(lo, min(lo + CHUNK, count)) for lo in range(0, count, CHUNK)]
    if config.workers == 1 or len(chunks) == 1:
        for lo, hi in chunks:
            run(lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            list(pool.map(lambda c: run(*c), chunks))
    if not (np.all(np.isfinite(payoff)) and np.all(np.isfinite(belief))):
        raise SimulationError("non-finite payoff produced")
    return PathBatch(payoff, belief, final, is_high)


def run_path(problem: BanditProblem, strategy: Strategy, config: SimConfig, path_index: int):
    """(payoff estimate, belief estimate, final belief) of a single path."""
    batch = simulate_paths(problem, strategy, config, start=path_index, count=1)
    return float(batch.payoff[0]), float(batch.belief[0]), float(batch.final_belief[0])


def summarize(x: np.ndarray) -> EstimatorSummary:
    """Mean and standard error; shifting by the first sample keeps constant samples exact."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples")
    shifted = x - x[0]
    mean = float(x[0] + shifted.mean())
    stderr = float(shifted.std(ddof=1) / math.sqrt(x.size))
    return EstimatorSummary(mean, stderr)


def horizon_of(problem: BanditProblem, config: SimConfig) -> float:
    return config.n_steps(problem.r) * config.dt


def tail_bound(problem: BanditProblem, horizon: float) -> float:
    scale = max(abs(problem.low.mu), abs(problem.high.mu), abs(problem.rho))
    return scale * math.exp(-problem.r * horizon)


def aggregate(problem: BanditProblem, config: SimConfig, batch: PathBatch) -> SimResult:
    per = {}
    if config.estimator in ("payoff", "both"):
        per["payoff"] = summarize(batch.payoff)
    if config.estimator in ("belief", "both"):
        per["belief"] = summarize(batch.belief)
    if config.estimator == "both":
        per["difference"] = summarize(batch.payoff - batch.belief)
    head = per["payoff"] if config.estimator == "payoff" else per["belief"]
    horizon = horizon_of(problem, config)
    return SimResult(
        mean=head.mean,
        stderr=head.stderr,
        paths=batch.payoff.size,
        tail_bound=tail_bound(problem, horizon),
        estimator=config.estimator,
        horizon=horizon,
        dt=config.dt,
        steps=config.n_steps(problem.r),
        per_estimator=per,
    )


def estimate(problem: BanditProblem, strategy: Strategy, config: SimConfig) -> SimResult:
    if config.paths < 2:
        raise ValueError("estimate needs at least two paths")
    return aggregate(problem, config, simulate_paths(problem, strategy, config))


@dataclass(frozen=True)
class MartingaleReport:
    p0: float
    mean: float
    stderr: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def martingale_diagnostic(problem: BanditProblem, config: SimConfig, p0: float, *,
                          _drift_sign: float = 1.0) -> MartingaleReport:
    """Check that the mean terminal posterior under full experimentation equals the prior (3 SE)."""
    cfg = SimConfig(dt=config.dt, horizon=config.horizon, paths=config.paths, seed=config.seed,
                    estimator="belief", p0=p0, workers=config.workers, tail=config.tail)
    batch = simulate_paths(problem, Strategy.always_risky(), cfg, _drift_sign=_drift_sign)
    s = summarize(batch.final_belief)
    return MartingaleReport(p0, s.mean, s.stderr, abs(s.mean - p0) <= 3.0 * s.stderr)
