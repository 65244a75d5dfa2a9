"""Model types for the two-armed Lévy bandit and validation of its standing assumptions.

A risky arm is one of two Lévy-process hypotheses (High / Low). Each hypothesis
is an :class:`ArmType` carrying its total expectation rate ``mu``, a Brownian
coefficient ``sigma`` and a finite, discrete jump measure.  A
:class:`BanditProblem` pairs the two hypotheses with the safe flow payoff
``rho`` and the discount rate ``r``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

ATOL = 1e-12
DRIFT_RTOL = 1e-12


class ProblemError(ValueError):
    """Raised when a problem is structurally malformed or fails validation."""


class ConfigError(ValueError):
    """Raised when a problem file cannot be parsed; ``path`` locates the bad field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class JumpMeasure:
    """Finite discrete Lévy measure: ``atoms`` is a tuple of ``(h, rate)`` pairs."""

    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        atoms = tuple((float(h), float(rate)) for h, rate in self.atoms)
        sizes = [h for h, _ in atoms]
        if any(h == 0.0 or not math.isfinite(h) for h in sizes):
            raise ProblemError("jump sizes must be finite and nonzero")
        if len(set(sizes)) != len(sizes):
            raise ProblemError("jump sizes must be distinct")
        if any(rate < 0.0 or not math.isfinite(rate) for _, rate in atoms):
            raise ProblemError("jump rates must be finite and nonnegative")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Iterable[float]]) -> "JumpMeasure":
        return cls(tuple(tuple(p) for p in pairs))

    def rate(self, h: float) -> float:
        for size, rate in self.atoms:
            if size == h:
                return rate
        return 0.0

    @property
    def sizes(self) -> tuple[float, ...]:
        return tuple(h for h, _ in self.atoms)

    @property
    def total_mass(self) -> float:
        return math.fsum(rate for _, rate in self.atoms)

    @property
    def first_moment(self) -> float:
        return math.fsum(h * rate for h, rate in self.atoms)

    @property
    def second_moment(self) -> float:
        return math.fsum(h * h * rate for h, rate in self.atoms)


@dataclass(frozen=True)
class ArmType:
    """One hypothesis for the risky arm.

    ``mu`` is the total expectation rate, E[X(t)] = mu * t, so the continuous
    drift is ``b = mu - sum(h * rate)``.
    """

    mu: float
    sigma: float = 0.0
    nu: JumpMeasure = field(default_factory=JumpMeasure)

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not isinstance(self.nu, JumpMeasure):
            object.__setattr__(self, "nu", JumpMeasure.from_pairs(self.nu))
        if self.sigma < 0.0:
            raise ProblemError("sigma must be nonnegative")

    @property
    def drift(self) -> float:
        """Continuous drift b of the Lévy-Itô split."""
        return self.mu - self.nu.first_moment

    @property
    def second_moment(self) -> float:
        return self.mu**2 + self.sigma**2 + self.nu.second_moment

    @property
    def increment_variance_rate(self) -> float:
        return self.sigma**2 + self.nu.second_moment


@dataclass(frozen=True)
class BanditProblem:
    high: ArmType
    low: ArmType
    rho: float
    r: float

    def __post_init__(self):
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "r", float(self.r))

    @property
    def sigma(self) -> float:
        return self.high.sigma

    @property
    def support(self) -> tuple[float, ...]:
        """Jump sizes charged by the High measure, in declaration order."""
        return tuple(h for h, rate in self.high.nu.atoms if rate > 0.0)

    def rates(self, h: float) -> tuple[float, float]:
        """(High rate, Low rate) of the atom ``h``."""
        return self.high.nu.rate(h), self.low.nu.rate(h)

    def replace(self, **changes) -> "BanditProblem":
        fields = dict(high=self.high, low=self.low, rho=self.rho, r=self.r)
        fields.update(changes)
        return BanditProblem(**fields)

    def to_dict(self) -> dict:
        def arm(a: ArmType) -> dict:
            return {"mu": a.mu, "sigma": a.sigma, "jumps": [list(atom) for atom in a.nu.atoms]}

        return {"high": arm(self.high), "low": arm(self.low), "rho": self.rho, "r": self.r}

    @classmethod
    def from_dict(cls, data: Mapping) -> "BanditProblem":
        return parse_problem(data)


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    ok: bool
    reason: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[AssumptionCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failed(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.ok)

    def __getitem__(self, name: str) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [{"name": c.name, "ok": c.ok, "reason": c.reason} for c in self.checks],
        }

    def format(self) -> str:
        lines = []
        for c in self.checks:
            status = "PASS" if c.ok else "FAIL"
            lines.append(f"{c.name:<6} {status}" + (f"  {c.reason}" if c.reason else ""))
        lines.append("OK" if self.ok else "FAILED: " + ", ".join(self.failed))
        return "\n".join(lines)


@dataclass(frozen=True)
class DerivedQuantities:
    """Quantities shared by the solver, the generator and the filter.

    ``snr`` is the squared signal-to-noise ratio of the Brownian channel,
    ``beta**2 * sigma**2``; it is zero when ``sigma == 0``.
    """

    beta: float
    mass_gap: float
    snr: float
    b_infinity: tuple[float, ...]


def validate(problem: BanditProblem) -> ValidationReport:
    """Check A1-A6 plus the drift condition required when sigma is zero. Never raises."""
    high, low = problem.high, problem.low
    checks = []

    numbers = [high.mu, high.sigma, low.mu, low.sigma, problem.rho, problem.r]
    numbers += [x for a in (high, low) for atom in a.nu.atoms for x in atom]
    finite = all(math.isfinite(x) for x in numbers)
    checks.append(AssumptionCheck("finite", finite, "" if finite else "non-finite field"))

    a1 = finite and math.isfinite(high.second_moment) and math.isfinite(low.second_moment)
    checks.append(AssumptionCheck("A1", a1, "" if a1 else "second moment is not finite"))

    a2 = abs(high.sigma - low.sigma) <= ATOL
    checks.append(
        AssumptionCheck("A2", a2, "" if a2 else f"sigma differs: high={high.sigma!r}, low={low.sigma!r}")
    )

    # finite atom lists make these automatic; kept so reports list every assumption
    a3 = finite and math.isfinite(high.nu.total_mass - low.nu.total_mass)
    checks.append(AssumptionCheck("A3", a3, "" if a3 else "mass difference not finite"))
    a4 = finite and math.isfinite(high.nu.first_moment - low.nu.first_moment)
    checks.append(AssumptionCheck("A4", a4, "" if a4 else "first-moment difference not finite"))

    a5 = low.mu < problem.rho < high.mu
    checks.append(
        AssumptionCheck(
            "A5", a5, "" if a5 else f"need mu_low < rho < mu_high, got {low.mu!r}, {problem.rho!r}, {high.mu!r}"
        )
    )

    bad = []
    for h, rate0 in low.nu.atoms:
        rate1 = high.nu.rate(h)
        if rate0 > rate1 + ATOL:
            bad.append(f"h={h!r}: low rate {rate0!r} > high rate {rate1!r}")
    a6 = not bad
    checks.append(AssumptionCheck("A6", a6, "; ".join(bad)))

    rpos = problem.r > 0.0
    checks.append(AssumptionCheck("r>0", rpos, "" if rpos else f"discount rate must be positive, got {problem.r!r}"))

    if high.sigma == 0.0 and low.sigma == 0.0:
        b1, b0 = high.drift, low.drift
        same = abs(b1 - b0) <= DRIFT_RTOL * max(abs(b1), abs(b0), 1.0)
        reason = "" if same else f"sigma=0 requires equal continuous drifts, got {b1!r} vs {b0!r}"
        checks.append(AssumptionCheck("drift", same, reason))
    else:
        checks.append(AssumptionCheck("drift", True))

    return ValidationReport(tuple(checks))


def check_problem(problem: BanditProblem) -> BanditProblem:
    report = validate(problem)
    if not report.ok:
        raise ProblemError("invalid problem: " + "; ".join(f"{c.name} ({c.reason})" for c in report.checks if not c.ok))
    return problem


def derive(problem: BanditProblem, check: bool = True) -> DerivedQuantities:
    """Filter and solver inputs; ``check=False`` skips validation for degenerate inspection."""
    if check:
        check_problem(problem)
    high, low = problem.high, problem.low
    sigma = problem.sigma
    if sigma > 0.0:
        beta = (low.drift - high.drift) / sigma**2
        snr = (high.drift - low.drift) ** 2 / sigma**2
    else:
        beta = 0.0
        snr = 0.0
    mass_gap = high.nu.total_mass - low.nu.total_mass
    b_inf = tuple(h for h, rate in high.nu.atoms if rate > 0.0 and low.nu.rate(h) == 0.0)
    return DerivedQuantities(beta=beta, mass_gap=mass_gap, snr=snr, b_infinity=b_inf)


def _number(data: Mapping, key: str, path: str) -> float:
    if key not in data:
        raise ConfigError("missing field", f"{path}.{key}" if path else key)
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", f"{path}.{key}" if path else key)
    return float(value)


def _arm(data, path: str) -> ArmType:
    if not isinstance(data, Mapping):
        raise ConfigError("expected an object", path)
    mu = _number(data, "mu", path)
    sigma = _number(data, "sigma", path)
    jumps = data.get("jumps", [])
    if not isinstance(jumps, list):
        raise ConfigError("expected a list of [h, rate] pairs", f"{path}.jumps")
    atoms = []
    for i, pair in enumerate(jumps):
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in pair)
        ):
            raise ConfigError("expected [h, rate]", f"{path}.jumps[{i}]")
        atoms.append((float(pair[0]), float(pair[1])))
    try:
        return ArmType(mu=mu, sigma=sigma, nu=JumpMeasure(tuple(atoms)))
    except ProblemError as exc:
        raise ConfigError(str(exc), path) from exc


def parse_problem(data: Mapping) -> BanditProblem:
    """Build a problem from the JSON config schema; raises :class:`ConfigError`."""
    if not isinstance(data, Mapping):
        raise ConfigError("expected a JSON object at top level")
    for key in ("high", "low"):
        if key not in data:
            raise ConfigError("missing field", key)
    return BanditProblem(
        high=_arm(data["high"], "high"),
        low=_arm(data["low"], "low"),
        rho=_number(data, "rho", ""),
        r=_number(data, "r", ""),
    )


def load_problem(path: str | Path) -> BanditProblem:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_problem(data)


def krc(lam: float = 1.0, r: float = 1.0, rho: float = 0.5, hbar: float = 1.0) -> BanditProblem:
    """Exponential-bandit instance: High pays ``hbar`` at Poisson rate ``lam``, Low pays nothing."""
    return BanditProblem(
        high=ArmType(mu=lam * hbar, sigma=0.0, nu=JumpMeasure(((hbar, lam),))),
        low=ArmType(mu=0.0, sigma=0.0),
        rho=rho,
        r=r,
    )


def brownian(mu1: float = 1.0, mu0: float = -1.0, sigma: float = 1.0, rho: float = 0.0, r: float = 1.0) -> BanditProblem:
    """Pure Brownian-with-drift instance, no jumps."""
    return BanditProblem(high=ArmType(mu1, sigma), low=ArmType(mu0, sigma), rho=rho, r=r)


def poisson_pair(lam_high: float = 2.0, lam_low: float = 1.0, r: float = 1.0, rho: float | None = None,
                 hbar: float = 1.0) -> BanditProblem:
    """Two Poisson rates with a common jump size; ``rho`` defaults to the midpoint payoff."""
    if rho is None:
        rho = 0.5 * (lam_high + lam_low) * hbar
    return BanditProblem(
        high=ArmType(mu=lam_high * hbar, sigma=0.0, nu=JumpMeasure(((hbar, lam_high),))),
        low=ArmType(mu=lam_low * hbar, sigma=0.0, nu=JumpMeasure(((hbar, lam_low),))),
        rho=rho,
        r=r,
    )
