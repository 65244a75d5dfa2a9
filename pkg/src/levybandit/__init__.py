"""Optimal experimentation in the two-armed Lévy bandit: solver, HJB checks, filter and simulator."""

__version__ = "0.1.0"

from .levy_core import (
    ArmType,
    BanditProblem,
    ConfigError,
    DerivedQuantities,
    JumpMeasure,
    ProblemError,
    ValidationReport,
    derive,
    load_problem,
    parse_problem,
    validate,
)
from .solver import (
    NoSignalError,
    NonConvergenceError,
    Solution,
    SolverError,
    cutoff,
    myopic_cutoff,
    option_coefficient,
    root_function,
    solve,
    solve_alpha,
    solve_general,
    sweep,
)
from .generator import GeneratorInput, apply_generator, belief_jump, hjb_residual
from .filter import BeliefState, Observation, drift_only, init_belief, update_belief
from .simulator import SimConfig, SimResult, Strategy, estimate, martingale_diagnostic, run_path
from .estimator import CutoffPolicy

__all__ = [
    "ArmType", "BanditProblem", "ConfigError", "DerivedQuantities", "JumpMeasure", "ProblemError",
    "ValidationReport", "derive", "load_problem", "parse_problem", "validate",
    "NoSignalError", "NonConvergenceError", "Solution", "SolverError", "cutoff", "myopic_cutoff",
    "option_coefficient", "root_function", "solve", "solve_alpha", "solve_general", "sweep",
    "GeneratorInput", "apply_generator", "belief_jump", "hjb_residual",
    "BeliefState", "Observation", "drift_only", "init_belief", "update_belief",
    "SimConfig", "SimResult", "Strategy", "estimate", "martingale_diagnostic", "run_path",
    "CutoffPolicy",
]
