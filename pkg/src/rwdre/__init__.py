"""Monte Carlo lab for a random walk driven by a cloud of lazy random walks.

The walker steps right with probability p_circ on vacant sites and
p_bullet on occupied ones; the environment is a Poisson field of
independent lazy simple random walks.  Everything is driven by a keyed
counter-based uniform field, so any path, record or estimate can be
replayed from its seed alone.
"""

__version__ = "0.1.0"

from .params import (
    ConfigError,
    ModelParams,
    NoSeedInfectionError,
    Overrides,
    RwdreError,
    StateSpaceError,
    config_from_pairs,
)
from .environment import build_window, particle_system
from .walker import (
    CouplingReport,
    NoEmptyIntervalError,
    WalkerPath,
    coupling_report,
    find_empty_interval,
    run_ghost,
    run_walker,
)
from .infection import compare_walker_front, run_infection
from .oracle import ExactPmf, empirical_pmf, exact_pmf_poisson, exact_walker_pmf, tv_distance
from .regeneration import (
    RunContext,
    chained_regenerations,
    cone_classify,
    detect_regeneration,
    influence_field,
    is_good_record_time,
    make_grt_config,
    record_times,
    run_context,
)
from .estimators import (
    backtrack_profile,
    clt_diagnostic,
    escape_probability,
    estimate_backtrack,
    estimate_speed,
    regenerative_estimates,
    walker_front_speeds,
)
from .sweep import SweepConfig, SweepResult, classify_phase, run_sweep

__all__ = [
    "__version__",
    "ConfigError",
    "CouplingReport",
    "ExactPmf",
    "ModelParams",
    "NoEmptyIntervalError",
    "NoSeedInfectionError",
    "Overrides",
    "RunContext",
    "RwdreError",
    "StateSpaceError",
    "SweepConfig",
    "SweepResult",
    "WalkerPath",
    "backtrack_profile",
    "build_window",
    "chained_regenerations",
    "classify_phase",
    "clt_diagnostic",
    "compare_walker_front",
    "cone_classify",
    "config_from_pairs",
    "coupling_report",
    "detect_regeneration",
    "empirical_pmf",
    "escape_probability",
    "estimate_backtrack",
    "estimate_speed",
    "exact_pmf_poisson",
    "exact_walker_pmf",
    "find_empty_interval",
    "influence_field",
    "is_good_record_time",
    "make_grt_config",
    "particle_system",
    "record_times",
    "regenerative_estimates",
    "run_context",
    "run_ghost",
    "run_infection",
    "run_sweep",
    "run_walker",
    "tv_distance",
    "walker_front_speeds",
]
