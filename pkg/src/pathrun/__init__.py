"""Path integrals over the input sequences of a deterministic tile platformer."""

from .action import ANY_PERCENT, ActionFunctional, Category, CategoryConstraint, trajectory_action
from .agents import AgentSpec, RunRecord, generate_runs, read_log, write_log
from .errors import PathrunError
from .pathsearch import enumerate_optimal, least_action_path, min_time_path
from .propagator import (
    TransferOperator,
    WeightFunction,
    amplitude_bruteforce,
    born_distribution,
    completion_amplitude,
    double_slit,
    hbar_sweep,
    propagate,
)
from .runstats import completion_histogram, fit_hbar, tube_fraction, worlds_tree
from .simworld import (
    ALPHABET,
    DEFAULT_PHYSICS,
    InputSymbol,
    Level,
    LatticeSystem,
    Physics,
    PlatformerSystem,
    load_level,
    read_level,
    run,
    step,
)

__version__ = "0.1.0"
