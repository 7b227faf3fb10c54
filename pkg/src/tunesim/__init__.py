"""Multi-fidelity hyperparameter tuning schedulers, simulated on tabulated
learning-curve benchmarks.

The package provides successive-halving schedulers (asynchronous promotion
with an optional progressively growing resource cap), rank-stability criteria
that drive the cap growth, a deterministic discrete-event simulator of
parallel workers, a synthetic benchmark generator, and an experiment runner
that aggregates seeded repetitions into comparison tables.
"""

from .benchgen import (
    FAMILIES,
    FORMAT_MAGIC,
    CurveModel,
    FormatError,
    GenerationError,
    crossing_report,
    generate,
    load,
    save,
)
from .core import (
    ConfigId,
    DataError,
    InternalError,
    PashaState,
    ResourceSpec,
    RungEntry,
    RungLadder,
    TunesimError,
    UsageError,
    grow,
    initial_pasha_state,
    max_rung_index,
    rung_levels,
    rung_resource,
)
from .experiment import (
    CellResult,
    ExperimentReport,
    ExperimentSpec,
    GeneratorSpec,
    MethodRow,
    MethodSpec,
    aggregate,
    emit_report,
    read_cells,
    reference_method,
    resolve_tables,
    run_cells,
    run_experiment,
    write_cells,
)
from .ranking import (
    CRITERION_KINDS,
    RankedList,
    RankingCriterion,
    SoftRank,
    arrr,
    epsilon_mean_distance,
    epsilon_median_distance,
    epsilon_sigma,
    is_stable,
    is_stable_direct,
    is_stable_rbo,
    is_stable_soft,
    project,
    rbo,
    rrr,
    soft_rank,
)
from .scheduler import (
    DEFAULT_CRITERION,
    MODES,
    Job,
    RandomSearcher,
    Scheduler,
    SchedulerConfig,
    run_baseline,
)
from .simulator import (
    Curve,
    LearningCurveTable,
    SimResult,
    TraceEvent,
    read_trace,
    replay_trace,
    simulate,
    speedup,
    write_trace,
)

__version__ = "0.1.0"

__all__ = [
    "CRITERION_KINDS",
    "CellResult",
    "ConfigId",
    "Curve",
    "CurveModel",
    "DEFAULT_CRITERION",
    "DataError",
    "FAMILIES",
    "FORMAT_MAGIC",
    "ExperimentReport",
    "ExperimentSpec",
    "FormatError",
    "GenerationError",
    "GeneratorSpec",
    "InternalError",
    "Job",
    "LearningCurveTable",
    "MODES",
    "MethodRow",
    "MethodSpec",
    "PashaState",
    "RandomSearcher",
    "RankedList",
    "RankingCriterion",
    "ResourceSpec",
    "RungEntry",
    "RungLadder",
    "Scheduler",
    "SchedulerConfig",
    "SimResult",
    "SoftRank",
    "TraceEvent",
    "TunesimError",
    "UsageError",
    "aggregate",
    "arrr",
    "crossing_report",
    "emit_report",
    "epsilon_mean_distance",
    "epsilon_median_distance",
    "epsilon_sigma",
    "generate",
    "grow",
    "initial_pasha_state",
    "is_stable",
    "is_stable_direct",
    "is_stable_rbo",
    "is_stable_soft",
    "load",
    "max_rung_index",
    "project",
    "rbo",
    "read_cells",
    "read_trace",
    "reference_method",
    "replay_trace",
    "resolve_tables",
    "rrr",
    "run_baseline",
    "run_cells",
    "run_experiment",
    "rung_levels",
    "rung_resource",
    "save",
    "simulate",
    "soft_rank",
    "speedup",
    "write_cells",
    "write_trace",
]
