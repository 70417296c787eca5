"""Reachability-game solvers with action deception.

Turn-based two-player zero-sum reachability games where the adversary
misjudges the protagonist's action set: classical almost-sure winning
regions, belief-augmented hypergames under a pluggable inference mechanism,
deceptive almost-sure winning synthesis with an independent qualitative
oracle, and a seeded Monte-Carlo play engine.
"""

from .asw import WinRegions, asw, asw_strategy
from .dasw import (
    DaswResult,
    PermissiveTable,
    StrategyMap,
    dasw,
    extract_strategy,
    mdp_oracle,
    permissive,
    safe,
    support_actions,
    verify_result,
)
from .errors import (
    DecreachError,
    GameFormatError,
    GameValidationError,
    OracleMismatchError,
    SimulationConfigError,
)
from .game import (
    Action,
    GameGraph,
    P1,
    P2,
    Run,
    Violation,
    load,
    loads,
    dumps,
    save,
    validate,
)
from .hypergame import Hypergame, PerceptionTable, build, project_run
from .inference import (
    CLOSURE,
    UNION,
    InferenceMechanism,
    infer_history,
    infer_step,
    load_inference,
    save_inference,
)
from .gridworld import GridConfig, ObjectiveDfa, generate, layout_report
from .simulate import (
    DEAD_END,
    REACHED_F,
    STEP_CAP,
    BatchStats,
    Episode,
    P2Policy,
    RANDOM_WEIGHTS,
    UNIFORM,
    run_batch,
    run_episode,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "BatchStats",
    "CLOSURE",
    "DaswResult",
    "DecreachError",
    "DEAD_END",
    "Episode",
    "GameFormatError",
    "GameGraph",
    "GameValidationError",
    "GridConfig",
    "Hypergame",
    "InferenceMechanism",
    "ObjectiveDfa",
    "OracleMismatchError",
    "P1",
    "P2",
    "P2Policy",
    "PerceptionTable",
    "PermissiveTable",
    "RANDOM_WEIGHTS",
    "REACHED_F",
    "Run",
    "STEP_CAP",
    "SimulationConfigError",
    "StrategyMap",
    "UNIFORM",
    "Violation",
    "WinRegions",
    "asw",
    "asw_strategy",
    "build",
    "dasw",
    "dumps",
    "extract_strategy",
    "generate",
    "infer_history",
    "infer_step",
    "layout_report",
    "load",
    "load_inference",
    "loads",
    "mdp_oracle",
    "permissive",
    "project_run",
    "run_batch",
    "run_episode",
    "safe",
    "save",
    "save_inference",
    "support_actions",
    "validate",
    "verify_result",
]
