"""Distributed equilibrium seeking for aggregative games with shared linear
constraints, with a centralized variational-inequality solver as ground truth.
"""

from .dynamics import (
    AgentState,
    AlgorithmParams,
    SwarmState,
    TrackingLog,
    TrajectoryLog,
    average_tracking_sim,
    derivative,
    init_state,
    simulate,
    step,
)
from .errors import (
    ConfigError,
    GameDefinitionError,
    PlayerEvaluationError,
    ShapeError,
    SimulationDiverged,
)
from .games import (
    GameSpec,
    ParamBounds,
    PlayerSpec,
    aggregate,
    build_cournot,
    build_demand_response,
    build_quadratic,
    compute_bounds,
    constraint_residual,
    local_gradient,
    monotonicity_probe,
    player_cost,
    pseudo_gradient,
    random_monotone_quadratic,
)
from .geometry import (
    AugmentedPoint,
    augmented_jacobian,
    augmented_map,
    gap_gradient,
    gap_value,
    lyapunov_value,
    project_box,
)
from .network import (
    Graph,
    NetworkSchedule,
    consensus_drive,
    is_connected,
    max_consensus,
    random_connected_graph,
)
from .oracle import (
    GneCheck,
    KktPoint,
    kkt_residual,
    solve_extragradient,
    solve_kkt_linear,
    verify_gne,
)

__version__ = "0.1.0"

__all__ = [
    "AgentState", "AlgorithmParams", "AugmentedPoint", "ConfigError",
    "GameDefinitionError", "GameSpec", "GneCheck", "Graph", "KktPoint",
    "NetworkSchedule", "ParamBounds", "PlayerEvaluationError", "PlayerSpec",
    "ShapeError", "SimulationDiverged", "SwarmState", "TrackingLog",
    "TrajectoryLog", "aggregate", "augmented_jacobian", "augmented_map",
    "average_tracking_sim", "build_cournot", "build_demand_response",
    "build_quadratic", "compute_bounds", "consensus_drive",
    "constraint_residual", "derivative", "gap_gradient", "gap_value",
    "init_state", "is_connected", "kkt_residual", "local_gradient",
    "lyapunov_value", "max_consensus", "monotonicity_probe", "player_cost",
    "project_box", "pseudo_gradient", "random_connected_graph",
    "random_monotone_quadratic", "simulate", "solve_extragradient",
    "solve_kkt_linear", "step", "verify_gne",
]
