"""Placement and trajectory optimization for aerial access points.

Ground terminals draw transmission power according to their distance to the
nearest access point; this package computes cost-optimal static placements,
the two extremal dynamic plans (no movement / unlimited movement) and
movement-penalized trajectories, together with the matching large-n
closed-form predictors and a config-driven experiment CLI.
"""

__version__ = "0.1.0"

from .costs import (
    CostModel,
    FixedRatePower,
    InterferenceAwareRate,
    ProbabilisticLoS,
    VariableRateFixedPower,
    VoronoiPartition,
    build_partition,
    deployment_cost,
    make_cost_model,
    pairwise_sq_dists,
)
from .densities import (
    MovingGaussian2D,
    ShiftedPowerLaw1D,
    SpatioTemporalDensity,
    TabulatedGrid,
    UniformInterval,
    time_averaged_density,
    union_support,
)
from .dynamic import (
    Trajectory,
    UnlimitedMovementPlanner,
    ZeroMovementPlanner,
    analytic_trajectory_1d,
    trajectory_movement,
    unlimited_movement_plan,
    zero_movement_plan,
)
from .lagrangian import (
    TradeoffPoint,
    phi_value,
    TrajectoryOptimizer,
    discrete_lagrangian,
    lower_envelope,
    minimize_slot,
    project_to_triangle,
    slot_point_cost,
    solve_subproblem,
    subproblem_gradient,
    sweep_tradeoff,
)
from .quadrature import Quadrature, alpha_norm, build_quadrature, cdf_1d, inverse_cdf_1d
from .static import (
    StaticPlacement,
    asymptotic_power,
    kappa,
    lloyd_placement,
    multistart_lloyd,
    optimal_point_density,
    point_density_function,
    random_deployment,
)

__all__ = [
    "CostModel",
    "FixedRatePower",
    "InterferenceAwareRate",
    "MovingGaussian2D",
    "ProbabilisticLoS",
    "Quadrature",
    "ShiftedPowerLaw1D",
    "SpatioTemporalDensity",
    "StaticPlacement",
    "TabulatedGrid",
    "TradeoffPoint",
    "Trajectory",
    "TrajectoryOptimizer",
    "UniformInterval",
    "UnlimitedMovementPlanner",
    "VariableRateFixedPower",
    "VoronoiPartition",
    "ZeroMovementPlanner",
    "alpha_norm",
    "analytic_trajectory_1d",
    "asymptotic_power",
    "build_partition",
    "build_quadrature",
    "cdf_1d",
    "deployment_cost",
    "discrete_lagrangian",
    "inverse_cdf_1d",
    "kappa",
    "lloyd_placement",
    "lower_envelope",
    "make_cost_model",
    "minimize_slot",
    "multistart_lloyd",
    "optimal_point_density",
    "pairwise_sq_dists",
    "phi_value",
    "point_density_function",
    "project_to_triangle",
    "random_deployment",
    "slot_point_cost",
    "solve_subproblem",
    "subproblem_gradient",
    "sweep_tradeoff",
    "time_averaged_density",
    "trajectory_movement",
    "union_support",
    "unlimited_movement_plan",
    "zero_movement_plan",
]
