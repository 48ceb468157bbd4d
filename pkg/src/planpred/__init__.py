"""Goal inference in item-creating grid worlds.

Two Bayesian observer models are provided: full inverse planning and the
plan-predictability-oriented model, along with stimulus generation,
synthetic participants and the correlation analyses used to compare the
models with human judgements.
"""

from .errors import (
    DegenerateVectorError,
    GenerationError,
    IncompleteRecordError,
    InfeasibleError,
    PlanPredError,
    TaskFormatError,
    UnknownPartError,
)
from .gridworld import (
    Grid,
    PartInstance,
    PartType,
    Path,
    Position,
    collected_along,
    manhattan_distance,
    route_cost,
    validate_grid,
    validate_path,
)
from .inference import (
    GoalPosterior,
    ModelConfig,
    Task,
    both_posteriors,
    full_model_posterior,
    infer,
    ppo_model_posterior,
    softmax,
)
from .plans import (
    INFEASIBLE,
    GoalProduct,
    Observation,
    Plan,
    PlanSet,
    ScoredPlan,
    check_consistency,
    enumerate_plans,
    plan_cost,
    remaining_cost,
    score_plans,
)

__version__ = "0.1.0"
