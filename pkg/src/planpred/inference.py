"""Goal posteriors under the full inverse planning model and the
plan-predictability-oriented (PPO) model.

Both models score a goal ``g`` as ``sum_p L(p) * P(p | g)`` over its plans
and normalise over the candidate set (uniform goal prior). They differ in
``L``:

* full: ``P(a | p)``, a Boltzmann distribution of ``-beta2 * remaining_cost``
  over the plans of the same goal;
* PPO: ``P(p | a)``, a Boltzmann distribution of ``-beta3 * remaining_cost``
  over the plans of *all* candidates (``conventional``) or of the same goal
  (``paper_literal``).

``P(p | g)`` is a Boltzmann distribution of ``-beta1 * cost`` over the
goal's plans in ``conventional`` mode. In ``paper_literal`` mode it is
normalised over candidate goals that contain the same plan, which reduces
to ``1 / multiplicity`` because a shared plan has the same cost under
every goal.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import InfeasibleError, PlanPredError
from .gridworld import Grid, validate_path
from .plans import GoalProduct, Observation, PlanTable, ScoredPlan, build_plan_table

MODELS = ("full", "ppo")
NORMALIZATIONS = ("conventional", "paper_literal")
DEFAULT_BETAS = (0.3, 0.3, 0.5)
TINY = 1e-300


@dataclass(frozen=True)
class ModelConfig:
    beta1: float = DEFAULT_BETAS[0]
    beta2: float = DEFAULT_BETAS[1]
    beta3: float = DEFAULT_BETAS[2]
    model: str = "full"
    normalization: str = "conventional"

    def __post_init__(self):
        for name in ("beta1", "beta2", "beta3"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(
                f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}"
            )

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class Task:
    grid: Grid
    observation: Observation
    candidates: tuple[GoalProduct, ...]
    task_id: str = "task"
    metadata: Mapping = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise PlanPredError("a task needs at least one candidate")

    @property
    def candidate_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.candidates)

    def plan_table(self) -> PlanTable:
        return build_plan_table(self.grid, self.candidates, self.observation)

    def problems(self) -> list[str]:
        from .gridworld import validate_grid

        return validate_grid(self.grid) + validate_path(self.grid, self.observation.path)


@dataclass(frozen=True)
class GoalPosterior:
    probs: dict[str, float]
    config: ModelConfig | None = None

    def __getitem__(self, goal_id):
        return self.probs[goal_id]

    def argmax(self) -> str:
        return max(self.probs, key=self.probs.__getitem__)

    def as_array(self, order: Sequence[str] | None = None) -> np.ndarray:
        order = list(self.probs) if order is None else order
        return np.array([self.probs[g] for g in order])


@dataclass(frozen=True)
class PlanPredictability:
    probs: dict[tuple[str, int], float]


def softmax(values, beta: float) -> np.ndarray:
    """Boltzmann probabilities ``exp(beta * v) / sum exp(beta * v)``.

    Entries equal to -inf are infeasible and receive probability 0.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("softmax of an empty list")
    finite = np.isfinite(v)
    if not finite.any():
        raise InfeasibleError("no feasible support")
    scaled = beta * v[finite]
    e = np.exp(scaled - scaled.max())
    out = np.zeros_like(v)
    out[finite] = e / e.sum()
    out[out < TINY] = 0.0
    return out


def _neg_costs(xs) -> np.ndarray:
    return -np.array([float(x) for x in xs])


def plan_prior(scored: Sequence[ScoredPlan], beta1: float,
               normalization: str = "conventional",
               multiplicity: Sequence[int] | None = None) -> np.ndarray:
    """P(p | g) for one goal's plans.

    ``multiplicity`` (paper_literal only) counts, per plan, the candidate
    goals whose plan sets contain the same part assignment; default 1.
    """
    if not scored:
        raise ValueError("empty plan list")
    if normalization == "paper_literal":
        m = np.ones(len(scored)) if multiplicity is None else np.asarray(multiplicity, float)
        return 1.0 / m
    return softmax(_neg_costs(s.cost for s in scored), beta1)


def full_likelihood(scored: Sequence[ScoredPlan], beta2: float) -> np.ndarray:
    """P(a | p) over one goal's plans; all zeros when none is feasible."""
    if not scored:
        raise ValueError("empty plan list")
    q = _neg_costs(s.remaining_cost for s in scored)
    if not np.isfinite(q).any():
        return np.zeros(len(q))
    return softmax(q, beta2)


def plan_predictability(scored: Mapping[str, Sequence[ScoredPlan]], beta3: float,
                        normalization: str = "conventional") -> PlanPredictability:
    keys = [(gid, i) for gid, plans in scored.items() for i in range(len(plans))]
    q = _neg_costs(s.remaining_cost for plans in scored.values() for s in plans)
    if not np.isfinite(q).any():
        raise InfeasibleError("observation inconsistent with all plans")
    if normalization == "paper_literal":
        probs = np.zeros(len(q))
        start = 0
        for plans in scored.values():
            block = q[start:start + len(plans)]
            if np.isfinite(block).any():
                probs[start:start + len(plans)] = softmax(block, beta3)
            start += len(plans)
    else:
        probs = softmax(q, beta3)
    return PlanPredictability(dict(zip(keys, probs.tolist())))


# -- array path used by the posteriors ---------------------------------------


def plan_multiplicity(table: PlanTable) -> np.ndarray:
    if len(table.plan_parts) == 0:
        return np.ones(0)
    _, inverse, counts = np.unique(table.plan_parts, axis=0,
                                   return_inverse=True, return_counts=True)
    return counts[inverse.reshape(-1)].astype(float)


def prior_array(table: PlanTable, beta1: float, normalization: str) -> np.ndarray:
    if normalization == "paper_literal":
        return 1.0 / plan_multiplicity(table)
    return kernels.segment_softmax(-table.cost, table.offsets, beta1)


def goal_weights(table: PlanTable, config: ModelConfig, model: str | None = None) -> np.ndarray:
    """Unnormalised ``P(a | g)`` per candidate, in ``table.goal_ids`` order."""
    model = model or config.model
    q = -table.remaining
    if model == "full":
        like = kernels.segment_softmax(q, table.offsets, config.beta2)
    elif config.normalization == "paper_literal":
        like = kernels.segment_softmax(q, table.offsets, config.beta3)
    else:
        whole = np.array([0, len(q)], dtype=np.int64)
        like = kernels.segment_softmax(q, whole, config.beta3)
    prior = prior_array(table, config.beta1, config.normalization)
    contrib = like * prior
    seg = np.repeat(np.arange(len(table.goal_ids)), table.counts)
    return np.bincount(seg, weights=contrib, minlength=len(table.goal_ids))


def posterior_from_table(table: PlanTable, config: ModelConfig,
                         model: str | None = None) -> GoalPosterior:
    w = goal_weights(table, config, model)
    total = w.sum()
    if not total > 0:
        raise InfeasibleError(
            "observation inconsistent with every candidate: "
            + ", ".join(table.goal_ids)
        )
    p = w / total
    cfg = config if model is None else config.replace(model=model)
    return GoalPosterior(dict(zip(table.goal_ids, p.tolist())), cfg)


def full_model_posterior(task: Task, config: ModelConfig = ModelConfig()) -> GoalPosterior:
    return posterior_from_table(task.plan_table(), config, "full")


def ppo_model_posterior(task: Task, config: ModelConfig = ModelConfig()) -> GoalPosterior:
    return posterior_from_table(task.plan_table(), config, "ppo")


def infer(task: Task, config: ModelConfig = ModelConfig()) -> GoalPosterior:
    if config.model == "full":
        return full_model_posterior(task, config)
    return ppo_model_posterior(task, config)


def both_posteriors(task: Task, config: ModelConfig = ModelConfig()):
    """(full, ppo) posteriors sharing one plan table."""
    table = task.plan_table()
    return (posterior_from_table(table, config, "full"),
            posterior_from_table(table, config, "ppo"))
