"""Plan sets and plan costs.

A plan for a goal product is a concrete choice of one part instance per
required (type, color) slot. Parts are always collected in type-priority
order, so a plan has exactly one route and its cost is a fixed sum of
Manhattan legs from the agent's start. The remaining cost of a plan after
an observation is the route from the agent's current cell through the
slots it has not collected yet.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import PlanPredError, UnknownPartError
from .gridworld import (
    Grid,
    PartInstance,
    PartType,
    Path,
    Position,
    collected_along,
    route_cost,
)

INFEASIBLE = math.inf
MAX_SLOTS = len(PartType)


@dataclass(frozen=True)
class GoalProduct:
    id: str
    required: tuple[tuple[PartType, str], ...]

    def __post_init__(self):
        req = tuple(sorted(((PartType(t), str(c)) for t, c in self.required),
                           key=lambda tc: tc[0].priority))
        object.__setattr__(self, "required", req)
        types = [t for t, _ in req]
        if len(set(types)) != len(types):
            raise ValueError(f"goal {self.id!r}: part types must be distinct")
        if not 2 <= len(req) <= MAX_SLOTS:
            raise ValueError(f"goal {self.id!r}: needs 2-4 part types, got {len(req)}")

    @property
    def types(self) -> tuple[PartType, ...]:
        return tuple(t for t, _ in self.required)

    @property
    def k(self) -> int:
        return len(self.required)


@dataclass(frozen=True)
class Plan:
    goal_id: str
    # (slot type, part id) in priority order
    assignment: tuple[tuple[PartType, str], ...]

    @property
    def part_ids(self) -> tuple[str, ...]:
        return tuple(pid for _, pid in self.assignment)

    def as_dict(self) -> dict[PartType, str]:
        return dict(self.assignment)


@dataclass(frozen=True)
class PlanSet:
    goal_id: str
    plans: tuple[Plan, ...]

    def __len__(self):
        return len(self.plans)

    def __iter__(self):
        return iter(self.plans)


@dataclass(frozen=True)
class Observation:
    path: Path
    collected: tuple[PartInstance, ...]

    @classmethod
    def from_path(cls, grid: Grid, path: Path) -> "Observation":
        return cls(path, tuple(collected_along(grid, path)))

    @classmethod
    def empty(cls, grid: Grid) -> "Observation":
        return cls(Path((grid.agent_start,)), ())

    @property
    def position(self) -> Position:
        return self.path.end


@dataclass(frozen=True)
class ScoredPlan:
    plan: Plan
    cost: int
    remaining_cost: float  # int steps, or INFEASIBLE

    @property
    def feasible(self) -> bool:
        return self.remaining_cost != INFEASIBLE


class Consistency(NamedTuple):
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


def slot_candidates(grid: Grid, goal: GoalProduct) -> list[list[PartInstance]]:
    """Matching instances per required slot, each list sorted by id."""
    slots = []
    for t, color in goal.required:
        match = [p for p in grid.parts if p.part_type is t and p.color == color]
        match.sort(key=lambda p: p.id)
        slots.append(match)
    return slots


def enumerate_plans(grid: Grid, goal: GoalProduct) -> PlanSet:
    slots = slot_candidates(grid, goal)
    plans = tuple(
        Plan(goal.id, tuple((p.part_type, p.id) for p in combo))
        for combo in itertools.product(*slots)
    )
    return PlanSet(goal.id, plans)


def _waypoints(grid: Grid, plan: Plan) -> list[Position]:
    ordered = sorted(plan.assignment, key=lambda tp: tp[0].priority)
    return [grid.part(pid).pos for _, pid in ordered]


def plan_cost(grid: Grid, plan: Plan) -> int:
    return route_cost(grid.agent_start, _waypoints(grid, plan))


def check_consistency(plan: Plan, obs: Observation) -> Consistency:
    ordered = sorted(plan.assignment, key=lambda tp: tp[0].priority)
    if len(obs.collected) > len(ordered):
        return Consistency(False, "collected more parts than the plan uses")
    for part, (slot, pid) in zip(obs.collected, ordered):
        if part.id != pid:
            return Consistency(False, f"wrong instance for slot {slot.value}")
    return Consistency(True)


def remaining_cost(grid: Grid, plan: Plan, obs: Observation) -> float:
    if not check_consistency(plan, obs):
        return INFEASIBLE
    rest = _waypoints(grid, plan)[len(obs.collected):]
    return route_cost(obs.position, rest)


# -- array form ---------------------------------------------------------------


@dataclass(frozen=True)
class PlanTable:
    """All candidate plans of a task flattened into parallel arrays.

    Rows ``offsets[g]:offsets[g + 1]`` belong to ``goal_ids[g]``, in the
    same order as :func:`enumerate_plans`.
    """

    goal_ids: tuple[str, ...]
    offsets: np.ndarray
    plan_parts: np.ndarray  # (n, MAX_SLOTS) part indices, -1 padded
    cost: np.ndarray
    remaining: np.ndarray  # +inf where infeasible

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def block(self, g: int) -> slice:
        return slice(int(self.offsets[g]), int(self.offsets[g + 1]))

    def feasible_counts(self) -> np.ndarray:
        fin = np.isfinite(self.remaining).astype(np.int64)
        csum = np.concatenate(([0], np.cumsum(fin)))
        return csum[self.offsets[1:]] - csum[self.offsets[:-1]]


def _plan_index_rows(grid: Grid, goal: GoalProduct) -> np.ndarray:
    index = grid.part_index
    slots = [[index[p.id] for p in s] for s in slot_candidates(grid, goal)]
    rows = np.full((math.prod(len(s) for s in slots), MAX_SLOTS), -1, dtype=np.int64)
    if len(rows):
        rows[:, : len(slots)] = np.array(list(itertools.product(*slots)), dtype=np.int64)
    return rows


def build_plan_table(grid: Grid, goals: Sequence[GoalProduct], obs: Observation) -> PlanTable:
    ids = [g.id for g in goals]
    if len(set(ids)) != len(ids):
        raise PlanPredError("duplicate candidate ids")
    blocks = [_plan_index_rows(grid, g) for g in goals]
    counts = [len(b) for b in blocks]
    offsets = np.zeros(len(goals) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(counts)
    parts = (np.concatenate(blocks) if blocks
             else np.empty((0, MAX_SLOTS), dtype=np.int64))
    parts = np.ascontiguousarray(parts)
    pos = grid.pos_array
    start = np.asarray(grid.agent_start, dtype=np.int64)
    cur = np.asarray(obs.position, dtype=np.int64)
    index = grid.part_index
    try:
        collected = np.array([index[p.id] for p in obs.collected], dtype=np.int64)
    except KeyError as e:
        raise UnknownPartError(f"unknown part {e.args[0]!r}") from None
    cost = kernels.route_costs(start, pos, parts)
    rem = kernels.remaining_costs(cur, pos, parts, collected)
    return PlanTable(tuple(ids), offsets, parts, cost, rem)


def score_plans(grid: Grid, goals: Sequence[GoalProduct], obs: Observation) -> dict[str, list[ScoredPlan]]:
    table = build_plan_table(grid, goals, obs)
    out = {}
    for g, goal in enumerate(goals):
        sl = table.block(g)
        plans = enumerate_plans(grid, goal).plans
        out[goal.id] = [
            ScoredPlan(plan, int(c), INFEASIBLE if math.isinf(r) else int(r))
            for plan, c, r in zip(plans, table.cost[sl], table.remaining[sl])
        ]
    return out
