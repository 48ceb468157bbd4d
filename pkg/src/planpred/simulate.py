"""Agent simulation, stimulus search and synthetic participants.

Every random draw goes through a :class:`numpy.random.Generator`. Stimulus
search gives attempt ``i`` its own stream seeded by ``(seed, i)``, so the
result of an attempt does not depend on the attempts before it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from .analysis import SCORE_MAX, SCORE_MIN, ParticipantRecord
from .errors import GenerationError, InfeasibleError, PlanPredError
from .gridworld import (
    PART_TYPES,
    Grid,
    PartInstance,
    Path,
    Position,
    collected_along,
    manhattan_distance,
)
from .inference import ModelConfig, Task, goal_weights, infer, softmax
from .plans import (
    GoalProduct,
    Observation,
    Plan,
    build_plan_table,
    enumerate_plans,
    plan_cost,
)

DEFAULT_COLORS = ("red", "blue", "green")
CANDIDATE_LABELS = ("A", "B", "C", "D")


class ComplexitySignature(NamedTuple):
    k: int  # types in the goal product
    n: int  # types already collected on the observed path
    c: int  # max colors among the types still to collect

    def check(self):
        if not 2 <= self.k <= 4:
            raise ValueError(f"k must be 2-4, got {self.k}")
        if not 0 <= self.n < self.k:
            raise ValueError(f"n must satisfy 0 <= n < k, got n={self.n}, k={self.k}")
        if self.c < 1:
            raise ValueError(f"c must be >= 1, got {self.c}")
        return self

    def label(self) -> str:
        return f"k{self.k}n{self.n}c{self.c}"


STANDARD_SIGNATURES = tuple(ComplexitySignature(*s) for s in (
    (2, 1, 2), (3, 1, 2), (3, 2, 2), (4, 1, 2), (4, 2, 2),
    (4, 3, 2), (2, 1, 3), (3, 2, 3), (4, 3, 3),
))


@dataclass(frozen=True)
class GeneratorSpec:
    signature: ComplexitySignature
    width: int = 10
    height: int = 10
    colors: tuple[str, ...] = DEFAULT_COLORS
    instances: tuple[int, int] = (1, 3)  # instances per (type, color), inclusive
    seed: int = 0
    max_attempts: int = 10_000
    require_disagreement: bool = True
    config: ModelConfig = field(default_factory=ModelConfig)

    def __post_init__(self):
        object.__setattr__(self, "signature", ComplexitySignature(*self.signature).check())
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        lo, hi = self.instances
        if not 1 <= lo <= hi:
            raise ValueError(f"bad instance range {self.instances}")


@dataclass(frozen=True)
class TrajectorySample:
    goal_id: str
    plan: Plan
    path: Path


@dataclass(frozen=True)
class GenerationReport:
    attempts: int
    true_goal: GoalProduct
    argmax_full: str
    argmax_ppo: str
    rejections: dict = field(default_factory=dict)


# -- agent ---------------------------------------------------------------------


def sample_plan(grid: Grid, goal: GoalProduct, beta1: float, rng: np.random.Generator) -> Plan:
    plans = enumerate_plans(grid, goal).plans
    if not plans:
        raise InfeasibleError(f"goal {goal.id!r} has no plan on this grid")
    probs = softmax([-plan_cost(grid, p) for p in plans], beta1)
    return plans[int(rng.choice(len(plans), p=probs))]


def _walk(a: Position, b: Position) -> list[Position]:
    """Cells after ``a`` up to ``b``, moving along x first."""
    cells = []
    x, y = a
    sx = 1 if b.x > x else -1
    while x != b.x:
        x += sx
        cells.append(Position(x, y))
    sy = 1 if b.y > y else -1
    while y != b.y:
        y += sy
        cells.append(Position(x, y))
    return cells


def waypoint_steps(grid: Grid, plan: Plan) -> list[int]:
    """Step index at which each waypoint is reached on the executed route."""
    out, here, total = [], grid.agent_start, 0
    for pid in plan.part_ids:
        pos = grid.part(pid).pos
        total += manhattan_distance(here, pos)
        out.append(total)
        here = pos
    return out


def execute_plan(grid: Grid, plan: Plan, prefix_steps: int | None = None) -> Path:
    """Shortest route through the plan's parts, cut after ``prefix_steps``."""
    cells = [grid.agent_start]
    for pid in plan.part_ids:
        cells.extend(_walk(cells[-1], grid.part(pid).pos))
    if prefix_steps is None:
        return Path(tuple(cells))
    if not 0 <= prefix_steps < len(cells):
        raise ValueError(f"prefix_steps {prefix_steps} outside 0..{len(cells) - 1}")
    return Path(tuple(cells[: prefix_steps + 1]))


def sample_trajectory(grid: Grid, goal: GoalProduct, beta1: float,
                      rng: np.random.Generator, prefix_steps: int | None = None) -> TrajectorySample:
    plan = sample_plan(grid, goal, beta1, rng)
    return TrajectorySample(goal.id, plan, execute_plan(grid, plan, prefix_steps))


# -- signatures ------------------------------------------------------------------


def complexity_signature(task: Task) -> ComplexitySignature:
    ks = {c.k for c in task.candidates}
    if len(ks) != 1:
        raise PlanPredError(f"heterogeneous candidates: type counts {sorted(ks)}")
    collected = task.observation.collected
    done = {p.part_type for p in collected}
    taken = {p.id for p in collected}
    todo = {t for cand in task.candidates for t in cand.types} - done
    colors = [
        len({p.color for p in task.grid.parts if p.part_type is t and p.id not in taken})
        for t in todo
    ]
    return ComplexitySignature(ks.pop(), len(done), max(colors, default=0))


# -- stimulus search ----------------------------------------------------------


def _random_layout(spec: GeneratorSpec, rng: np.random.Generator):
    k, n, c = spec.signature
    ncolors = len(spec.colors)
    lo, hi = spec.instances
    kinds = []
    for i, t in enumerate(PART_TYPES[:k]):
        if i < n:
            m = int(rng.integers(min(2, ncolors), min(3, ncolors) + 1))
        else:
            m = c
        chosen = sorted(rng.choice(ncolors, size=m, replace=False))
        for ci in chosen:
            kinds.extend([(t, spec.colors[ci])] * int(rng.integers(lo, hi + 1)))
    cells = spec.width * spec.height
    if len(kinds) + 1 > cells:
        return None
    flat = rng.choice(cells, size=len(kinds) + 1, replace=False)
    xy = [Position(int(f % spec.width), int(f // spec.width)) for f in flat]
    width = len(str(max(len(kinds) - 1, 0)))
    parts = tuple(
        PartInstance(f"p{i:0{max(width, 2)}d}", t, col, xy[i + 1])
        for i, (t, col) in enumerate(kinds)
    )
    return Grid(spec.width, spec.height, parts, xy[0])


def all_goal_products(grid: Grid, types) -> list[GoalProduct]:
    """Every color combination over ``types`` realisable on the grid."""
    palettes = [sorted({p.color for p in grid.parts if p.part_type is t}) for t in types]
    return [
        GoalProduct(f"g{i}", tuple(zip(types, combo)))
        for i, combo in enumerate(itertools.product(*palettes))
    ]


def _unique_argmax(w: np.ndarray, rel_gap: float = 1e-9):
    top = int(np.argmax(w))
    rest = np.delete(w, top)
    if rest.size and rest.max() >= w[top] * (1 - rel_gap):
        return None
    return top


def _color_distance(a: GoalProduct, b: GoalProduct) -> int:
    return sum(ca != cb for (_, ca), (_, cb) in zip(a.required, b.required))


def _pick_candidates(goals, p_full, p_ppo, i_full, i_ppo):
    """Indices of the four shown candidates: each model's favourite plus
    two goals that both models find unlikely."""
    both = np.maximum(p_full, p_ppo)
    chosen = [i_full]
    if i_ppo != i_full:
        chosen.append(i_ppo)
    else:
        order = np.argsort(-p_ppo, kind="stable")
        chosen.append(next(int(i) for i in order if i != i_full))
    rest = sorted((i for i in range(len(goals)) if i not in chosen),
                  key=lambda i: (both[i], i))
    chosen.append(rest[0])
    if len(chosen) < 4:
        pool = rest[1: 1 + max(3, len(rest) // 2)]
        # filler: among low-probability goals, the one least like those already shown
        chosen.append(max(pool, key=lambda i: (
            sum(_color_distance(goals[i], goals[j]) for j in chosen), -both[i], -i)))
    return chosen


def _attempt(spec: GeneratorSpec, rng: np.random.Generator):
    """One rejection-sampling draw; returns (task, report) or a reject reason."""
    k, n, c = spec.signature
    grid = _random_layout(spec, rng)
    if grid is None:
        return "grid too small"
    types = PART_TYPES[:k]
    goals = all_goal_products(grid, types)
    if len(goals) < 4:
        return "fewer than four goal products"
    true_goal = goals[int(rng.integers(len(goals)))]
    plan = sample_plan(grid, true_goal, spec.config.beta1, rng)
    arrive = [0] + waypoint_steps(grid, plan)
    steps = int(rng.integers(arrive[n], arrive[n + 1]))
    path = execute_plan(grid, plan, steps)
    picked = [p.id for p in collected_along(grid, path)]
    if picked != list(plan.part_ids[:n]):
        return "accidental pickup"
    obs = Observation(path, tuple(grid.part(pid) for pid in picked))

    table = build_plan_table(grid, goals, obs)
    w_full = goal_weights(table, spec.config, "full")
    w_ppo = goal_weights(table, spec.config, "ppo")
    if not (w_full.sum() > 0 and w_ppo.sum() > 0):
        return "no feasible goal"
    p_full, p_ppo = w_full / w_full.sum(), w_ppo / w_ppo.sum()
    i_full, i_ppo = _unique_argmax(p_full), _unique_argmax(p_ppo)
    if i_full is None or i_ppo is None:
        return "tied argmax"
    if spec.require_disagreement and i_full == i_ppo:
        return "models agree"

    chosen = _pick_candidates(goals, p_full, p_ppo, i_full, i_ppo)
    perm = rng.permutation(len(chosen))
    label = {chosen[int(j)]: CANDIDATE_LABELS[slot] for slot, j in enumerate(perm)}
    cands = tuple(
        GoalProduct(label[i], goals[i].required) for i in sorted(chosen, key=label.get)
    )
    task = Task(grid, obs, cands)
    if complexity_signature(task) != spec.signature:
        return "signature mismatch"
    report = GenerationReport(0, true_goal, label[i_full], label[i_ppo])
    return task, report


def generate_task(spec: GeneratorSpec, task_id: str | None = None):
    """Rejection-sample a task with ``spec.signature``.

    Returns ``(task, report)``; raises :class:`GenerationError` once
    ``spec.max_attempts`` draws have been rejected.
    """
    k, n, c = spec.signature
    if c > len(spec.colors):
        raise GenerationError(
            f"no task found: c={c} needs more than the {len(spec.colors)} colors allowed", 0)
    rejections: dict[str, int] = {}
    for attempt in range(spec.max_attempts):
        rng = np.random.default_rng([spec.seed, attempt])
        out = _attempt(spec, rng)
        if isinstance(out, str):
            rejections[out] = rejections.get(out, 0) + 1
            continue
        task, report = out
        meta = {
            "signature": list(spec.signature),
            "seed": spec.seed,
            "attempts": attempt + 1,
            "true_goal": [[t.value, col] for t, col in report.true_goal.required],
            "argmax_full": report.argmax_full,
            "argmax_ppo": report.argmax_ppo,
        }
        tid = task_id or f"task_{spec.signature.label()}_s{spec.seed}"
        task = Task(task.grid, task.observation, task.candidates, tid, meta)
        return task, GenerationReport(attempt + 1, report.true_goal, report.argmax_full,
                                      report.argmax_ppo, rejections)
    raise GenerationError(
        f"no task found for {tuple(spec.signature)} after {spec.max_attempts} attempts "
        f"({rejections})", spec.max_attempts)


def generate_standard_set(seed: int = 0, **spec_kw) -> list[tuple[Task, GenerationReport]]:
    """One disagreement task per standard complexity signature."""
    out = []
    for i, sig in enumerate(STANDARD_SIGNATURES):
        spec = GeneratorSpec(sig, seed=seed * 1000 + i, **spec_kw)
        out.append(generate_task(spec, task_id=f"t{i + 1}_{sig.label()}"))
    return out


# -- unconstrained random tasks (property suites, benchmarks) -----------------------


def random_task(rng: np.random.Generator, max_size: int = 10, max_instances: int = 3,
                max_candidates: int = 4, colors: Sequence[str] = DEFAULT_COLORS,
                tries: int = 1000, fixed_instances: int | None = None) -> Task:
    """A random valid task with at least one feasible candidate.

    The observation follows a plan of a random goal (candidate or not) and
    may stop anywhere along it; stray pickups are allowed.  With
    ``fixed_instances`` every (type, color) kind gets exactly that many
    instances, so all candidates have the same number of plans.
    """
    for _ in range(tries):
        w, h = (int(v) for v in rng.integers(3, max_size + 1, size=2))
        k = int(rng.integers(2, 5))
        types = PART_TYPES[:k]
        kinds = []
        for t in types:
            m = int(rng.integers(1, len(colors) + 1))
            for ci in sorted(rng.choice(len(colors), size=m, replace=False)):
                m_inst = fixed_instances or int(rng.integers(1, max_instances + 1))
                kinds.extend([(t, colors[ci])] * m_inst)
        if len(kinds) + 1 > w * h:
            continue
        flat = rng.choice(w * h, size=len(kinds) + 1, replace=False)
        xy = [Position(int(f % w), int(f // w)) for f in flat]
        parts = tuple(PartInstance(f"p{i:02d}", t, col, xy[i + 1])
                      for i, (t, col) in enumerate(kinds))
        grid = Grid(w, h, parts, xy[0])
        goals = all_goal_products(grid, types)
        ncand = min(len(goals), int(rng.integers(1, max_candidates + 1)))
        pick = sorted(rng.choice(len(goals), size=ncand, replace=False))
        cands = tuple(GoalProduct(CANDIDATE_LABELS[j] if j < 4 else f"c{j}", goals[i].required)
                      for j, i in enumerate(pick))
        walker = goals[int(rng.integers(len(goals)))]
        plan = sample_plan(grid, walker, float(rng.uniform(0, 1)), rng)
        full = execute_plan(grid, plan)
        path = full.prefix(int(rng.integers(0, len(full))))
        task = Task(grid, Observation.from_path(grid, path), cands)
        if np.isfinite(task.plan_table().remaining).any():
            return task
    raise GenerationError("random_task: no feasible task drawn", tries)


# -- synthetic participants ---------------------------------------------------------


def participant_scores(post: np.ndarray, noise_sd: float, rng: np.random.Generator) -> np.ndarray:
    """Map a posterior onto the 1-7 scale (affine on [0, max]) plus noise."""
    top = post.max()
    mean = SCORE_MIN + (SCORE_MAX - SCORE_MIN) * (post / top if top > 0 else post)
    if noise_sd > 0:
        lo, hi = SCORE_MIN - 0.5, SCORE_MAX + 0.5
        a, b = (lo - mean) / noise_sd, (hi - mean) / noise_sd
        mean = stats.truncnorm.rvs(a, b, loc=mean, scale=noise_sd, random_state=rng)
    return np.clip(np.rint(mean), SCORE_MIN, SCORE_MAX).astype(int)


def synth_participants(tasks: Sequence[Task], config: ModelConfig, noise_sd: float,
                       count: int, seed: int = 0) -> list[ParticipantRecord]:
    if count < 1:
        raise ValueError("count must be >= 1")
    if noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    posts = [infer(t, config).as_array(t.candidate_ids) for t in tasks]
    width = max(2, len(str(count)))
    records = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        pid = f"s{i + 1:0{width}d}"
        for task, post in zip(tasks, posts):
            scores = participant_scores(post, noise_sd, rng)
            cids = task.candidate_ids
            selected = cids[int(np.argmax(scores))]
            records.append(ParticipantRecord(
                pid, task.task_id, {c: int(s) for c, s in zip(cids, scores)}, selected))
    return records
