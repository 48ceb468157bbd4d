import numpy as np
import pytest

from planpred.gridworld import Grid, PartInstance, PartType, Path, Position
from planpred.inference import Task
from planpred.plans import GoalProduct, Observation

SQ, TR, SR, CI = PartType


def part(pid, kind, color, x, y):
    return PartInstance(pid, kind, color, Position(x, y))


def make_task(width, height, start, parts, goals, path=None, task_id="task"):
    grid = Grid(width, height, tuple(parts), Position(*start))
    cells = path if path is not None else [start]
    obs = Observation.from_path(grid, Path(tuple(cells)))
    cands = tuple(GoalProduct(gid, tuple(req)) for gid, req in goals)
    return Task(grid, obs, cands, task_id)


@pytest.fixture
def two_goal_task():
    """Small hand-checkable task: the agent stepped onto red square p0."""
    parts = [
        part("p0", SQ, "red", 2, 0),
        part("p1", SQ, "red", 0, 3),
        part("p2", TR, "blue", 2, 3),
        part("p3", TR, "blue", 4, 4),
        part("p4", TR, "green", 4, 0),
    ]
    goals = [("A", [(SQ, "red"), (TR, "blue")]), ("B", [(SQ, "red"), (TR, "green")])]
    return make_task(5, 5, (0, 0), parts, goals, [(0, 0), (1, 0), (2, 0)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
