"""Grid environment for the item-creating scenario.

Movement is 4-connected with unit cost and no obstacles, so the shortest
route between two cells is their Manhattan distance. Parts are picked up
automatically when the agent enters their cell.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np


class Position(NamedTuple):
    x: int
    y: int


class PartType(enum.Enum):
    """Part kinds, declared in collection-priority order."""

    SQUARE = "square"
    TRIANGLE = "triangle"
    SMALL_RECTANGLE = "small_rectangle"
    CIRCLE = "circle"

    @property
    def priority(self) -> int:
        return _PRIORITY[self]

    @classmethod
    def parse(cls, token: str) -> "PartType":
        try:
            return cls(token)
        except ValueError:
            raise ValueError(f"unknown part type {token!r}") from None

    def __lt__(self, other):
        if not isinstance(other, PartType):
            return NotImplemented
        return self.priority < other.priority


_PRIORITY = {t: i for i, t in enumerate(PartType)}
PART_TYPES: tuple[PartType, ...] = tuple(PartType)


@dataclass(frozen=True)
class PartInstance:
    id: str
    part_type: PartType
    color: str
    pos: Position


@dataclass(frozen=True)
class Grid:
    width: int
    height: int
    parts: tuple[PartInstance, ...]
    agent_start: Position

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "agent_start", Position(*self.agent_start))

    def in_bounds(self, p: Position) -> bool:
        return 0 <= p.x < self.width and 0 <= p.y < self.height

    @cached_property
    def part_by_id(self) -> dict[str, PartInstance]:
        return {p.id: p for p in self.parts}

    @cached_property
    def part_at(self) -> dict[Position, PartInstance]:
        # first part wins on duplicates; validate_grid reports those
        out: dict[Position, PartInstance] = {}
        for p in self.parts:
            out.setdefault(p.pos, p)
        return out

    @cached_property
    def pos_array(self) -> np.ndarray:
        """(n_parts, 2) int64 coordinates, in ``parts`` order."""
        arr = np.array([p.pos for p in self.parts], dtype=np.int64)
        return arr.reshape(len(self.parts), 2)

    @cached_property
    def part_index(self) -> dict[str, int]:
        return {p.id: i for i, p in enumerate(self.parts)}

    def part(self, part_id: str) -> PartInstance:
        from .errors import UnknownPartError

        try:
            return self.part_by_id[part_id]
        except KeyError:
            raise UnknownPartError(f"unknown part {part_id!r}") from None

    def mirrored(self, horizontal: bool = True) -> "Grid":
        """Copy reflected left-right (``horizontal``) or top-bottom."""
        flip = _mirror_fn(self, horizontal)
        parts = tuple(
            PartInstance(p.id, p.part_type, p.color, flip(p.pos)) for p in self.parts
        )
        return Grid(self.width, self.height, parts, flip(self.agent_start))


def _mirror_fn(grid: Grid, horizontal: bool):
    if horizontal:
        return lambda p: Position(grid.width - 1 - p.x, p.y)
    return lambda p: Position(p.x, grid.height - 1 - p.y)


@dataclass(frozen=True)
class Path:
    cells: tuple[Position, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(Position(*c) for c in self.cells))

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def steps(self) -> int:
        return max(len(self.cells) - 1, 0)

    @property
    def end(self) -> Position:
        return self.cells[-1]

    def prefix(self, steps: int) -> "Path":
        return Path(self.cells[: steps + 1])

    def mirrored(self, grid: Grid, horizontal: bool = True) -> "Path":
        flip = _mirror_fn(grid, horizontal)
        return Path(tuple(flip(c) for c in self.cells))


def manhattan_distance(a: Position, b: Position) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def route_cost(start: Position, waypoints: Sequence[Position]) -> int:
    """Length of the shortest route visiting ``waypoints`` in the given order."""
    total = 0
    here = start
    for w in waypoints:
        total += manhattan_distance(here, w)
        here = w
    return total


def validate_grid(grid: Grid) -> list[str]:
    """Return structural violations; an empty list means the grid is valid."""
    problems = []
    if grid.width < 1 or grid.height < 1:
        problems.append(f"bad dimensions {grid.width}x{grid.height}")
    if not grid.in_bounds(grid.agent_start):
        problems.append(f"agent start out of bounds {_fmt(grid.agent_start)}")
    seen_ids: set[str] = set()
    seen_cells: set[Position] = set()
    reported: set[Position] = set()
    for p in grid.parts:
        if p.id in seen_ids:
            problems.append(f"duplicate part id {p.id!r}")
        seen_ids.add(p.id)
        if not grid.in_bounds(p.pos):
            problems.append(f"part {p.id!r} out of bounds {_fmt(p.pos)}")
        if p.pos in seen_cells and p.pos not in reported:
            problems.append(f"duplicate cell {_fmt(p.pos)}")
            reported.add(p.pos)
        seen_cells.add(p.pos)
        if p.pos == grid.agent_start:
            problems.append(f"part {p.id!r} on agent start {_fmt(p.pos)}")
    return problems


def validate_path(grid: Grid, path: Path) -> list[str]:
    problems = []
    if not path.cells:
        return ["empty path"]
    if path.cells[0] != grid.agent_start:
        problems.append(
            f"wrong start {_fmt(path.cells[0])}, expected {_fmt(grid.agent_start)}"
        )
    for i, c in enumerate(path.cells):
        if not grid.in_bounds(c):
            problems.append(f"step {i} out of bounds {_fmt(c)}")
    for i in range(1, len(path.cells)):
        if manhattan_distance(path.cells[i - 1], path.cells[i]) != 1:
            problems.append(
                f"non-adjacent step {i}: {_fmt(path.cells[i - 1])} -> {_fmt(path.cells[i])}"
            )
    return problems


def collected_along(grid: Grid, path: Path) -> list[PartInstance]:
    """Parts whose cells the path enters, in order of first visit."""
    out = []
    seen: set[str] = set()
    lookup = grid.part_at
    for c in path.cells[1:]:
        part = lookup.get(c)
        if part is not None and part.id not in seen:
            seen.add(part.id)
            out.append(part)
    return out


def _fmt(p: Position) -> str:
    return f"({p[0]},{p[1]})"
