"""Task files (JSON), participant CSVs and report CSVs.

All writers produce byte-stable output and replace files atomically.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path as FsPath
from typing import Iterable, Sequence

from .analysis import ParticipantRecord, ScoreVector
from .errors import TaskFormatError
from .gridworld import Grid, PartInstance, PartType, Path, Position
from .inference import Task
from .plans import GoalProduct, Observation

SCHEMA_VERSION = 1
PARTICIPANT_COLUMNS = ("participant_id", "task_id", "candidate_id", "score", "selected")


def atomic_write(path, text: str) -> None:
    path = FsPath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- tasks --------------------------------------------------------------------


def task_to_dict(task: Task) -> dict:
    g = task.grid
    d = {
        "schema_version": SCHEMA_VERSION,
        "task_id": task.task_id,
        "grid": {
            "width": g.width,
            "height": g.height,
            "agent_start": list(g.agent_start),
            "parts": [
                {"id": p.id, "type": p.part_type.value, "color": p.color,
                 "x": p.pos.x, "y": p.pos.y}
                for p in g.parts
            ],
        },
        "observation": {"path": [list(c) for c in task.observation.path.cells]},
        "candidates": [
            {"id": c.id, "required": [{"type": t.value, "color": col} for t, col in c.required]}
            for c in task.candidates
        ],
    }
    if task.metadata:
        d["metadata"] = dict(task.metadata)
    return d


def dumps_task(task: Task) -> str:
    return json.dumps(task_to_dict(task), indent=2) + "\n"


def _get(d, key, where, kind=None):
    if not isinstance(d, dict) or key not in d:
        raise TaskFormatError(f"{where}: missing field {key!r}")
    v = d[key]
    if kind is int and (isinstance(v, bool) or not isinstance(v, int)):
        raise TaskFormatError(f"{where}.{key}: expected integer, got {v!r}")
    if kind is str and not isinstance(v, str):
        raise TaskFormatError(f"{where}.{key}: expected string, got {v!r}")
    if kind is list and not isinstance(v, list):
        raise TaskFormatError(f"{where}.{key}: expected list")
    return v


def _cell(v, where) -> Position:
    if (not isinstance(v, list) or len(v) != 2
            or not all(isinstance(a, int) and not isinstance(a, bool) for a in v)):
        raise TaskFormatError(f"{where}: expected [x, y] integers, got {v!r}")
    return Position(*v)


def _part_type(token, where) -> PartType:
    try:
        return PartType.parse(token)
    except ValueError as e:
        raise TaskFormatError(f"{where}: {e}") from None


def task_from_dict(d: dict) -> Task:
    version = _get(d, "schema_version", "task", int)
    if version != SCHEMA_VERSION:
        raise TaskFormatError(f"task.schema_version: unsupported version {version}")
    gd = _get(d, "grid", "task")
    parts = []
    for i, pd in enumerate(_get(gd, "parts", "grid", list)):
        where = f"grid.parts[{i}]"
        parts.append(PartInstance(
            _get(pd, "id", where, str),
            _part_type(_get(pd, "type", where, str), f"{where}.type"),
            _get(pd, "color", where, str),
            Position(_get(pd, "x", where, int), _get(pd, "y", where, int)),
        ))
    grid = Grid(_get(gd, "width", "grid", int), _get(gd, "height", "grid", int),
                tuple(parts), _cell(_get(gd, "agent_start", "grid"), "grid.agent_start"))
    od = _get(d, "observation", "task")
    cells = [_cell(c, f"observation.path[{i}]")
             for i, c in enumerate(_get(od, "path", "observation", list))]
    if not cells:
        raise TaskFormatError("observation.path: empty path")
    cands = []
    for i, cd in enumerate(_get(d, "candidates", "task", list)):
        where = f"candidates[{i}]"
        req = []
        for j, rd in enumerate(_get(cd, "required", where, list)):
            w2 = f"{where}.required[{j}]"
            req.append((_part_type(_get(rd, "type", w2, str), f"{w2}.type"),
                        _get(rd, "color", w2, str)))
        try:
            cands.append(GoalProduct(_get(cd, "id", where, str), tuple(req)))
        except ValueError as e:
            raise TaskFormatError(f"{where}: {e}") from None
    if not cands:
        raise TaskFormatError("candidates: at least one candidate required")
    ids = [c.id for c in cands]
    if len(set(ids)) != len(ids):
        raise TaskFormatError("candidates: duplicate ids")
    path = Path(tuple(cells))
    return Task(grid, Observation.from_path(grid, path), tuple(cands),
                _get(d, "task_id", "task", str) if "task_id" in d else "task",
                d.get("metadata") or {})


def loads_task(text: str, source: str = "<string>") -> Task:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise TaskFormatError(f"{source}: line {e.lineno} col {e.colno}: {e.msg}") from None
    try:
        return task_from_dict(d)
    except TaskFormatError as e:
        raise TaskFormatError(f"{source}: {e}") from None


def load_task(path) -> Task:
    try:
        text = FsPath(path).read_text(encoding="utf-8")
    except OSError as e:
        raise TaskFormatError(f"{path}: {e.strerror}") from None
    return loads_task(text, str(path))


def write_task(path, task: Task) -> None:
    atomic_write(path, dumps_task(task))


def load_task_dir(directory) -> list[Task]:
    files = sorted(FsPath(directory).glob("*.json"))
    if not files:
        raise TaskFormatError(f"{directory}: no task files (*.json)")
    return [load_task(f) for f in files]


# -- participants ---------------------------------------------------------------


def dumps_participants(records: Iterable[ParticipantRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PARTICIPANT_COLUMNS)
    for rec in records:
        for cid, score in rec.scores.items():
            w.writerow([rec.participant_id, rec.task_id, cid, score,
                        1 if cid == rec.selected else 0])
    return buf.getvalue()


def write_participants(path, records: Iterable[ParticipantRecord]) -> None:
    atomic_write(path, dumps_participants(records))


def loads_participants(text: str, source: str = "<string>") -> list[ParticipantRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or set(PARTICIPANT_COLUMNS) - set(reader.fieldnames):
        raise TaskFormatError(f"{source}: header must contain {', '.join(PARTICIPANT_COLUMNS)}")
    grouped: dict[tuple[str, str], dict] = {}
    for line, row in enumerate(reader, start=2):
        key = (row["participant_id"], row["task_id"])
        try:
            score = int(row["score"])
            sel = int(row["selected"])
        except (TypeError, ValueError):
            raise TaskFormatError(f"{source}: line {line}: score/selected must be integers") from None
        if not 1 <= score <= 7:
            raise TaskFormatError(f"{source}: line {line}: score {score} outside 1-7")
        if sel not in (0, 1):
            raise TaskFormatError(f"{source}: line {line}: selected must be 0 or 1")
        entry = grouped.setdefault(key, {"scores": {}, "selected": []})
        if row["candidate_id"] in entry["scores"]:
            raise TaskFormatError(f"{source}: line {line}: duplicate candidate {row['candidate_id']!r}")
        entry["scores"][row["candidate_id"]] = score
        if sel:
            entry["selected"].append(row["candidate_id"])
    out = []
    for (pid, tid), entry in grouped.items():
        if len(entry["selected"]) != 1:
            raise TaskFormatError(
                f"{source}: {pid}/{tid}: expected exactly one selected row, "
                f"got {len(entry['selected'])}")
        out.append(ParticipantRecord(pid, tid, entry["scores"], entry["selected"][0]))
    return out


def load_participants(path) -> list[ParticipantRecord]:
    try:
        text = FsPath(path).read_text(encoding="utf-8")
    except OSError as e:
        raise TaskFormatError(f"{path}: {e.strerror}") from None
    return loads_participants(text, str(path))


# -- report tables ---------------------------------------------------------------


def fmt_float(x: float) -> str:
    """Full-precision, round-trippable float text."""
    return repr(float(x))


def dumps_table(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def read_table(path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def dumps_vectors(vectors: dict[str, ScoreVector]) -> str:
    names = list(vectors)
    index = vectors[names[0]].index
    rows = [
        [tid, cid] + [float(vectors[n].values[i]) for n in names]
        for i, (tid, cid) in enumerate(index)
    ]
    return dumps_table(["task_id", "candidate_id"] + names, rows)


def loads_vectors(text: str) -> dict[str, ScoreVector]:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        return {}
    names = [c for c in rows[0] if c not in ("task_id", "candidate_id")]
    index = tuple((r["task_id"], r["candidate_id"]) for r in rows)
    return {n: ScoreVector([float(r[n]) for r in rows], index) for n in names}
