"""Participant-data analysis: exclusion, score vectors, correlations,
per-task and complexity analyses, and per-participant beta3 fitting.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import DegenerateVectorError, IncompleteRecordError, OrderingError
from .inference import ModelConfig, Task, posterior_from_table

log = logging.getLogger(__name__)

SCORE_MIN, SCORE_MAX = 1, 7
BETA3_GRID = tuple(round(0.1 * i, 1) for i in range(11))


@dataclass(frozen=True)
class ParticipantRecord:
    participant_id: str
    task_id: str
    scores: Mapping[str, int]
    selected: str

    def __post_init__(self):
        object.__setattr__(self, "scores", dict(self.scores))
        for cid, s in self.scores.items():
            if not (isinstance(s, (int, np.integer)) and SCORE_MIN <= s <= SCORE_MAX):
                raise ValueError(f"{self.participant_id}/{self.task_id}: score {s!r} for {cid} "
                                 f"outside {SCORE_MIN}-{SCORE_MAX}")


@dataclass(frozen=True)
class ScoreVector:
    values: np.ndarray
    index: tuple[tuple[str, str], ...] = ()  # (task_id, candidate_id) per entry

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "index", tuple(tuple(i) for i in self.index))
        if self.index and len(self.index) != len(self.values):
            raise OrderingError("index and values differ in length")

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, ScoreVector):
            return NotImplemented
        return self.index == other.index and np.array_equal(self.values, other.values)

    __hash__ = None

    def block(self, task_id: str) -> np.ndarray:
        sel = [i for i, (t, _) in enumerate(self.index) if t == task_id]
        return self.values[sel]


@dataclass(frozen=True)
class CorrelationReport:
    r: float
    p_value: float
    n: int


@dataclass(frozen=True)
class BetaFitResult:
    participant_id: str
    best_beta3: float
    per_beta_r: dict[float, float]


@dataclass
class BetaFitSummary:
    results: list[BetaFitResult]
    histogram: dict[float, int]
    table: dict[str, float]  # full / ppo_same / ppo_individual average r
    per_participant: dict[str, dict[str, float]] = field(default_factory=dict)


# -- exclusion ----------------------------------------------------------------


def group_by_participant(records: Iterable[ParticipantRecord]) -> dict[str, list[ParticipantRecord]]:
    out: dict[str, list[ParticipantRecord]] = {}
    for r in records:
        out.setdefault(r.participant_id, []).append(r)
    return out


def record_violation(rec: ParticipantRecord) -> str | None:
    """Reason the record invalidates its participant, or None."""
    vals = list(rec.scores.values())
    if len(set(vals)) == 1:
        return "same score for all candidates"
    if rec.selected not in rec.scores:
        return f"selected candidate {rec.selected!r} not scored"
    # a tie at the maximum still counts as giving the selected the highest score
    if rec.scores[rec.selected] < max(vals):
        return "selected candidate does not hold the highest score"
    return None


def exclude_invalid(participants: Mapping[str, Sequence[ParticipantRecord]],
                    candidates: Mapping[str, Sequence[str]] | None = None):
    """Split participants into (valid, exclusion_log).

    A participant is dropped when any one of their task records breaks a
    rule. ``candidates`` (task_id -> candidate ids), when given, is used to
    reject incomplete records.
    """
    valid: dict[str, list[ParticipantRecord]] = {}
    excluded: list[tuple[str, str, str]] = []
    for pid, recs in participants.items():
        reasons = []
        for rec in recs:
            if candidates is not None:
                expected = candidates.get(rec.task_id)
                if expected is None:
                    raise IncompleteRecordError(f"{pid}: unknown task {rec.task_id!r}")
                missing = set(expected) - set(rec.scores)
                if missing:
                    raise IncompleteRecordError(
                        f"incomplete record: {pid}/{rec.task_id} lacks {sorted(missing)}"
                    )
            why = record_violation(rec)
            if why:
                reasons.append((pid, rec.task_id, why))
        if reasons:
            excluded.extend(reasons)
        else:
            valid[pid] = list(recs)
    return valid, excluded


# -- vectors ------------------------------------------------------------------


def score_vector(records: Sequence[ParticipantRecord], task_order: Sequence[str],
                 candidate_order: Mapping[str, Sequence[str]]) -> ScoreVector:
    by_task = {r.task_id: r for r in records}
    values, index = [], []
    for tid in task_order:
        if tid not in by_task:
            raise OrderingError(f"no record for task {tid!r}")
        rec = by_task[tid]
        for cid in candidate_order[tid]:
            if cid not in rec.scores:
                raise OrderingError(f"task {tid!r}: candidate {cid!r} not scored")
            values.append(rec.scores[cid])
            index.append((tid, cid))
    return ScoreVector(np.array(values, dtype=float), tuple(index))


def average_score_vector(vectors: Sequence[ScoreVector]) -> ScoreVector:
    if not vectors:
        raise OrderingError("no vectors to average")
    first = vectors[0].index
    for v in vectors[1:]:
        if v.index != first:
            raise OrderingError("score vectors use different orderings")
    return ScoreVector(np.mean([v.values for v in vectors], axis=0), first)


def model_vector(tasks: Sequence[Task], config: ModelConfig, model: str | None = None) -> ScoreVector:
    values, index = [], []
    for task in tasks:
        post = posterior_from_table(task.plan_table(), config, model)
        for cid in task.candidate_ids:
            values.append(post.probs[cid])
            index.append((task.task_id, cid))
    return ScoreVector(np.array(values), tuple(index))


# -- statistics ---------------------------------------------------------------


def _values(x) -> np.ndarray:
    return np.asarray(x.values if isinstance(x, ScoreVector) else x, dtype=float)


def pearson(x, y) -> CorrelationReport:
    """Sample Pearson r with a two-tailed p-value from the t transform."""
    a, b = _values(x), _values(y)
    if len(a) != len(b):
        raise OrderingError(f"length mismatch {len(a)} vs {len(b)}")
    n = len(a)
    if n < 3:
        raise DegenerateVectorError("need at least 3 points")
    da, db = a - a.mean(), b - b.mean()
    sa, sb = math.sqrt(np.dot(da, da)), math.sqrt(np.dot(db, db))
    if sa == 0 or sb == 0:
        raise DegenerateVectorError("degenerate vector (zero variance)")
    r = float(np.dot(da / sa, db / sb))
    r = min(1.0, max(-1.0, r))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1 - r * r))
        p = float(2 * stats.t.sf(abs(t), n - 2))
    return CorrelationReport(r, min(p, 1.0), n)


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Paired t statistic on ``a - b`` and its two-tailed p-value."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if len(a) != len(b):
        raise OrderingError(f"length mismatch {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ValueError("need at least 2 pairs")
    d = a - b
    mean, sd = d.mean(), d.std(ddof=1)
    if sd == 0:
        if mean == 0:
            return 0.0, 1.0
        return math.copysign(math.inf, mean), 0.0
    t = float(mean / (sd / math.sqrt(len(d))))
    return t, float(2 * stats.t.sf(abs(t), len(d) - 1))


def safe_r(x, y) -> float:
    try:
        return pearson(x, y).r
    except DegenerateVectorError:
        return math.nan


# -- per-task and complexity --------------------------------------------------


@dataclass
class TaskCorrelation:
    task_id: str
    k_minus_n: int
    r: dict[str, float]  # model -> r (nan when degenerate)


def per_task_report(tasks: Sequence[Task], valid: Mapping[str, Sequence[ParticipantRecord]],
                    configs: Mapping[str, ModelConfig]) -> list[TaskCorrelation]:
    """Correlate the mean human scores of each task with each model's posterior."""
    from .simulate import complexity_signature

    rows = []
    for task in tasks:
        cids = task.candidate_ids
        mean = np.zeros(len(cids))
        count = 0
        for recs in valid.values():
            for rec in recs:
                if rec.task_id == task.task_id:
                    mean += [rec.scores[c] for c in cids]
                    count += 1
        if count:
            mean /= count
        table = task.plan_table()
        rs = {}
        for name, cfg in configs.items():
            post = posterior_from_table(table, cfg).as_array(cids)
            rs[name] = safe_r(mean, post) if count else math.nan
            if math.isnan(rs[name]):
                log.warning("task %s: degenerate vectors for model %s", task.task_id, name)
        sig = complexity_signature(task)
        rows.append(TaskCorrelation(task.task_id, sig.k - sig.n, rs))
    return rows


def complexity_correlation(rs: Sequence[float], k_minus_n: Sequence[float]) -> CorrelationReport:
    """Pearson of per-task r against k - n; degenerate tasks are skipped."""
    pairs = [(r, kn) for r, kn in zip(rs, k_minus_n) if not math.isnan(r)]
    if len(pairs) < len(rs):
        log.warning("complexity correlation: skipped %d degenerate task(s)", len(rs) - len(pairs))
    if len(pairs) < 3:
        raise DegenerateVectorError("need at least 3 non-degenerate tasks")
    r, kn = zip(*pairs)
    return pearson(r, kn)


# -- beta3 fit ----------------------------------------------------------------


def fit_beta3(valid: Mapping[str, Sequence[ParticipantRecord]], tasks: Sequence[Task],
              base: ModelConfig, grid: Sequence[float] = BETA3_GRID) -> BetaFitSummary:
    """Per-participant best beta3 for the PPO model over ``grid``.

    Ties resolve to the smallest beta3. The summary table holds the average
    per-participant r for the full model, the PPO model at ``base.beta3``
    (same) and the PPO model at each participant's best value (individual).
    """
    order = [t.task_id for t in tasks]
    cand = {t.task_id: t.candidate_ids for t in tasks}
    tables = [t.plan_table() for t in tasks]

    def vec(cfg, model):
        return np.concatenate([
            posterior_from_table(tb, cfg, model).as_array(t.candidate_ids)
            for tb, t in zip(tables, tasks)
        ])

    ppo = {b: vec(base.replace(beta3=b), "ppo") for b in grid}
    ppo_same = vec(base, "ppo")
    full = vec(base, "full")

    results, per = [], {}
    for pid in sorted(valid):
        human = score_vector(valid[pid], order, cand).values
        per_beta = {b: safe_r(human, ppo[b]) for b in grid}
        best = max(grid, key=lambda b: (_nan_low(per_beta[b]), -b))
        results.append(BetaFitResult(pid, best, per_beta))
        per[pid] = {
            "full": safe_r(human, full),
            "ppo_same": safe_r(human, ppo_same),
            "ppo_individual": per_beta[best],
            "best_beta3": best,
        }
    hist = Counter(r.best_beta3 for r in results)
    histogram = {b: hist.get(b, 0) for b in grid}
    table = {
        key: float(np.nanmean([p[key] for p in per.values()])) if per else math.nan
        for key in ("full", "ppo_same", "ppo_individual")
    }
    return BetaFitSummary(results, histogram, table, per)


def _nan_low(x: float) -> float:
    return -math.inf if math.isnan(x) else x


def modal_beta3(summary: BetaFitSummary) -> float:
    return max(summary.histogram, key=lambda b: (summary.histogram[b], -b))
