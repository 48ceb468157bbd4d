"""Command-line interface.

Exit status: 0 success, 1 domain error, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, taskio
from .errors import GenerationError, PlanPredError, TaskFormatError
from .inference import DEFAULT_BETAS, ModelConfig, posterior_from_table
from .simulate import (
    STANDARD_SIGNATURES,
    ComplexitySignature,
    GeneratorSpec,
    complexity_signature,
    generate_task,
    synth_participants,
)
from .svgchart import Series, bar_chart

log = logging.getLogger("planpred")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


def _default_seed() -> int:
    raw = os.environ.get("PLANPRED_SEED")
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"PLANPRED_SEED must be an integer, got {raw!r}")


def _g(x) -> str:
    return f"{x:.6g}"


def _add_betas(p, model_default="full"):
    p.add_argument("--model", choices=("full", "ppo"), default=model_default)
    p.add_argument("--beta1", type=float, default=DEFAULT_BETAS[0])
    p.add_argument("--beta2", type=float, default=DEFAULT_BETAS[1])
    p.add_argument("--beta3", type=float, default=DEFAULT_BETAS[2])
    p.add_argument("--normalization", choices=("conventional", "paper_literal"),
                   default="conventional")


def _config(args, **over) -> ModelConfig:
    kw = dict(beta1=args.beta1, beta2=args.beta2, beta3=args.beta3,
              model=args.model, normalization=args.normalization)
    kw.update(over)
    return ModelConfig(**kw)


# -- validate -----------------------------------------------------------------


def cmd_validate(args) -> int:
    status = EXIT_OK
    for f in args.files:
        try:
            task = taskio.load_task(f)
        except TaskFormatError as e:
            print(f"{f}: parse error: {e}", file=sys.stderr)
            status = EXIT_USAGE
            continue
        problems = task.problems()
        if problems:
            for pr in problems:
                print(f"{f}: {pr}")
            status = max(status, EXIT_DOMAIN)
        else:
            print(f"{f}: ok")
    return status


# -- infer --------------------------------------------------------------------


def cmd_infer(args) -> int:
    task = taskio.load_task(args.task)
    cfg = _config(args)
    problems = task.problems()
    if problems:
        for pr in problems:
            print(f"{args.task}: {pr}", file=sys.stderr)
        return EXIT_DOMAIN
    table = task.plan_table()
    post = posterior_from_table(table, cfg)
    counts = table.counts
    feas = table.feasible_counts()
    rows = []
    for g, cid in enumerate(table.goal_ids):
        sl = table.block(g)
        cost = table.cost[sl]
        rem = table.remaining[sl]
        rows.append((cid, post.probs[cid], int(counts[g]), int(feas[g]),
                     int(cost.min()) if len(cost) else None,
                     int(rem.min()) if len(rem) and np.isfinite(rem).any() else None))
    echo = dict(cfg.as_dict())
    if args.format == "csv":
        head = ["task_id", "candidate_id", "probability", "plans", "feasible_plans",
                "min_cost", "min_remaining", "model", "beta1", "beta2", "beta3", "normalization"]
        body = [[task.task_id, cid, p, n, f, "" if c is None else c, "" if r is None else r,
                 echo["model"], echo["beta1"], echo["beta2"], echo["beta3"], echo["normalization"]]
                for cid, p, n, f, c, r in rows]
        sys.stdout.write(taskio.dumps_table(head, body))
    else:
        print(f"task {task.task_id}: model={cfg.model} beta1={_g(cfg.beta1)} "
              f"beta2={_g(cfg.beta2)} beta3={_g(cfg.beta3)} normalization={cfg.normalization}")
        print(f"{'candidate':<10}{'probability':>12}{'plans':>7}{'feasible':>10}"
              f"{'min_cost':>10}{'min_remaining':>15}")
        for cid, p, n, f, c, r in rows:
            print(f"{cid:<10}{_g(p):>12}{n:>7}{f:>10}{'-' if c is None else c:>10}"
                  f"{'-' if r is None else r:>15}")
    return EXIT_OK


# -- gen ----------------------------------------------------------------------


def cmd_gen(args, parser) -> int:
    if args.standard_set:
        sigs = list(STANDARD_SIGNATURES)
    else:
        if args.k is None or args.n is None or args.c is None:
            parser.error("--k, --n and --c are required unless --standard-set is given")
        try:
            sigs = [ComplexitySignature(args.k, args.n, args.c).check()] * args.count
        except ValueError as e:
            parser.error(str(e))
    seed = _default_seed() if args.seed is None else args.seed
    out = Path(args.out)
    status = EXIT_OK
    for i, sig in enumerate(sigs):
        spec = GeneratorSpec(sig, width=args.width, height=args.height, seed=seed * 1000 + i,
                             max_attempts=args.max_attempts,
                             require_disagreement=args.require_disagreement)
        tid = f"t{i + 1}_{sig.label()}"
        try:
            task, report = generate_task(spec, task_id=tid)
        except GenerationError as e:
            print(f"{tid}: {e}", file=sys.stderr)
            status = EXIT_DOMAIN
            continue
        taskio.write_task(out / f"{tid}.json", task)
        print(f"{tid}: signature {tuple(sig)} attempts {report.attempts} "
              f"argmax full={report.argmax_full} ppo={report.argmax_ppo}")
    if status != EXIT_OK:
        print("generation incomplete; files already written were kept", file=sys.stderr)
    return status


# -- simulate -----------------------------------------------------------------


def cmd_simulate(args, parser) -> int:
    if args.participants < 1:
        parser.error("--participants must be >= 1")
    if args.noise < 0:
        parser.error("--noise must be >= 0")
    seed = _default_seed() if args.seed is None else args.seed
    if args.tasks:
        tasks = taskio.load_task_dir(args.tasks)
    else:
        from .simulate import generate_standard_set

        tasks = [t for t, _ in generate_standard_set(seed)]
        if args.save_tasks:
            for t in tasks:
                taskio.write_task(Path(args.save_tasks) / f"{t.task_id}.json", t)
    cfg = _config(args)
    records = synth_participants(tasks, cfg, args.noise, args.participants, seed)
    taskio.write_participants(args.out, records)
    print(f"wrote {args.participants} participants x {len(tasks)} tasks to {args.out}")
    return EXIT_OK


# -- analyze ------------------------------------------------------------------


def run_analysis(tasks, records, base: ModelConfig, out: Path) -> dict:
    """Full report bundle; returns the headline numbers."""
    tasks = sorted(tasks, key=lambda t: t.task_id)
    cand = {t.task_id: t.candidate_ids for t in tasks}
    grouped = analysis.group_by_participant(records)
    valid, excluded = analysis.exclude_invalid(grouped, cand)
    taskio.atomic_write(out / "exclusions.csv", taskio.dumps_table(
        ["participant_id", "task_id", "reason"], excluded))
    if not valid:
        raise PlanPredError(f"no valid participants ({len(grouped)} excluded)")

    order = [t.task_id for t in tasks]
    cfg_full, cfg_ppo = base.replace(model="full"), base.replace(model="ppo")
    human_vecs = {pid: analysis.score_vector(recs, order, cand) for pid, recs in sorted(valid.items())}
    human = analysis.average_score_vector(list(human_vecs.values()))
    full = analysis.model_vector(tasks, cfg_full)
    ppo = analysis.model_vector(tasks, cfg_ppo)
    taskio.atomic_write(out / "vectors.csv", taskio.dumps_vectors(
        {"human_mean": human, "full": full, "ppo": ppo}))

    overall = {"full": analysis.pearson(human, full), "ppo": analysis.pearson(human, ppo)}
    taskio.atomic_write(out / "overall.csv", taskio.dumps_table(
        ["model", "r", "p_value", "n"],
        [[m, c.r, c.p_value, c.n] for m, c in overall.items()]))

    fit = analysis.fit_beta3(valid, tasks, base)
    pids = sorted(fit.per_participant)
    r_full = [fit.per_participant[p]["full"] for p in pids]
    r_ppo = [fit.per_participant[p]["ppo_same"] for p in pids]
    pairs = [(a, b) for a, b in zip(r_ppo, r_full) if not (math.isnan(a) or math.isnan(b))]
    if len(pairs) >= 2:
        t_stat, p_t = analysis.paired_t_test([a for a, _ in pairs], [b for _, b in pairs])
    else:
        t_stat, p_t = math.nan, math.nan
    taskio.atomic_write(out / "ttest.csv", taskio.dumps_table(
        ["comparison", "t", "p_value", "n_participants"],
        [["ppo_minus_full", float(t_stat), float(p_t), len(pairs)]]))
    taskio.atomic_write(out / "per_participant.csv", taskio.dumps_table(
        ["participant_id", "r_full", "r_ppo_same", "r_ppo_individual", "best_beta3"],
        [[pid, fit.per_participant[pid]["full"], fit.per_participant[pid]["ppo_same"],
          fit.per_participant[pid]["ppo_individual"], fit.per_participant[pid]["best_beta3"]]
         for pid in pids]))
    taskio.atomic_write(out / "beta_fit.csv", taskio.dumps_table(
        ["beta3", "participants"], [[b, n] for b, n in fit.histogram.items()]))
    taskio.atomic_write(out / "individual.csv", taskio.dumps_table(
        ["model", "mean_r"], [[k, v] for k, v in fit.table.items()]))

    per_task = analysis.per_task_report(tasks, valid, {"full": cfg_full, "ppo": cfg_ppo})
    sigs = {t.task_id: complexity_signature(t) for t in tasks}
    taskio.atomic_write(out / "per_task.csv", taskio.dumps_table(
        ["task_id", "k", "n", "c", "k_minus_n", "model", "r"],
        [[row.task_id, *sigs[row.task_id], row.k_minus_n, m, row.r[m]]
         for m in ("full", "ppo") for row in per_task]))
    comp_rows = []
    complexity = {}
    for m in ("full", "ppo"):
        try:
            c = analysis.complexity_correlation([row.r[m] for row in per_task],
                                                [row.k_minus_n for row in per_task])
            complexity[m] = c
            comp_rows.append([m, c.r, c.p_value, c.n])
        except PlanPredError as e:
            log.warning("complexity correlation for %s: %s", m, e)
            comp_rows.append([m, math.nan, math.nan, 0])
    taskio.atomic_write(out / "complexity.csv", taskio.dumps_table(
        ["model", "r", "p_value", "n"], comp_rows))

    for t in tasks:
        cids = t.candidate_ids
        svg = bar_chart(
            f"{t.task_id} {tuple(sigs[t.task_id])}", cids,
            [Series("full", full.block(t.task_id)), Series("ppo", ppo.block(t.task_id)),
             Series("human mean", human.block(t.task_id), axis="right")])
        taskio.atomic_write(out / "charts" / f"{t.task_id}.svg", svg)

    return {"valid": len(valid), "excluded": len(grouped) - len(valid), "overall": overall,
            "ttest": (t_stat, p_t), "complexity": complexity, "fit": fit, "per_task": per_task}


def cmd_analyze(args) -> int:
    tasks = taskio.load_task_dir(args.tasks)
    records = taskio.load_participants(args.participants)
    base = ModelConfig(args.beta1, args.beta2, args.beta3, normalization=args.normalization)
    out = Path(args.out)
    try:
        res = run_analysis(tasks, records, base, out)
    except PlanPredError as e:
        print(f"analyze: {e}", file=sys.stderr)
        log_file = out / "exclusions.csv"
        if log_file.exists():
            for row in taskio.read_table(log_file):
                print(f"  excluded {row['participant_id']} ({row['task_id']}): {row['reason']}",
                      file=sys.stderr)
        return EXIT_DOMAIN
    ov = res["overall"]
    print(f"valid participants: {res['valid']}  excluded: {res['excluded']}")
    print(f"overall r: full {_g(ov['full'].r)} (p={_g(ov['full'].p_value)})  "
          f"ppo {_g(ov['ppo'].r)} (p={_g(ov['ppo'].p_value)})  n={ov['full'].n}")
    t, p = res["ttest"]
    print(f"paired t (ppo - full): t={_g(t)} p={_g(p)}")
    for m, c in res["complexity"].items():
        print(f"complexity r(k-n) {m}: {_g(c.r)} (p={_g(c.p_value)})")
    tab = res["fit"].table
    print(f"mean r: full {_g(tab['full'])}  ppo(same) {_g(tab['ppo_same'])}  "
          f"ppo(individual) {_g(tab['ppo_individual'])}")
    print(f"reports written to {out}")
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="planpred", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check task files")
    v.add_argument("files", nargs="+")

    i = sub.add_parser("infer", help="goal posterior for one task")
    i.add_argument("task")
    _add_betas(i)
    i.add_argument("--format", choices=("table", "csv"), default="table")

    g = sub.add_parser("gen", help="generate stimuli with a given (k, n, c)")
    g.add_argument("--k", type=int, choices=(2, 3, 4))
    g.add_argument("--n", type=int)
    g.add_argument("--c", type=int)
    g.add_argument("--standard-set", action="store_true",
                   help="one task for each of the nine standard signatures")
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int)
    g.add_argument("--require-disagreement", action="store_true")
    g.add_argument("--width", type=int, default=10)
    g.add_argument("--height", type=int, default=10)
    g.add_argument("--max-attempts", type=int, default=10_000)
    g.add_argument("--out", required=True)

    s = sub.add_parser("simulate", help="synthetic participant scores")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--tasks", help="directory of task files")
    src.add_argument("--gen", choices=("standard",), help="generate the nine-signature task set")
    s.add_argument("--save-tasks", help="with --gen, also write the generated tasks here")
    s.add_argument("--participants", type=int, default=20)
    _add_betas(s, model_default="ppo")
    s.add_argument("--noise", type=float, default=0.5)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)

    a = sub.add_parser("analyze", help="correlation report for participant data")
    a.add_argument("--tasks", required=True)
    a.add_argument("--participants", required=True)
    a.add_argument("--beta1", type=float, default=DEFAULT_BETAS[0])
    a.add_argument("--beta2", type=float, default=DEFAULT_BETAS[1])
    a.add_argument("--beta3", type=float, default=DEFAULT_BETAS[2])
    a.add_argument("--normalization", choices=("conventional", "paper_literal"),
                   default="conventional")
    a.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "infer":
            return cmd_infer(args)
        if args.command == "gen":
            return cmd_gen(args, parser)
        if args.command == "simulate":
            return cmd_simulate(args, parser)
        return cmd_analyze(args)
    except TaskFormatError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PlanPredError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as e:
        # invalid betas and similar argument-level problems
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
