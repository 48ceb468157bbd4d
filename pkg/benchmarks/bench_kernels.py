"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_kernels.py [--tasks 300] [--repeat 5]

Both backends are imported directly, so the PLANPRED_DISABLE_NUMBA flag
does not matter here. Times are the best of ``--repeat`` runs over the
same batch of random tasks.
"""

import argparse
import time

import numpy as np

from planpred import _kernels_numpy
from planpred.inference import ModelConfig
from planpred.simulate import random_task

try:
    from planpred import _kernels_numba
except ImportError:
    _kernels_numba = None


def _inputs(tasks):
    out = []
    for task in tasks:
        grid, obs = task.grid, task.observation
        table = task.plan_table()
        out.append((
            np.asarray(grid.agent_start, dtype=np.int64),
            np.asarray(obs.position, dtype=np.int64),
            grid.pos_array,
            table.plan_parts,
            np.array([grid.part_index[p.id] for p in obs.collected], dtype=np.int64),
            table.offsets,
        ))
    return out


def _run(backend, batch, beta):
    for start, cur, pos, parts, coll, offs in batch:
        cost = backend.route_costs(start, pos, parts)
        rem = backend.remaining_costs(cur, pos, parts, coll)
        backend.segment_softmax(-cost, offs, beta)
        backend.segment_softmax(-rem, offs, beta)


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tasks", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-instances", type=int, default=3)
    args = ap.parse_args()

    tasks = [random_task(np.random.default_rng([args.seed, i]), max_instances=args.max_instances)
             for i in range(args.tasks)]
    batch = _inputs(tasks)
    plans = sum(len(b[3]) for b in batch)
    beta = ModelConfig().beta3
    print(f"{args.tasks} tasks, {plans} plans")

    backends = {"numpy": _kernels_numpy}
    if _kernels_numba is not None:
        _run(_kernels_numba, batch[:1], beta)  # compile outside the timing
        backends["numba"] = _kernels_numba
    else:
        print("numba not importable; numpy only")

    results = {name: _best(lambda b=b: _run(b, batch, beta), args.repeat) for name, b in backends.items()}
    for name, t in results.items():
        print(f"{name:<6} {t * 1e3:9.2f} ms  {t / args.tasks * 1e6:8.1f} us/task")
    if len(results) == 2:
        print(f"numba speedup: {results['numpy'] / results['numba']:.2f}x")


if __name__ == "__main__":
    main()
