"""Backend selection for the numeric kernels.

The numba path is used when numba imports cleanly, unless the environment
variable ``PLANPRED_DISABLE_NUMBA`` is set to a truthy value, in which case
the pure-numpy path is used. Both backends share one contract:

``remaining_costs(cur, pos, plan_parts, collected)``
    int64 arrays in, float64 route lengths out (+inf where inconsistent).
``route_costs(start, pos, plan_parts)``
    full route lengths from ``start``.
``segment_softmax(values, offsets, beta)``
    blockwise Boltzmann probabilities of ``beta * values``.
"""

import os

from . import _kernels_numpy as numpy_backend

_FLAG = os.environ.get("PLANPRED_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG not in ("", "0", "false", "no")

numba_backend = None
if not DISABLED:
    try:
        from . import _kernels_numba as numba_backend
    except ImportError:  # numba missing or broken
        numba_backend = None

active = numba_backend if numba_backend is not None else numpy_backend
BACKEND = "numba" if active is numba_backend else "numpy"

remaining_costs = active.remaining_costs
route_costs = active.route_costs
segment_softmax = active.segment_softmax
