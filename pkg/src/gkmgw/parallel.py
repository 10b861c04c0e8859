"""Deterministic worker pool for the graph sums.

The enumeration is a single producer; contributions are evaluated by
stateless workers over read-only shared data (fork semantics), and the
reduction is an exact commutative sum, so results are bit-identical for any
worker count or scheduling.
"""

from __future__ import annotations

import multiprocessing as mp
from fractions import Fraction

from .exact import RationalFunction as RF

_PAYLOAD = None
_ENGINE = None
_TREES = None


def _init_worker():
    global _ENGINE, _TREES
    from .graphsum import Engine, enumerate_unmarked_trees

    target, beta, ins, twist, ctx, _cone, _marked, _dp = _PAYLOAD
    _ENGINE = Engine(target, ctx, twist)
    _TREES = enumerate_unmarked_trees(target, beta)


def _tree_task(index: int):
    from .graphsum import _tree_total

    _ins = _PAYLOAD[2]
    cone, marked_at, use_dp = _PAYLOAD[5], _PAYLOAD[6], _PAYLOAD[7]
    return _tree_total(_ENGINE, _TREES[index], _ins, cone, marked_at, use_dp)


def parallel_graph_sum(target, beta, ins, twist, ctx, workers, cone, marked_at, use_dp) -> RF:
    global _PAYLOAD
    from .graphsum import enumerate_unmarked_trees

    trees = enumerate_unmarked_trees(target, beta)
    _PAYLOAD = (target, beta, ins, twist, ctx, cone, marked_at, use_dp)
    try:
        with mp.get_context("fork").Pool(workers, initializer=_init_worker) as pool:
            parts = pool.map(_tree_task, range(len(trees)))
    finally:
        _PAYLOAD = None
    total: object = Fraction(0)
    for p in parts:
        total = total + p
    return RF.of(total)


# -- comparison fan-out -------------------------------------------------------

_JOB = None
_SIDES = None


def _init_compare():
    global _SIDES
    from .compare import _Sides

    _SIDES = _Sides(_JOB)


def _compare_task(task):
    i, which, beta, combo = task
    return i, _SIDES.value(which, beta, combo)


def parallel_compare_tasks(job, pending) -> dict:
    """Evaluate (side, class, insertion) tasks on a pool of engine-holding
    workers; exact values make the reduction order-independent."""
    global _JOB
    _JOB = job
    try:
        with mp.get_context("fork").Pool(job.workers, initializer=_init_compare) as pool:
            out = pool.map(_compare_task, pending)
    finally:
        _JOB = None
    return dict(out)
