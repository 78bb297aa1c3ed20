"""Exact optima for tiny instances.

The search covers every assignment of tasks to processors and every order of
the tasks on each processor, with tasks started as early as possible.  It is
organized as a dynamic program instead of a flat loop:

* for one processor, the orders of every task subset are built incrementally
  and only outcomes that are not dominated (finish time and per-job completion
  vector) are kept;
* processors are combined over disjoint task subsets, again keeping only
  non-dominated per-job completion vectors;
* the Reduce stage depends on the Map stage only through completion times, so
  it is solved once per non-dominated Map outcome.

All pruning is by dominance of a monotone objective, so the optimum is exact.
``search_space`` counts the leaves of the flat enumeration each stage stands
for (Map leaves plus Reduce leaves per Map outcome) and is checked against
``max_leaves`` before the work is done.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .model import (MAP, REDUCE, SHUFFLE, Instance, MergedSchedule, PhaseSchedule, Placement,
                    TaskRef)
from .shuffle import expand_placements, fold_shuffle

DEFAULT_MAX_LEAVES = 10**7


class OracleCapExceeded(RuntimeError):
    pass


@dataclass
class OracleResult:
    optimum: Fraction
    schedule: MergedSchedule | PhaseSchedule
    search_space: int
    elapsed: float


# ------------------------------------------------------------------ helpers


def _pareto(entries):
    """Keep entries whose key tuple is not dominated (componentwise <=) by another."""
    entries = sorted(entries, key=lambda e: (sum(e[0]), e[0]))
    kept: list = []
    for e in entries:
        k = e[0]
        if any(all(a <= b for a, b in zip(o[0], k)) for o in kept):
            continue
        kept.append(e)
    return kept


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def count_orders(n: int, m: int, per_list: Callable[[int], int] = math.factorial) -> int:
    """Number of ways to split ``n`` labelled tasks over ``m`` processors, each
    processor contributing ``per_list(size)`` arrangements."""
    @lru_cache(maxsize=None)
    def ways(n: int, m: int) -> int:
        if m == 1:
            return per_list(n)
        return sum(math.comb(n, k) * per_list(k) * ways(n - k, m - 1) for k in range(n + 1))
    return ways(n, m)


def _sequence(n_items: int, duration: Sequence[int], release: Sequence,
              slot: Sequence[int], dim: int):
    """Non-dominated outcomes of sequencing every subset of items on one processor.

    Item ``x`` takes ``duration[x]``, cannot start before ``release[x]`` and
    its completion is folded (max) into coordinate ``slot[x]`` of a vector of
    length ``dim``.  Returns ``{mask: [(vector, order), ...]}``.
    """
    zero = (0,) * dim
    states = {0: [((0,) + zero, ())]}  # key: (finish time, *vector)
    for mask in range(1 << n_items):
        cur = states.get(mask)
        if cur is None:
            continue
        cur = _pareto(cur)
        states[mask] = cur
        for x in range(n_items):
            bit = 1 << x
            if mask & bit:
                continue
            nxt = states.setdefault(mask | bit, [])
            for key, order in cur:
                end = max(key[0], release[x]) + duration[x]
                vec = list(key[1:])
                if end > vec[slot[x]]:
                    vec[slot[x]] = end
                nxt.append(((end, *vec), order + (x,)))
    return {mask: _pareto([(key[1:], order) for key, order in entries])
            for mask, entries in states.items()}


def _combine(per_proc: Sequence[dict], n_items: int, dim: int):
    """Non-dominated vectors over all ways to split the items between processors.

    Returns ``[(vector, (order per processor...)), ...]``.
    """
    full = (1 << n_items) - 1
    states = {0: [((0,) * dim, ())]}
    for q, options in enumerate(per_proc):
        last = q == len(per_proc) - 1
        nxt: dict[int, list] = {}
        for mask, entries in states.items():
            rest = full & ~mask
            subs = [rest] if last else _submasks(rest)
            for sub in subs:
                for v2, o2 in options[sub]:
                    bucket = nxt.setdefault(mask | sub, [])
                    for v1, o1 in entries:
                        bucket.append((tuple(map(max, v1, v2)), o1 + (o2,)))
        states = {mask: _pareto(e) for mask, e in nxt.items()}
    return states.get(full, [])


def _weighted(weights: Sequence[Fraction], vec) -> Fraction:
    return sum((w * c for w, c in zip(weights, vec)), Fraction(0))


def _check_cap(leaves: int, cap: int) -> None:
    if leaves > cap:
        raise OracleCapExceeded(f"search space of {leaves} leaves exceeds the cap of {cap}")


def _timed(order, duration, release):
    t, out = 0, []
    for x in order:
        start = max(t, release[x])
        t = start + duration[x]
        out.append((x, start, t))
    return out


# ------------------------------------------------------------------- stages


class _Stage:
    """Tasks of one phase with processor-dependent durations."""

    def __init__(self, inst: Instance, phase: str, pool: Sequence[str]):
        self.tasks = [t.ref for t in inst.tasks(phase)]
        self.ptime = {t.ref: t.proc_times for t in inst.tasks(phase)}
        self.pool = list(pool)
        self.job_pos = {j.id: n for n, j in enumerate(inst.jobs)}
        self.n = len(self.tasks)

    def leaves(self) -> int:
        return count_orders(self.n, len(self.pool))

    def solve(self, release, slot, dim):
        per_proc = []
        for proc in self.pool:
            dur = [self.ptime[r][proc] for r in self.tasks]
            per_proc.append(_sequence(self.n, dur, release, slot, dim))
        return _combine(per_proc, self.n, dim)

    def placements(self, orders, release) -> list[Placement]:
        out = []
        for proc, order in zip(self.pool, orders):
            dur = [self.ptime[r][proc] for r in self.tasks]
            for x, s, e in _timed(order, dur, release):
                out.append(Placement(self.tasks[x], proc, s, e))
        return out


def brute_force_phase(inst: Instance, phase: str, max_leaves: int = DEFAULT_MAX_LEAVES) -> OracleResult:
    """Optimal single-phase schedule (no precedence), minimizing the weighted
    sum of per-job phase completion times."""
    t0 = time.perf_counter()
    st = _Stage(inst, phase, inst.pool(phase))
    leaves = st.leaves()
    _check_cap(leaves, max_leaves)
    weights = [j.weight for j in inst.jobs]
    release = [0] * st.n
    slot = [st.job_pos[r.job] for r in st.tasks]
    front = st.solve(release, slot, len(weights))
    vec, orders = min(front, key=lambda e: _weighted(weights, e[0]))
    sched = PhaseSchedule.from_placements(phase, st.placements(orders, release))
    return OracleResult(_weighted(weights, vec), sched, leaves, time.perf_counter() - t0)


def brute_force_mr(inst: Instance, max_leaves: int = DEFAULT_MAX_LEAVES) -> OracleResult:
    """Optimal MapReduce schedule for disjoint pools."""
    t0 = time.perf_counter()
    if not inst.pools_disjoint:
        raise ValueError("the exact MR search supports disjoint processor pools only")
    weights = [j.weight for j in inst.jobs]
    dim = len(weights)
    ms = _Stage(inst, MAP, inst.map_processors)
    rs = _Stage(inst, REDUCE, inst.reduce_processors)
    _check_cap(ms.leaves(), max_leaves)
    map_release = [0] * ms.n
    map_front = ms.solve(map_release, [ms.job_pos[r.job] for r in ms.tasks], dim)
    leaves = ms.leaves() + len(map_front) * rs.leaves()
    _check_cap(leaves, max_leaves)

    # reduce completion of job j is at least its map completion plus its shortest reduce task
    min_red = [min(min(rs.ptime[r].values()) for r in rs.tasks if r.job == j.id) for j in inst.jobs]

    def lower(vec):
        return _weighted(weights, [c + p for c, p in zip(vec, min_red)])

    best = None
    red_slot = [rs.job_pos[r.job] for r in rs.tasks]
    for mvec, morders in sorted(map_front, key=lambda e: lower(e[0])):
        if best is not None and lower(mvec) >= best[0]:
            break
        release = [mvec[rs.job_pos[r.job]] for r in rs.tasks]
        for rvec, rorders in rs.solve(release, red_slot, dim):
            val = _weighted(weights, rvec)
            if best is None or val < best[0]:
                best = (val, morders, rorders, release)
    val, morders, rorders, release = best
    pls = ms.placements(morders, map_release) + rs.placements(rorders, release)
    sched = MergedSchedule.from_placements(inst, pls)
    return OracleResult(val, sched, leaves, time.perf_counter() - t0)


def brute_force_msr(inst: Instance, model: str = "same",
                    max_leaves: int = DEFAULT_MAX_LEAVES) -> OracleResult:
    """Optimal schedule with shuffle tasks.

    ``same``: each Reduce task runs right after its whole shuffle block on its
    Reduce processor, and the block starts once every Map task of the job is
    done.  This is the folded model the algorithm works in; it is solved as a
    MapReduce instance and the witness is expanded again.

    ``separate``: shuffles run on the input processor paired with their Reduce
    task's processor, each after its own Map task, in any order (blocks may
    interleave); a Reduce task starts after its job's Map tasks and its own
    shuffles.  Every assignment of Reduce tasks, every shuffle order on each
    input processor and every Reduce order is searched.  Zero-length shuffles
    are placed at the start of their Reduce task.
    """
    if model == "same":
        res = brute_force_mr(fold_shuffle(inst), max_leaves)
        sched = MergedSchedule.from_placements(inst, expand_placements(inst, res.schedule.placements))
        return OracleResult(res.optimum, sched, res.search_space, res.elapsed)
    if model != "separate":
        raise ValueError("model must be 'same' or 'separate'")
    return _brute_force_separate(inst, max_leaves)


def _separate_leaves(n_shuffles: Sequence[int], m: int, cap: int) -> int:
    """Leaves of the flat search: sum over Reduce assignments of the product,
    over processor pairs, of (#Reduce tasks)! * (#shuffles)!."""
    n = len(n_shuffles)
    if count_orders(n, m) > cap:
        return count_orders(n, m)  # already a lower bound above the cap
    g = [math.factorial(bin(S).count("1")) *
         math.factorial(sum(n_shuffles[x] for x in range(n) if S >> x & 1)) for S in range(1 << n)]
    full = (1 << n) - 1
    ways = {0: 1}
    for q in range(m):
        nxt: dict[int, int] = {}
        for mask, w in ways.items():
            rest = full & ~mask
            for sub in ([rest] if q == m - 1 else _submasks(rest)):
                nxt[mask | sub] = nxt.get(mask | sub, 0) + w * g[sub]
        ways = nxt
    return ways.get(full, 0)


def _brute_force_separate(inst: Instance, max_leaves: int) -> OracleResult:
    t0 = time.perf_counter()
    if inst.input_processors is None:
        raise ValueError("separate-shuffle variant requires input processors")
    if not inst.pools_disjoint:
        raise ValueError("the exact search supports disjoint processor pools only")
    weights = [j.weight for j in inst.jobs]
    dim = len(weights)
    ms = _Stage(inst, MAP, inst.map_processors)
    rs = _Stage(inst, REDUCE, inst.reduce_processors)
    n = rs.n
    _check_cap(ms.leaves(), max_leaves)

    map_pos = {r: x for x, r in enumerate(ms.tasks)}
    # nonzero shuffles: (shuffle ref, reduce position, map position, transfer time)
    shuffles = []
    for x, r in enumerate(rs.tasks):
        row = [row[r.index] for row in inst.job(r.job).shuffle_matrix()]
        shuffles += [(TaskRef(SHUFFLE, r.job, r.index, k), x, map_pos[TaskRef(MAP, r.job, k)], t)
                     for k, t in enumerate(row) if t > 0]
    counts = [sum(1 for s in shuffles if s[1] == x) for x in range(n)]
    red_leaves = _separate_leaves(counts, len(inst.reduce_processors), max_leaves)
    _check_cap(ms.leaves() + red_leaves, max_leaves)

    map_front = ms.solve([0] * ms.n, list(range(ms.n)), ms.n)
    leaves = ms.leaves() + len(map_front) * red_leaves
    _check_cap(leaves, max_leaves)

    sh_mask = [0] * n
    for s, (_, x, _, _) in enumerate(shuffles):
        sh_mask[x] |= 1 << s
    job_maps = {j.id: [map_pos[t.ref] for t in j.map_tasks] for j in inst.jobs}
    min_red = [min(min(rs.ptime[r].values()) for r in rs.tasks if r.job == j.id) for j in inst.jobs]
    red_slot = [rs.job_pos[r.job] for r in rs.tasks]

    def job_done(mvec):
        return [max(mvec[x] for x in job_maps[j.id]) for j in inst.jobs]

    def lower(mvec):
        return _weighted(weights, [c + p for c, p in zip(job_done(mvec), min_red)])

    best = None
    for mvec, morders in sorted(map_front, key=lambda e: lower(e[0])):
        if best is not None and lower(mvec) >= best[0]:
            break
        done = job_done(mvec)
        ready = [done[red_slot[x]] for x in range(n)]
        # shuffle sequences do not depend on the processor pair
        sh_front = _sequence(len(shuffles), [s[3] for s in shuffles],
                             [mvec[s[2]] for s in shuffles], [s[1] for s in shuffles], n)
        per_pair = []
        for proc in inst.reduce_processors:
            dur = [rs.ptime[r][proc] for r in rs.tasks]
            options = {}
            for sub in range(1 << n):
                items = [x for x in range(n) if sub >> x & 1]
                smask = 0
                for x in items:
                    smask |= sh_mask[x]
                found = []
                for svec, sorder in sh_front[smask]:
                    rel = [max(ready[x], svec[x]) for x in items]
                    seq = _sequence(len(items), [dur[x] for x in items], rel,
                                    [red_slot[x] for x in items], dim)
                    full = (1 << len(items)) - 1
                    for vec, order in seq[full]:
                        found.append((vec, (sorder, tuple(items[b] for b in order))))
                options[sub] = _pareto(found)
            per_pair.append(options)
        for vec, orders in _combine(per_pair, n, dim):
            val = _weighted(weights, vec)
            if best is None or val < best[0]:
                best = (val, mvec, morders, orders)

    val, mvec, morders, orders = best
    pls = ms.placements(morders, [0] * ms.n)
    for q, (rproc, (sorder, rorder)) in enumerate(zip(inst.reduce_processors, orders)):
        sproc = inst.input_processors[q]
        sh_end = {x: 0 for x in rorder}
        t = 0
        for s in sorder:
            ref, x, mp, tt = shuffles[s]
            start = max(t, mvec[mp])
            t = start + tt
            sh_end[x] = max(sh_end[x], t)
            pls.append(Placement(ref, sproc, start, t))
        done = {j.id: max(mvec[x] for x in job_maps[j.id]) for j in inst.jobs}
        t = 0
        for x in rorder:
            r = rs.tasks[x]
            start = max(t, done[r.job], sh_end[x])
            t = start + rs.ptime[r][rproc]
            pls.append(Placement(r, rproc, start, t))
            for k, row in enumerate(inst.job(r.job).shuffle_matrix()):
                if row[r.index] == 0:
                    pls.append(Placement(TaskRef(SHUFFLE, r.job, r.index, k), sproc, start, start))
    sched = MergedSchedule.from_placements(inst, pls)
    return OracleResult(val, sched, leaves, time.perf_counter() - t0)
