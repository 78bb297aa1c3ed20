"""Data-shuffle variants.

With shuffles on the Reduce processors, the transfers into a Reduce task are
folded into it: its processing time grows by the total transfer time of its
shuffle block on every processor.  The folded instance is solved like a plain
MapReduce instance and each folded placement is split back into the shuffle
block (ascending Map index) followed by the Reduce task.

With separate input processors, the shuffle blocks of that schedule are moved,
with unchanged times, to the input processor paired with their Reduce
processor.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from .lp import as_fraction
from .merge import RatioReport, Solution, compute_widths, merge_schedules, two_phase_bound
from .model import (MAP, REDUCE, SHUFFLE, Instance, InstanceError, MergedSchedule, Placement,
                    Task, TaskRef, instance_digest)
from .rounding import per_task_factor, run_task_scheduling


@dataclass(frozen=True)
class ShuffleReduceTask:
    reduce: TaskRef
    proc_times: dict[str, int]  # inflated times p + block total
    block: tuple[tuple[TaskRef, int], ...]  # (shuffle task, transfer time), ascending map index

    @property
    def block_time(self) -> int:
        return sum(t for _, t in self.block)


def shuffle_reduce_tasks(inst: Instance) -> dict[TaskRef, ShuffleReduceTask]:
    out = {}
    for job in inst.jobs:
        sh = job.shuffle_matrix()
        for rt in job.reduce_tasks:
            block = tuple((TaskRef(SHUFFLE, job.id, rt.index, k), sh[k][rt.index])
                          for k in range(len(job.map_tasks)))
            total = sum(t for _, t in block)
            out[rt.ref] = ShuffleReduceTask(
                rt.ref, {i: p + total for i, p in rt.proc_times.items()}, block)
    return out


def fold_shuffle(inst: Instance) -> Instance:
    """Instance whose Reduce tasks carry their shuffle blocks.

    Shuffle matrices are kept on the jobs so schedules can be expanded again.
    """
    srt = shuffle_reduce_tasks(inst)
    jobs = []
    for job in inst.jobs:
        reds = tuple(Task(job.id, t.index, REDUCE, srt[t.ref].proc_times) for t in job.reduce_tasks)
        jobs.append(replace(job, reduce_tasks=reds))
    return replace(inst, jobs=tuple(jobs))


def expand_placements(inst: Instance, placements: Iterable[Placement]) -> list[Placement]:
    """Split folded Reduce placements of ``inst`` (the unfolded instance) into
    shuffle block + Reduce task on the same processor."""
    srt = shuffle_reduce_tasks(inst)
    out = []
    for pl in placements:
        if pl.task.phase != REDUCE:
            out.append(pl)
            continue
        t = pl.start
        for ref, tt in srt[pl.task].block:
            out.append(Placement(ref, pl.processor, t, t + tt))
            t += tt
        if pl.end - t != inst.task(pl.task).proc_times[pl.processor]:
            raise ValueError(f"{pl.task}: placement length does not match the folded time")
        out.append(Placement(pl.task, pl.processor, t, pl.end))
    return out


def expand_schedule(inst: Instance, folded: MergedSchedule) -> MergedSchedule:
    return MergedSchedule.from_placements(inst, expand_placements(inst, folded.placements))


def relocate_to_input_processors(merged: MergedSchedule, inst: Instance, *,
                                 recompact: bool = False) -> MergedSchedule:
    """Move every shuffle placement to the input processor paired with its
    Reduce task's processor, keeping all times.

    With ``recompact`` the Reduce processors are left-shifted afterwards: each
    Reduce task, in its original order, starts as soon as its processor, its
    job's Map tasks and its own shuffles allow.  No completion time grows.
    """
    if inst.input_processors is None:
        raise InstanceError("separate-shuffle variant requires input processors")
    red_proc = {pl.task: pl.processor for pl in merged.placements if pl.task.phase == REDUCE}
    out = []
    for pl in merged.placements:
        if pl.task.phase == SHUFFLE:
            rp = red_proc[TaskRef(REDUCE, pl.task.job, pl.task.index)]
            pl = Placement(pl.task, inst.input_for(rp), pl.start, pl.end)
        out.append(pl)
    if not recompact:
        return MergedSchedule(tuple(out), dict(merged.job_completion), merged.objective)
    return MergedSchedule.from_placements(inst, _left_shift_reduces(out))


def _left_shift_reduces(placements: list[Placement]) -> list[Placement]:
    map_done: dict[int, int] = {}
    ready: dict[TaskRef, int] = {}
    for pl in placements:
        if pl.task.phase == MAP:
            map_done[pl.task.job] = max(map_done.get(pl.task.job, 0), pl.end)
        elif pl.task.phase == SHUFFLE:
            r = TaskRef(REDUCE, pl.task.job, pl.task.index)
            ready[r] = max(ready.get(r, 0), pl.end)
    reds = sorted((pl for pl in placements if pl.task.phase == REDUCE),
                  key=lambda q: (q.processor, q.start, q.end))
    free: dict[str, int] = {}
    shifted = []
    for pl in reds:
        start = max(free.get(pl.processor, 0), map_done.get(pl.task.job, 0), ready.get(pl.task, 0))
        end = start + (pl.end - pl.start)
        free[pl.processor] = end
        shifted.append(Placement(pl.task, pl.processor, start, end))
    return [pl for pl in placements if pl.task.phase != REDUCE] + shifted


def solve_msr_same(inst: Instance, a=Fraction(3, 2), delta=Fraction(1, 2), *,
                   map_result=None) -> Solution:
    """Shuffles run on the processor of their Reduce task."""
    a, delta = as_fraction(a), as_fraction(delta)
    folded = fold_shuffle(inst)
    mres = map_result or run_task_scheduling(inst, MAP, a, delta)
    rres = run_task_scheduling(folded, REDUCE, a, delta)
    widths = compute_widths(mres.schedule, rres.schedule, inst.pools_disjoint)
    merged = merge_schedules(folded, mres.schedule, rres.schedule, widths)
    sched = expand_schedule(inst, merged)
    sum_bound, max_bound = two_phase_bound(mres.lp_objective, rres.lp_objective, a, delta)
    report = RatioReport(
        "msr-same", sched.objective, mres.lp_objective, rres.lp_objective,
        lower_bound=max(mres.lp_objective, rres.lp_objective),
        certified_bound=sum_bound, instance_digest=instance_digest(inst),
        extra_bounds={"max_form": max_bound})
    return Solution(sched, report, mres.schedule, rres.schedule, widths)


def separate_bounds(lp_map: float, lp_shuffle_reduce: float, a=Fraction(3, 2),
                    delta=Fraction(1, 2)) -> tuple[float, float, float]:
    """Lower bound and certified bounds for the separate-processor variant.

    Returns ``(lower, certified, tight)``: ``lower = max(LP_map, LP_sr / 2)``
    bounds the optimum because folding shuffles onto the Reduce processors at
    most doubles the optimal shuffle-reduce cost; ``certified = 6 * rho *
    lower`` (81 for the default parameters); ``tight = 2 * rho * (LP_map +
    LP_sr)`` is what the merged schedule provably achieves.
    """
    rho = float(per_task_factor(a, delta))
    lower = max(lp_map, lp_shuffle_reduce / 2)
    return lower, 6 * rho * lower, 2 * rho * (lp_map + lp_shuffle_reduce)


def solve_msr_separate(inst: Instance, a=Fraction(3, 2), delta=Fraction(1, 2), *,
                       map_result=None, recompact: bool = False) -> Solution:
    """Shuffles run on the input processor paired with their Reduce processor.

    ``recompact`` left-shifts the Reduce processors after relocation; it can
    only lower the objective, so the same bounds are reported.
    """
    if inst.input_processors is None:
        raise InstanceError("separate-shuffle variant requires input processors")
    a, delta = as_fraction(a), as_fraction(delta)
    same = solve_msr_same(inst, a, delta, map_result=map_result)
    sched = relocate_to_input_processors(same.schedule, inst, recompact=recompact)
    r = same.report
    lower, certified, tight = separate_bounds(r.lp_map, r.lp_reduce, a, delta)
    rho = float(per_task_factor(a, delta))
    report = RatioReport(
        "msr-separate", sched.objective, r.lp_map, r.lp_reduce,
        lower_bound=lower, certified_bound=certified, instance_digest=r.instance_digest,
        extra_bounds={"sum_form": tight,
                      "phase_form": 2 * (rho * r.lp_map + 2 * rho * r.lp_reduce)})
    return Solution(sched, report, same.map_schedule, same.reduce_schedule, same.widths)


def block_normal_form_violations(inst: Instance, sched: MergedSchedule) -> list[str]:
    """Each Reduce task must be immediately preceded, on one timeline, by its
    whole shuffle block run back-to-back in ascending Map index."""
    by_ref = {pl.task: pl for pl in sched.placements}
    out = []
    for job in inst.jobs:
        for rt in job.reduce_tasks:
            red = by_ref[rt.ref]
            t = red.start
            for k in reversed(range(len(job.map_tasks))):
                sh = by_ref.get(TaskRef(SHUFFLE, job.id, rt.index, k))
                if sh is None:
                    out.append(f"{rt.ref}: shuffle from map {k} missing")
                    break
                if sh.end != t:
                    out.append(f"{sh.task}: ends at {sh.end}, block gap before {t}")
                    break
                t = sh.start
    return out

