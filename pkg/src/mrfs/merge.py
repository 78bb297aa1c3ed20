"""Merge a Map schedule and a Reduce schedule into one feasible schedule.

Every task keeps the processor it got in its phase schedule.  Each job gets a
width: the later of its two phase completion times (their sum when the Map
and Reduce pools share processors).  Map tasks run in order of width; a
Reduce task is released at its job's width and processors always start the
released task of smallest width.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .lp import as_fraction
from .model import (MAP, REDUCE, Instance, MergedSchedule, PhaseSchedule, Placement, TaskRef,
                    Time, instance_digest)
from .rounding import per_task_factor, run_task_scheduling


def compute_widths(map_sched: PhaseSchedule, red_sched: PhaseSchedule,
                   disjoint: bool = True) -> dict[int, Time]:
    jobs = set(map_sched.job_completion) | set(red_sched.job_completion)
    widths = {}
    for j in sorted(jobs):
        cm = map_sched.job_completion.get(j, 0)
        cr = red_sched.job_completion.get(j, 0)
        widths[j] = max(cm, cr) if disjoint else cm + cr
    return widths


def merge_schedules(inst: Instance, map_sched: PhaseSchedule, red_sched: PhaseSchedule,
                    widths: Mapping[int, Time]) -> MergedSchedule:
    """List-schedule both phases on their assigned processors.

    Whenever a processor is free it starts, among its unscheduled tasks that
    are available, the one with the smallest ``(width, phase, job, index)``.
    Map tasks are always available.  A Reduce task becomes available at its
    job's width, and never before all Map tasks of its job have completed;
    with disjoint pools the second condition is implied by the first.
    """
    proc_of = {**map_sched.processor_of(), **red_sched.processor_of()}
    pending: dict[str, list[TaskRef]] = {}
    for ref, proc in proc_of.items():
        pending.setdefault(proc, []).append(ref)

    def key(ref: TaskRef):
        return (widths[ref.job], 0 if ref.phase == MAP else 1, ref.job, ref.index)

    for refs in pending.values():
        refs.sort(key=key)
    maps_left = {job.id: len(job.map_tasks) for job in inst.jobs}
    map_done: dict[int, Time] = {job.id: 0 for job in inst.jobs}
    free = {proc: 0 for proc in pending}
    placements: list[Placement] = []
    events: list = [0]  # future decision instants
    events += sorted({widths[j] for j in widths})
    heapq.heapify(events)
    remaining = sum(len(v) for v in pending.values())
    while remaining:
        t = heapq.heappop(events)
        while events and events[0] == t:
            heapq.heappop(events)
        for proc in sorted(pending):
            if free[proc] > t or not pending[proc]:
                continue
            for pos, ref in enumerate(pending[proc]):
                if ref.phase == MAP:
                    break
                if widths[ref.job] <= t and maps_left[ref.job] == 0 and map_done[ref.job] <= t:
                    break
            else:
                continue
            pending[proc].pop(pos)
            p = inst.task(ref).proc_times[proc]
            placements.append(Placement(ref, proc, t, t + p))
            free[proc] = t + p
            heapq.heappush(events, t + p)
            remaining -= 1
            if ref.phase == MAP:
                maps_left[ref.job] -= 1
                map_done[ref.job] = max(map_done[ref.job], t + p)
        if remaining and not events:
            raise RuntimeError("merge stalled with unscheduled tasks")
    return MergedSchedule.from_placements(inst, placements)


@dataclass
class RatioReport:
    """Objective of an algorithm run next to the LP lower bounds it is certified against."""

    algorithm: str
    objective: Fraction
    lp_map: float
    lp_reduce: float
    lower_bound: float
    certified_bound: float
    instance_digest: str
    seed: int | None = None
    oracle_optimum: Fraction | None = None
    extra_bounds: dict[str, float] = field(default_factory=dict)

    @property
    def ratio_vs_lp(self) -> float:
        return float(self.objective) / self.lower_bound if self.lower_bound > 0 else float("inf")

    @property
    def ratio_vs_opt(self) -> float | None:
        if self.oracle_optimum is None:
            return None
        return float(self.objective / self.oracle_optimum)

    @property
    def within_bound(self) -> bool:
        obj = float(self.objective)
        tol = 1e-9 * max(1.0, obj)
        return obj <= self.certified_bound + tol and all(
            obj <= b + tol for b in self.extra_bounds.values())

    def to_dict(self) -> dict:
        d = {
            "algorithm": self.algorithm,
            "objective": _num(self.objective),
            "lp_map": self.lp_map,
            "lp_reduce": self.lp_reduce,
            "lower_bound": self.lower_bound,
            "certified_bound": self.certified_bound,
            "ratio_vs_lp": self.ratio_vs_lp,
            "instance_digest": self.instance_digest,
            "seed": self.seed,
            "within_bound": self.within_bound,
        }
        for name, b in sorted(self.extra_bounds.items()):
            d[f"bound_{name}"] = b
        if self.oracle_optimum is not None:
            d["oracle_optimum"] = _num(self.oracle_optimum)
            d["ratio_vs_opt"] = self.ratio_vs_opt
        return d


def _num(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class Solution:
    schedule: MergedSchedule
    report: RatioReport
    map_schedule: PhaseSchedule
    reduce_schedule: PhaseSchedule
    widths: dict[int, Time]


def two_phase_bound(lp_map: float, lp_reduce: float, a=Fraction(3, 2), delta=Fraction(1, 2)):
    """Certified objective bound ``2 * rho * (LP_map + LP_reduce)`` and the max-form
    ``4 * rho * max(...)``, where ``rho`` is the single-phase guarantee."""
    rho = float(per_task_factor(a, delta))
    return 2 * rho * (lp_map + lp_reduce), 4 * rho * max(lp_map, lp_reduce)


def solve_mr(inst: Instance, a=Fraction(3, 2), delta=Fraction(1, 2), *,
             map_result=None) -> Solution:
    """Schedule both phases by LP rounding and merge them.

    ``map_result`` lets callers reuse an already computed Map phase.
    """
    a, delta = as_fraction(a), as_fraction(delta)
    mres = map_result or run_task_scheduling(inst, MAP, a, delta)
    rres = run_task_scheduling(inst, REDUCE, a, delta)
    widths = compute_widths(mres.schedule, rres.schedule, inst.pools_disjoint)
    merged = merge_schedules(inst, mres.schedule, rres.schedule, widths)
    sum_bound, max_bound = two_phase_bound(mres.lp_objective, rres.lp_objective, a, delta)
    report = RatioReport(
        "mr", merged.objective, mres.lp_objective, rres.lp_objective,
        lower_bound=max(mres.lp_objective, rres.lp_objective),
        certified_bound=sum_bound, instance_digest=instance_digest(inst),
        extra_bounds={"max_form": max_bound})
    return Solution(merged, report, mres.schedule, rres.schedule, widths)
