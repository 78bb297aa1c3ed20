from __future__ import annotations

from fractions import Fraction

import pytest

from conftest import TINY, make_instance
from mrfs.merge import compute_widths, merge_schedules, solve_mr, two_phase_bound
from mrfs.model import (MAP, REDUCE, PhaseSchedule, Placement, TaskRef, generate_instance,
                        validate_schedule)
from mrfs.oracle import brute_force_mr


def phase(ph, job_ends):
    return PhaseSchedule.from_placements(
        ph, [Placement(TaskRef(ph, j, 0), f"{ph[0]}1", 0, e) for j, e in job_ends.items()])


def test_widths_disjoint_and_shared():
    m, r = phase(MAP, {0: 5}), phase(REDUCE, {0: 3})
    assert compute_widths(m, r, disjoint=True) == {0: 5}
    assert compute_widths(m, r, disjoint=False) == {0: 8}


def test_one_job_hand_example():
    inst = make_instance([(1, [{"m1": 3}], [{"r1": 2}], None)])
    sol = solve_mr(inst)
    assert sol.widths == {0: 3}
    by = {pl.task.phase: (pl.start, pl.end) for pl in sol.schedule.placements}
    assert by == {MAP: (0, 3), REDUCE: (3, 5)}
    assert sol.schedule.objective == 5
    assert sol.report.ratio_vs_lp > 0


def test_one_job_weighted():
    inst = make_instance([(Fraction(7, 3), [{"m1": 3}], [{"r1": 2}], None)])
    assert solve_mr(inst).schedule.objective == Fraction(35, 3)


def test_reduce_waits_for_its_width():
    inst = make_instance([(1, [{"m1": 1}], [{"r1": 1}], None), (1, [{"m1": 1}], [{"r1": 1}], None)])
    m = PhaseSchedule.from_placements(MAP, [Placement(TaskRef(MAP, 0, 0), "m1", 0, 1),
                                            Placement(TaskRef(MAP, 1, 0), "m1", 1, 2)])
    r = PhaseSchedule.from_placements(REDUCE, [Placement(TaskRef(REDUCE, 0, 0), "r1", 0, 1),
                                               Placement(TaskRef(REDUCE, 1, 0), "r1", 1, 2)])
    widths = {0: 5, 1: 2}
    out = merge_schedules(inst, m, r, widths)
    start = {pl.task: pl.start for pl in out.placements}
    # maps run in width order; reduce of job 1 released first
    assert start[TaskRef(MAP, 1, 0)] == 0 and start[TaskRef(MAP, 0, 0)] == 1
    assert start[TaskRef(REDUCE, 1, 0)] == 2 and start[TaskRef(REDUCE, 0, 0)] == 5


def _key(ref, widths):
    return (widths[ref.job], 0 if ref.phase == MAP else 1, ref.job, ref.index)


@pytest.mark.parametrize("seed", range(60))
def test_merge_properties(seed):
    inst = generate_instance(seed, n_jobs=1 + seed % 10, n_map_tasks_range=(1, 4),
                             n_reduce_tasks_range=(1, 4), m_map=1 + seed % 4,
                             m_reduce=1 + (seed // 4) % 4, shuffle_range=None)
    sol = solve_mr(inst)
    sched, w = sol.schedule, sol.widths
    assert validate_schedule(inst, sched, "mr").ok
    assert sol.report.within_bound
    end = {pl.task: pl.end for pl in sched.placements}
    by_proc = {}
    for pl in sched.placements:
        by_proc.setdefault(pl.processor, []).append(pl)
    # tasks stay on their phase-schedule processors
    orig = {**sol.map_schedule.processor_of(), **sol.reduce_schedule.processor_of()}
    assert {pl.task: pl.processor for pl in sched.placements} == orig
    for j in w:
        job = inst.job(j)
        assert max(end[t.ref] for t in job.map_tasks) <= w[j]
        assert sched.job_completion[j] <= 2 * w[j]
    for proc, pls in by_proc.items():
        pls.sort(key=lambda q: q.start)
        if pls[0].task.phase == MAP:
            # back-to-back from 0, ascending width
            t = 0
            for pl in pls:
                assert pl.start == t
                t = pl.end
            keys = [_key(pl.task, w) for pl in pls]
            assert keys == sorted(keys)
        else:
            for n, a in enumerate(pls):
                assert a.start >= w[a.task.job]
                for b in pls[n + 1:]:
                    if w[b.task.job] <= a.start:
                        assert _key(a.task, w) < _key(b.task, w)


@pytest.mark.parametrize("seed", range(20))
def test_shared_pools(seed):
    inst = generate_instance(seed, n_jobs=4, shared_pools=True, shuffle_range=None)
    assert not inst.pools_disjoint
    sol = solve_mr(inst)
    assert validate_schedule(inst, sol.schedule, "mr").ok
    for j, wj in sol.widths.items():
        assert wj == sol.map_schedule.job_completion[j] + sol.reduce_schedule.job_completion[j]
    assert sol.report.within_bound


def test_bounds_formula():
    total, maxform = two_phase_bound(10.0, 4.0)
    assert total == pytest.approx(27 * 14) and maxform == pytest.approx(54 * 10)


@pytest.mark.parametrize("seed", range(25))
def test_never_beats_the_optimum(seed):
    inst = generate_instance(seed, shuffle_range=None, **TINY)
    sol = solve_mr(inst)
    opt = brute_force_mr(inst).optimum
    assert opt <= sol.schedule.objective <= 54 * opt
