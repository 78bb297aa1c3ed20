from __future__ import annotations

from fractions import Fraction

from hypothesis import settings

from mrfs.model import MAP, REDUCE, Instance, Job, Task

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def make_instance(jobs, map_procs=("m1",), reduce_procs=("r1",), input_procs=None) -> Instance:
    """``jobs``: list of ``(weight, [map proc_times], [reduce proc_times], shuffle_or_None)``."""
    out = []
    for j, (w, maps, reds, sh) in enumerate(jobs):
        out.append(Job(
            j, Fraction(w),
            tuple(Task(j, k, MAP, dict(p)) for k, p in enumerate(maps)),
            tuple(Task(j, k, REDUCE, dict(p)) for k, p in enumerate(reds)),
            None if sh is None else tuple(tuple(r) for r in sh)))
    return Instance(tuple(out), tuple(map_procs), tuple(reduce_procs),
                    None if input_procs is None else tuple(input_procs))


TINY = dict(n_jobs=3, n_map_tasks_range=(1, 2), n_reduce_tasks_range=(1, 2), m_map=2, m_reduce=2)
MICRO = dict(n_jobs=2, n_map_tasks_range=(1, 2), n_reduce_tasks_range=(1, 2), m_map=2, m_reduce=2,
             p_range=(1, 6), shuffle_range=(0, 3))


def random_fractional_matching(seed: int):
    """Random fractional assignment (unit row sums) with integer sizes.

    Returns ``(x, p, machines)`` where ``x[t][i]`` are Fractions.
    """
    import random

    rng = random.Random(seed)
    n, m = rng.randint(1, 8), rng.randint(1, 4)
    machines = [f"i{k}" for k in range(m)]
    x, p = {}, {}
    for t in range(n):
        support = rng.sample(machines, rng.randint(1, m))
        raw = {i: rng.randint(1, 6) for i in support}
        tot = sum(raw.values())
        x[t] = {i: Fraction(v, tot) for i, v in raw.items()}
        p[t] = {i: rng.randint(1, 20) for i in machines}
    return x, p, machines


def fractional_loads(x, p, machines):
    return {i: sum((p[t][i] * x[t].get(i, 0) for t in x), Fraction(0)) for i in machines}


def record_acceptance(config, number: int, ok: bool, detail: str) -> None:
    lines = config.__dict__.setdefault("_acceptance_lines", {})
    lines[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(lines[number])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
