"""Round an optimal interval-indexed LP solution into a single-phase schedule.

Tasks are grouped into classes by their scaled fractional completion time.
Each class is filtered down to the LP mass that completes no later than the
class interval, rescaled into a fractional assignment, and rounded to an
integral assignment with the slot construction for the generalized
assignment problem (one extra task of at most the class size per machine).
Every machine runs its classes one after another in increasing order.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping

from .lp import FractionalSolution, IntervalGrid, as_fraction, build_grid, build_lp, solve_lp
from .model import Instance, PhaseSchedule, Placement, TaskRef

# LP values below this are treated as zero; comparisons against LP values use it as slack.
LP_EPS = 1e-9


class RoundingError(RuntimeError):
    """An invariant of the rounding pipeline failed (LP or partition bug)."""


@dataclass(frozen=True)
class ClassPartition:
    a: Fraction
    grid: IntervalGrid
    classes: Mapping[int, tuple[TaskRef, ...]]

    def class_of(self) -> dict[TaskRef, int]:
        return {r: l for l, refs in self.classes.items() for r in refs}


@dataclass(frozen=True)
class FilteredAssignment:
    """Per class ``l``: ``x[l][task][machine]`` with unit row sums and the load bound ``T[l]``."""

    a: Fraction
    grid: IntervalGrid
    x: Mapping[int, Mapping[TaskRef, Mapping[str, Fraction]]]
    T: Mapping[int, Fraction]
    mass: Mapping[TaskRef, float]  # LP mass up to the task's class, before rescaling


def partition_classes(sol: FractionalSolution, a=Fraction(3, 2)) -> ClassPartition:
    """Class ``l`` holds the tasks with ``(1+delta)^(l-1) < a*C <= (1+delta)^l``
    (class 0: ``a*C <= 1``)."""
    a = as_fraction(a)
    if not a > 1:
        raise ValueError("a must be greater than 1")
    grid = sol.model.grid
    af = float(a)
    classes: dict[int, list[TaskRef]] = defaultdict(list)
    for ref in sol.model.tasks:
        target = af * sol.completion(ref)
        l = 0
        while float(grid.upper(l)) < target * (1 - LP_EPS):
            l += 1
        classes[l].append(ref)
    return ClassPartition(a, grid, {l: tuple(sorted(v)) for l, v in sorted(classes.items())})


def filter_and_scale(sol: FractionalSolution, part: ClassPartition) -> FilteredAssignment:
    """Drop LP mass completing after a task's class interval and rescale the rest
    to a unit fractional assignment.  Checks the mass, load and size bounds."""
    model = sol.model
    grid = part.grid
    a = part.a
    need = float((a - 1) / a)
    cls = part.class_of()
    per_task: dict[TaskRef, dict[str, float]] = defaultdict(lambda: defaultdict(float))
    for v, (i, ref, l) in enumerate(model.y_vars):
        val = float(sol.x[v])
        if val > LP_EPS and l <= cls[ref]:
            per_task[ref][i] += val
    x: dict[int, dict[TaskRef, dict[str, Fraction]]] = {}
    T: dict[int, Fraction] = {}
    mass: dict[TaskRef, float] = {}
    for l, refs in part.classes.items():
        T[l] = a / (a - 1) * grid.upper(l)
        xl = {}
        loads: dict[str, float] = defaultdict(float)
        for ref in refs:
            m = sum(per_task[ref].values())
            mass[ref] = m
            if m < need - 1e-7:
                raise RoundingError(
                    f"{ref}: LP mass {m:.6g} up to class {l} is below (a-1)/a = {need:.6g}")
            raw = {i: Fraction(v) for i, v in sorted(per_task[ref].items())}
            tot = sum(raw.values())
            xl[ref] = {i: v / tot for i, v in raw.items()}
            for i, v in xl[ref].items():
                p = model.proc_times[ref][i]
                if p > grid.upper(l):
                    raise RoundingError(f"{ref}: supported on {i} with p={p} > (1+delta)^{l}")
                loads[i] += p * float(v)
        for i, load in loads.items():
            if load > float(T[l]) * (1 + 1e-7):
                raise RoundingError(f"class {l}: load {load:.6g} on {i} exceeds T = {float(T[l]):.6g}")
        x[l] = xl
    return FilteredAssignment(a, grid, x, T, mass)


def round_class(
    x: Mapping[Hashable, Mapping[str, Fraction]],
    p: Mapping[Hashable, Mapping[str, int]],
    machines=None,
) -> dict[Hashable, str]:
    """Round a fractional assignment (unit row sums) to an integral one.

    Each machine gets ``ceil(sum_t x[t][i])`` unit slots; its tasks, sorted by
    non-increasing size, pour their mass into the slots in order.  The
    resulting task/slot fractional matching is made acyclic by shifting mass
    around cycles, then matched leaf by leaf.  The load of every machine ends
    up at most its fractional load plus its largest supported task.
    """
    tasks = sorted(x)
    if machines is None:
        machines = sorted({i for t in tasks for i, v in x[t].items() if v > 0})
    order = {i: n for n, i in enumerate(machines)}

    # (a)+(b) slots and pouring
    edges: dict[tuple, Fraction] = {}
    for i in machines:
        ts = [t for t in tasks if x[t].get(i, 0) > 0]
        ts.sort(key=lambda t: -p[t][i])
        slot, cap = 0, Fraction(1)
        for t in ts:
            amount = Fraction(x[t][i])
            while amount > 0:
                put = min(amount, cap)
                key = (t, (order[i], slot))
                edges[key] = edges.get(key, 0) + put
                amount -= put
                cap -= put
                if cap == 0:
                    slot, cap = slot + 1, Fraction(1)
    for t in tasks:
        if sum(v for (tt, _), v in edges.items() if tt == t) != 1:
            raise RoundingError(f"{t}: fractional assignment does not sum to one")

    # (c) cancel cycles until the support is a forest
    adj: dict[tuple, set] = defaultdict(set)
    for (t, s) in edges:
        adj[("t", t)].add(("s", s))
        adj[("s", s)].add(("t", t))

    def edge_key(u, v):
        return (u[1], v[1]) if u[0] == "t" else (v[1], u[1])

    def remove(u, v):
        del edges[edge_key(u, v)]
        adj[u].discard(v)
        adj[v].discard(u)

    while True:
        cycle = _find_cycle(adj, [("t", t) for t in tasks])
        if cycle is None:
            break
        keys = [edge_key(cycle[n], cycle[(n + 1) % len(cycle)]) for n in range(len(cycle))]
        eps = min(edges[k] for k in keys[1::2])
        for n, k in enumerate(keys):
            edges[k] += eps if n % 2 == 0 else -eps
        for n in range(1, len(cycle), 2):
            u, v = cycle[n], cycle[(n + 1) % len(cycle)]
            if edges[edge_key(u, v)] == 0:
                remove(u, v)

    # (d) leaf matching on the forest
    assign: dict[Hashable, str] = {}
    live_tasks = set(tasks)
    while live_tasks:
        leaf = next((t for t in tasks if t in live_tasks and len(adj[("t", t)]) == 1), None)
        if leaf is not None:
            slot = next(iter(adj[("t", leaf)]))
            task = leaf
        else:
            slot_nodes = sorted(n for n in adj if n[0] == "s" and len(adj[n]) == 1)
            if not slot_nodes:
                raise RoundingError("no perfect matching could be extracted")
            slot = slot_nodes[0]
            task = next(iter(adj[slot]))[1]
        assign[task] = machines[slot[1][0]]
        live_tasks.discard(task)
        for nb in list(adj[("t", task)]):
            remove(("t", task), nb)
        for nb in list(adj[slot]):
            remove(slot, nb)
    return assign


def _find_cycle(adj, roots):
    """Return a cycle (alternating task/slot node list) of the support graph, or None."""
    seen: set = set()
    for root in roots:
        if root in seen or not adj[root]:
            continue
        parent = {root: None}
        stack = [(root, iter(sorted(adj[root])))]
        seen.add(root)
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                continue
            if nxt == parent[node]:
                continue
            if nxt in parent:
                # back edge: walk up from node to nxt
                path = [node]
                while path[-1] != nxt:
                    path.append(parent[path[-1]])
                path.reverse()
                return path
            parent[nxt] = node
            seen.add(nxt)
            stack.append((nxt, iter(sorted(adj[nxt]))))
    return None


@dataclass
class TaskSchedulingResult:
    schedule: PhaseSchedule
    solution: FractionalSolution
    partition: ClassPartition
    filtered: FilteredAssignment
    assignment: dict[TaskRef, str]
    uncompacted: PhaseSchedule

    @property
    def lp_objective(self) -> float:
        return self.solution.objective


def compact(sched: PhaseSchedule) -> PhaseSchedule:
    """Left-shift every processor's timeline, keeping the order of its tasks."""
    by_proc: dict[str, list[Placement]] = defaultdict(list)
    for pl in sched.placements:
        by_proc[pl.processor].append(pl)
    out = []
    for proc, pls in by_proc.items():
        t = 0
        for pl in sorted(pls, key=lambda q: (q.start, q.end)):
            out.append(Placement(pl.task, proc, t, t + (pl.end - pl.start)))
            t += pl.end - pl.start
    return PhaseSchedule.from_placements(sched.phase, out)


def run_task_scheduling(inst: Instance, phase: str, a=Fraction(3, 2),
                        delta=Fraction(1, 2)) -> TaskSchedulingResult:
    grid = build_grid(inst, phase, delta)
    sol = solve_lp(build_lp(inst, phase, grid))
    part = partition_classes(sol, a)
    fa = filter_and_scale(sol, part)
    pool = inst.pool(phase)
    p = sol.model.proc_times
    assignment: dict[TaskRef, str] = {}
    free = {i: 0 for i in pool}
    placements = []
    for l in sorted(part.classes):
        chosen = round_class(fa.x[l], p, [i for i in pool])
        assignment.update(chosen)
        for ref in sorted(chosen):
            i = chosen[ref]
            start = free[i]
            free[i] = start + p[ref][i]
            placements.append(Placement(ref, i, start, free[i]))
    raw = PhaseSchedule.from_placements(phase, placements)
    return TaskSchedulingResult(compact(raw), sol, part, fa, assignment, raw)


def task_scheduling(inst: Instance, phase: str, a=Fraction(3, 2),
                    delta=Fraction(1, 2)) -> PhaseSchedule:
    """Schedule all tasks of ``phase`` on its pool by LP rounding."""
    return run_task_scheduling(inst, phase, a, delta).schedule


def per_task_factor(a=Fraction(3, 2), delta=Fraction(1, 2)) -> Fraction:
    """Guaranteed ratio between a task's completion and its LP completion time."""
    a, delta = as_fraction(a), as_fraction(delta)
    return a * (a / (a - 1) + 1 + 1 / delta) * (1 + delta)


def class_budget(a, grid: IntervalGrid, l: int) -> Fraction:
    """Makespan bound of the rounded schedule of class ``l`` alone."""
    return (a / (a - 1) + 1) * grid.upper(l)
