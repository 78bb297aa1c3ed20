"""Interval-indexed LP relaxation for scheduling one phase on unrelated processors.

Completion times are discretized into ``[1,1]`` (index 0) followed by the
geometric intervals ``((1+delta)^(l-1), (1+delta)^l]`` for ``l = 1..L``.
A variable ``y[i, task, l]`` is the fraction of ``task`` that completes on
processor ``i`` inside interval ``l``; it only exists when the task fits,
i.e. ``p[i, task] <= (1+delta)^l``.  Each job gets a dummy completion
variable ``CD[j]`` bounded below by all of its task completions, and the
objective is ``sum_j w_j CD[j]``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import sparse

from . import simplex
from .model import Instance, PhaseSchedule, TaskRef

FEAS_TOL = 1e-9


class LpError(RuntimeError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**6)
    return Fraction(x)


@dataclass(frozen=True)
class IntervalGrid:
    delta: Fraction
    t_max: int
    L: int

    @property
    def base(self) -> Fraction:
        return 1 + self.delta

    @property
    def endpoints(self) -> list[Fraction]:
        """Upper endpoints ``(1+delta)^l`` for ``l = 0..L``."""
        return [self.base ** l for l in range(self.L + 1)]

    def upper(self, l: int) -> Fraction:
        return self.base ** l

    def lower(self, l: int) -> Fraction:
        """Lower endpoint used as the completion-time coefficient of interval ``l``."""
        return Fraction(1) if l == 0 else self.base ** (l - 1)

    @property
    def intervals(self) -> range:
        return range(self.L + 1)

    def interval_of(self, t) -> int:
        """First interval whose upper endpoint is at least ``t``."""
        l = 0
        while self.upper(l) < t:
            l += 1
        return l


def build_grid(inst: Instance, phase: str, delta=Fraction(1, 2)) -> IntervalGrid:
    delta = as_fraction(delta)
    if not 0 < delta < 1:
        raise ValueError(f"delta out of range: {delta} not in (0, 1)")
    pool = inst.pool(phase)
    t_max = sum(max(t.proc_times[i] for i in pool) for t in inst.tasks(phase))
    base = 1 + delta
    L = 1
    while base ** (L - 1) < t_max:
        L += 1
    return IntervalGrid(delta, t_max, L)


@dataclass
class LpModel:
    phase: str
    grid: IntervalGrid
    pool: tuple[str, ...]
    tasks: list[TaskRef]
    jobs: list[int]
    weights: dict[int, Fraction]
    y_vars: list[tuple[str, TaskRef, int]]
    A: sparse.csr_matrix
    b: np.ndarray
    c: np.ndarray
    row_names: list[str]
    proc_times: dict[TaskRef, dict[str, int]]

    @property
    def n_y(self) -> int:
        return len(self.y_vars)

    def c_index(self, ref: TaskRef) -> int:
        return self.n_y + self._task_pos[ref]

    def cd_index(self, job: int) -> int:
        return self.n_y + len(self.tasks) + self._job_pos[job]

    def __post_init__(self) -> None:
        self._task_pos = {r: n for n, r in enumerate(self.tasks)}
        self._job_pos = {j: n for n, j in enumerate(self.jobs)}

    @property
    def n_vars(self) -> int:
        return self.n_y + len(self.tasks) + len(self.jobs)

    def var_names(self) -> list[str]:
        names = [f"y_{i}_{r.job}_{r.index}_{l}" for i, r, l in self.y_vars]
        names += [f"C_{r.job}_{r.index}" for r in self.tasks]
        names += [f"CD_{j}" for j in self.jobs]
        return names


def build_lp(inst: Instance, phase: str, grid: IntervalGrid) -> LpModel:
    pool = inst.pool(phase)
    tasks = inst.tasks(phase)
    refs = [t.ref for t in tasks]
    jobs = [j.id for j in inst.jobs]
    y_vars = []
    for t in tasks:
        for i in pool:
            for l in grid.intervals:
                if t.proc_times[i] <= grid.upper(l):
                    y_vars.append((i, t.ref, l))
    ny, nt = len(y_vars), len(refs)
    task_pos = {r: n for n, r in enumerate(refs)}
    job_pos = {j: n for n, j in enumerate(jobs)}
    ptimes = {t.ref: dict(t.proc_times) for t in tasks}

    rows, cols, vals, rhs, names = [], [], [], [], []

    def add_row(entries, bound, name):
        r = len(rhs)
        for col, val in entries:
            rows.append(r)
            cols.append(col)
            vals.append(val)
        rhs.append(bound)
        names.append(name)

    by_task: dict[TaskRef, list[int]] = {r: [] for r in refs}
    for v, (i, r, l) in enumerate(y_vars):
        by_task[r].append(v)
    for r in refs:
        tag = f"{r.job}_{r.index}"
        # (1) every task completes somewhere:  -sum y <= -1
        add_row([(v, -1.0) for v in by_task[r]], -1.0, f"assign_{tag}")
    for r in refs:
        tag = f"{r.job}_{r.index}"
        # (2) C[task] <= CD[job]
        add_row([(ny + task_pos[r], 1.0), (ny + nt + job_pos[r.job], -1.0)], 0.0, f"dummy_{tag}")
    for r in refs:
        tag = f"{r.job}_{r.index}"
        # (3) sum lower(l) y <= C[task]
        ent = [(v, float(grid.lower(y_vars[v][2]))) for v in by_task[r]]
        ent.append((ny + task_pos[r], -1.0))
        add_row(ent, 0.0, f"lower_{tag}")
    by_proc: dict[str, list[int]] = {i: [] for i in pool}
    for v, (i, r, l) in enumerate(y_vars):
        by_proc[i].append(v)
    for i in pool:
        for l in grid.intervals:
            # (4) cumulative load on i up to interval l
            ent = [(v, float(ptimes[y_vars[v][1]][i])) for v in by_proc[i] if y_vars[v][2] <= l]
            if ent:
                add_row(ent, float(grid.upper(l)), f"load_{i}_{l}")

    n = ny + nt + len(jobs)
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(len(rhs), n))
    c = np.zeros(n)
    weights = {j.id: j.weight for j in inst.jobs}
    for j in jobs:
        c[ny + nt + job_pos[j]] = float(weights[j])
    return LpModel(phase, grid, tuple(pool), refs, jobs, weights, y_vars, A,
                   np.asarray(rhs, dtype=float), c, names, ptimes)


@dataclass
class FractionalSolution:
    model: LpModel
    x: np.ndarray
    objective: float
    iterations: int = 0

    @property
    def y(self) -> dict[tuple[str, TaskRef, int], float]:
        return {key: float(self.x[v]) for v, key in enumerate(self.model.y_vars) if self.x[v] != 0.0}

    def completion(self, ref: TaskRef) -> float:
        return float(self.x[self.model.c_index(ref)])

    def job_completion(self, job: int) -> float:
        return float(self.x[self.model.cd_index(job)])

    @property
    def C(self) -> dict[TaskRef, float]:
        return {r: self.completion(r) for r in self.model.tasks}

    @property
    def CD(self) -> dict[int, float]:
        return {j: self.job_completion(j) for j in self.model.jobs}


def check_point(model: LpModel, x: np.ndarray, tol: float = FEAS_TOL) -> list[str]:
    """Names of rows violated by ``x`` (beyond ``tol * (1 + |rhs|)``)."""
    bad = []
    if (x < -tol).any():
        bad.append("nonnegativity")
    lhs = model.A @ x
    slack = lhs - model.b
    for r in np.flatnonzero(slack > tol * (1 + np.abs(model.b))):
        bad.append(model.row_names[r])
    return bad


def solve_lp(model: LpModel) -> FractionalSolution:
    """Solve ``model`` with the built-in simplex and re-verify every row."""
    try:
        res = simplex.solve(model.c, model.A, model.b)
    except simplex.SimplexError as e:
        raise LpError(f"{model.phase} LP: {e}") from None
    bad = check_point(model, res.x)
    if bad:
        raise LpError(f"{model.phase} LP: solution violates rows {bad[:5]}")
    return FractionalSolution(model, res.x, float(model.c @ res.x), res.iterations)


def schedule_to_lp_point(model: LpModel, sched: PhaseSchedule) -> np.ndarray:
    """Encode an integral schedule of the model's phase as an LP point."""
    x = np.zeros(model.n_vars)
    index = {key: v for v, key in enumerate(model.y_vars)}
    for pl in sched.placements:
        l = model.grid.interval_of(pl.end)
        key = (pl.processor, pl.task, l)
        if key not in index:
            raise LpError(f"{pl.task} completing at {pl.end} on {pl.processor} has no LP column")
        x[index[key]] = 1.0
        x[model.c_index(pl.task)] = float(pl.end)
    for j in model.jobs:
        x[model.cd_index(j)] = float(sched.job_completion.get(j, 0))
    return x


def export_mps(model: LpModel) -> str:
    """Free-format MPS text of ``model``.

    Layout: ``NAME``, ``ROWS`` (``N obj`` then one ``L`` row per constraint,
    named as in ``model.row_names``), ``COLUMNS`` (column-major, one nonzero
    per line), ``RHS`` (nonzero right-hand sides only), ``ENDATA``.  There is
    no ``BOUNDS`` section: every variable has the default bound ``x >= 0``.
    Numbers are written with ``repr`` so they round-trip exactly.
    """
    out = io.StringIO()
    out.write(f"NAME {model.phase}_lp\nROWS\n N obj\n")
    for name in model.row_names:
        out.write(f" L {name}\n")
    out.write("COLUMNS\n")
    A = model.A.tocsc()
    for v, vname in enumerate(model.var_names()):
        if model.c[v] != 0:
            out.write(f" {vname} obj {float(model.c[v])!r}\n")
        col = A.getcol(v)
        for r, val in sorted(zip(col.indices, col.data)):
            out.write(f" {vname} {model.row_names[r]} {float(val)!r}\n")
    out.write("RHS\n")
    for name, val in zip(model.row_names, model.b):
        if val != 0:
            out.write(f" rhs {name} {float(val)!r}\n")
    out.write("ENDATA\n")
    return out.getvalue()
