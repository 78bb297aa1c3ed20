from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import sparse
from scipy.optimize import linprog

from conftest import make_instance, MICRO
from mrfs import simplex
from mrfs.lp import (LpError, build_grid, build_lp, check_point, export_mps, schedule_to_lp_point,
                     solve_lp)
from mrfs.model import MAP, REDUCE, generate_instance
from mrfs.oracle import brute_force_phase
from mrfs.shuffle import fold_shuffle


def highs(model):
    res = linprog(model.c, A_ub=model.A, b_ub=model.b, bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


# ---------------------------------------------------------------------- grid


def test_grid_example_tmax_10():
    inst = make_instance([(1, [{"p1": 7, "p2": 10}], [{"r1": 1}], None)], map_procs=("p1", "p2"))
    g = build_grid(inst, MAP, Fraction(1, 2))
    assert g.t_max == 10 and g.L == 7
    assert Fraction(3, 2) ** 6 >= 10 > Fraction(3, 2) ** 5


def test_grid_tmax_one():
    inst = make_instance([(1, [{"m1": 1}], [{"r1": 1}], None)])
    g = build_grid(inst, MAP, Fraction(1, 2))
    assert g.L == 1
    assert list(g.intervals) == [0, 1]
    assert g.lower(0) == 1 and g.upper(0) == 1 and g.upper(1) == Fraction(3, 2)


@pytest.mark.parametrize("delta", [1, 0, Fraction(3, 2), -1])
def test_grid_delta_out_of_range(delta):
    inst = make_instance([(1, [{"m1": 1}], [{"r1": 1}], None)])
    with pytest.raises(ValueError, match="delta out of range"):
        build_grid(inst, MAP, delta)


@given(st.integers(2, 5000), st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(1, 10)]))
def test_grid_L_is_minimal(t_max, delta):
    inst = make_instance([(1, [{"m1": t_max}], [{"r1": 1}], None)])
    g = build_grid(inst, MAP, delta)
    base = 1 + delta
    assert base ** (g.L - 2) < t_max <= base ** (g.L - 1)


def test_interval_of_uses_half_open_brackets():
    inst = make_instance([(1, [{"m1": 10}], [{"r1": 1}], None)])
    g = build_grid(inst, MAP, Fraction(1, 2))
    assert g.interval_of(1) == 0
    assert g.interval_of(Fraction(3, 2)) == 1
    assert g.interval_of(2) == 2
    assert g.interval_of(Fraction(9, 4)) == 2


# ----------------------------------------------------------------------- LP


def test_single_unit_task_lp():
    inst = make_instance([(1, [{"m1": 1}], [{"r1": 1}], None)])
    sol = solve_lp(build_lp(inst, MAP, build_grid(inst, MAP, Fraction(1, 2))))
    assert sol.objective == pytest.approx(1, abs=1e-9)
    assert sol.CD[0] == pytest.approx(1, abs=1e-9)


def test_two_unit_tasks_below_integral_optimum():
    inst = make_instance([(1, [{"m1": 1}], [{"r1": 1}], None), (1, [{"m1": 1}], [{"r1": 1}], None)])
    sol = solve_lp(build_lp(inst, MAP, build_grid(inst, MAP, Fraction(1, 2))))
    assert sol.objective <= 3 + 1e-9
    assert brute_force_phase(inst, MAP).optimum == 3


def test_column_elimination():
    inst = make_instance([(1, [{"m1": 5, "m2": 1}], [{"r1": 1}], None)], map_procs=("m1", "m2"))
    model = build_lp(inst, MAP, build_grid(inst, MAP, Fraction(1, 2)))
    for proc, ref, l in model.y_vars:
        assert model.proc_times[ref][proc] <= model.grid.upper(l)
    assert not any(proc == "m1" and l < 4 for proc, _, l in model.y_vars)


def test_row_structure():
    inst = generate_instance(5, n_jobs=2)
    model = build_lp(inst, MAP, build_grid(inst, MAP, Fraction(1, 2)))
    n_tasks = len(model.tasks)
    names = model.row_names
    for prefix in ("assign_", "dummy_", "lower_"):
        assert sum(n.startswith(prefix) for n in names) == n_tasks
    assert all(n.startswith(("assign_", "dummy_", "lower_", "load_")) for n in names)
    # objective only on the dummy completion variables, with the job weights
    for j in model.jobs:
        assert model.c[model.cd_index(j)] == float(inst.weight(j))
    assert np.count_nonzero(model.c) == len(model.jobs)


@pytest.mark.parametrize("seed", range(8))
def test_lp_matches_highs(seed):
    inst = generate_instance(seed, n_jobs=1 + seed % 5, n_map_tasks_range=(1, 3),
                             n_reduce_tasks_range=(1, 3), m_map=3, m_reduce=2)
    for phase, src in ((MAP, inst), (REDUCE, fold_shuffle(inst))):
        model = build_lp(src, phase, build_grid(src, phase, Fraction(1, 2)))
        sol = solve_lp(model)
        assert sol.objective == pytest.approx(highs(model), rel=1e-9, abs=1e-9)
        assert check_point(model, sol.x) == []


def test_lp_solution_is_deterministic():
    inst = generate_instance(11, n_jobs=4)
    model = build_lp(inst, REDUCE, build_grid(inst, REDUCE, Fraction(1, 2)))
    a, b = solve_lp(model), solve_lp(model)
    assert abs(a.objective - b.objective) <= 1e-12
    assert np.array_equal(a.x, b.x)


@pytest.mark.parametrize("seed", range(15))
def test_relaxation_below_phase_optimum(seed):
    inst = generate_instance(seed, **MICRO)
    for phase in (MAP, REDUCE):
        opt = brute_force_phase(inst, phase)
        model = build_lp(inst, phase, build_grid(inst, phase, Fraction(1, 2)))
        assert solve_lp(model).objective <= float(opt.optimum) + 1e-9
        point = schedule_to_lp_point(model, opt.schedule)
        assert check_point(model, point) == []


def test_lp_point_for_unlisted_completion_rejected():
    inst = make_instance([(1, [{"m1": 2}], [{"r1": 1}], None)])
    model = build_lp(inst, MAP, build_grid(inst, MAP, Fraction(1, 2)))
    from mrfs.model import PhaseSchedule, Placement, TaskRef
    sched = PhaseSchedule.from_placements(MAP, [Placement(TaskRef(MAP, 0, 0), "m1", 0, 100)])
    with pytest.raises(LpError):
        schedule_to_lp_point(model, sched)


def parse_mps(text):
    rows, cols, rhs, cost = [], {}, {}, {}
    section = None
    for line in text.splitlines():
        if not line.startswith(" "):
            section = line.split()[0]
            continue
        f = line.split()
        if section == "ROWS" and f[0] == "L":
            rows.append(f[1])
        elif section == "COLUMNS":
            cols.setdefault(f[0], {})
            if f[1] == "obj":
                cost[f[0]] = float(f[2])
            else:
                cols[f[0]][f[1]] = float(f[2])
        elif section == "RHS":
            rhs[f[1]] = float(f[2])
    ridx = {r: n for n, r in enumerate(rows)}
    names = list(cols)
    A = sparse.lil_matrix((len(rows), len(names)))
    for v, name in enumerate(names):
        for r, val in cols[name].items():
            A[ridx[r], v] = val
    b = np.array([rhs.get(r, 0.0) for r in rows])
    c = np.array([cost.get(n, 0.0) for n in names])
    return c, A.tocsr(), b


@pytest.mark.parametrize("seed", range(3))
def test_mps_export_round_trips_through_an_external_solver(seed):
    inst = generate_instance(seed, n_jobs=3)
    model = build_lp(inst, MAP, build_grid(inst, MAP, Fraction(1, 2)))
    text = export_mps(model)
    assert text.startswith("NAME") and text.rstrip().endswith("ENDATA")
    c, A, b = parse_mps(text)
    res = linprog(c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    assert res.fun == pytest.approx(solve_lp(model).objective, rel=1e-9)


# ------------------------------------------------------------------ simplex


def test_simplex_empty_problem():
    res = simplex.solve(np.zeros(0), np.zeros((0, 0)), np.zeros(0))
    assert res.objective == 0


def test_simplex_infeasible_and_unbounded():
    with pytest.raises(simplex.SimplexError, match="infeasible"):
        simplex.solve([1.0], [[1.0], [-1.0]], [1.0, -2.0])
    with pytest.raises(simplex.SimplexError, match="unbounded"):
        simplex.solve([-1.0, 0.0], [[-1.0, 1.0]], [0.0])


@given(st.integers(0, 10**6))
def test_simplex_matches_highs_on_random_feasible_lps(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 8), rng.integers(1, 8)
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    x0 = rng.random(n)
    b = A @ x0 + rng.random(m)  # x0 is feasible
    c = rng.integers(0, 5, size=n).astype(float)  # bounded below by 0
    ref = linprog(c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    res = simplex.solve(c, A, b)
    assert res.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
    assert (A @ res.x <= b + 1e-7).all() and (res.x >= 0).all()


def test_simplex_degenerate_problem():
    # many redundant tight rows through the optimum
    A = np.array([[1.0, 1.0]] * 6 + [[-1.0, 0.0], [0.0, -1.0]])
    b = np.array([1.0] * 6 + [-0.5, -0.5])
    res = simplex.solve([1.0, 2.0], A, b)
    assert res.objective == pytest.approx(1.5)
