"""
From LP to merged schedule on a small MapReduce instance
=========================================================

"""

from fractions import Fraction

from mrfs.lp import build_grid, build_lp, solve_lp
from mrfs.merge import solve_mr
from mrfs.model import MAP, generate_instance, validate_schedule
from mrfs.rounding import filter_and_scale, partition_classes, round_class

# a random instance: 4 jobs, up to 3 tasks per phase, 3 Map and 2 Reduce processors
inst = generate_instance(42, n_jobs=4, n_map_tasks_range=(1, 3), n_reduce_tasks_range=(1, 3),
                         m_map=3, m_reduce=2, shuffle_range=None)
print("jobs:", len(inst.jobs), "map tasks:", len(inst.tasks(MAP)))

# the interval-indexed relaxation of the Map phase
grid = build_grid(inst, MAP, Fraction(1, 2))
model = build_lp(inst, MAP, grid)
sol = solve_lp(model)
print(f"grid: t_max={grid.t_max}, L={grid.L}; LP has {model.n_vars} columns, {len(model.row_names)} rows")
print(f"LP objective {sol.objective:.3f}")

# tasks grouped by scaled fractional completion time
part = partition_classes(sol, Fraction(3, 2))
for l, refs in part.classes.items():
    print(f"class {l}: " + ", ".join(str(r) for r in refs))

# each class is filtered, rescaled and rounded to an integral assignment
fa = filter_and_scale(sol, part)
for l in part.classes:
    chosen = round_class(fa.x[l], model.proc_times, list(inst.map_processors))
    print(f"class {l} -> " + ", ".join(f"{r}@{i}" for r, i in sorted(chosen.items())))

# the whole pipeline: both phases, widths, merge
res = solve_mr(inst)
print("widths:", res.widths)
for pl in sorted(res.schedule.placements, key=lambda q: (q.processor, q.start)):
    print(f"  {pl.processor}: {pl.task} [{pl.start}, {pl.end})")
print("objective:", res.schedule.objective, " valid:", validate_schedule(inst, res.schedule, "mr").ok)
print(f"ratio to the larger phase LP: {res.report.ratio_vs_lp:.3f} (certified bound "
      f"{res.report.certified_bound:.1f})")
