"""
Shuffle tasks on the Reduce processors and on separate input processors
=======================================================================

"""

from mrfs.model import SHUFFLE, generate_instance, validate_schedule
from mrfs.shuffle import block_normal_form_violations, fold_shuffle, solve_msr_same, solve_msr_separate

inst = generate_instance(7, n_jobs=3, n_map_tasks_range=(2, 2), n_reduce_tasks_range=(1, 2),
                         shuffle_range=(1, 4))

# folding: every Reduce task absorbs the transfer time of its shuffle block
folded = fold_shuffle(inst)
for t, f in zip(inst.tasks("reduce"), folded.tasks("reduce")):
    print(t.ref, dict(t.proc_times), "->", dict(f.proc_times))

# same-processor variant: blocks run right before their Reduce task
same = solve_msr_same(inst)
print("msr-same objective", same.schedule.objective,
      "valid", validate_schedule(inst, same.schedule, "msr-same").ok,
      "block form violations", len(block_normal_form_violations(inst, same.schedule)))

# separate variant: blocks move to the paired input processor, times unchanged
sep = solve_msr_separate(inst)
for pl in sep.schedule.placements:
    if pl.task.phase == SHUFFLE and pl.end > pl.start:
        print(f"  {pl.processor}: {pl.task} [{pl.start}, {pl.end})")
print("msr-separate objective", sep.schedule.objective,
      "valid", validate_schedule(inst, sep.schedule, "msr-separate").ok)
print(f"lower bound {sep.report.lower_bound:.2f}, certified {sep.report.certified_bound:.1f}")

# optional: left-shift the Reduce processors after the move
packed = solve_msr_separate(inst, recompact=True)
print("recompacted objective", packed.schedule.objective)
