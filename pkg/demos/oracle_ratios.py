"""
Measured approximation ratios against exact optima
==================================================

"""

import statistics

from mrfs.merge import solve_mr
from mrfs.model import generate_instance
from mrfs.oracle import OracleCapExceeded, brute_force_mr, brute_force_msr
from mrfs.shuffle import solve_msr_same, solve_msr_separate

ratios = {"mr": [], "msr-same": [], "msr-separate": []}
for seed in range(40):
    inst = generate_instance(seed, n_jobs=3, m_map=2, m_reduce=2)
    try:
        opt_sep = brute_force_msr(inst, "separate").optimum
    except OracleCapExceeded:
        continue  # too many shuffle orders for the exact search
    ratios["mr"].append(solve_mr(inst).schedule.objective / brute_force_mr(inst).optimum)
    ratios["msr-same"].append(solve_msr_same(inst).schedule.objective /
                              brute_force_msr(inst, "same").optimum)
    ratios["msr-separate"].append(solve_msr_separate(inst).schedule.objective / opt_sep)

# the guarantees are 54, 54 and 81; the measured values are far below
for name, vals in ratios.items():
    vals = [float(v) for v in vals]
    print(f"{name:13s} n={len(vals):3d} mean={statistics.mean(vals):.3f} max={max(vals):.3f}")
