"""
Checking the structural results numerically
===========================================

The identities that justify working on grid summaries hold to rounding
error on random instances, and real RPKM runs respect the repetition and
iteration-count bounds.
"""

import numpy as np

from rpkmeans import RPKMParams, rpkm
from rpkmeans.theory import (
    WLHistory,
    check_iteration_bounds,
    descent_condition_check,
    descent_steps,
    detect_clustering_repeats,
    partition_gap_residual,
    refinement_gap_residual,
    stirling2,
    violations,
)

rng = np.random.default_rng(0)

# moving the query center does not change the gap between a set's error
# and the summed error of its parts
X = rng.normal(size=(30, 3))
parts = rng.integers(0, 6, size=30)
print("partition gap residual:", partition_gap_residual(X, parts, rng.normal(size=3), rng.normal(size=3)))

# refining the partition shifts two clusterings' errors by the same amount
thin = np.arange(30)
G = rng.integers(0, 3, size=6)[parts]
G2 = rng.integers(0, 3, size=6)[parts]
print("refinement invariance residual:", refinement_gap_residual(X, parts, thin, G, G2))

# descent condition vs actual descent, step by step
Y = rng.normal(size=(200, 2)) * 5
res = rpkm(Y, RPKMParams(m=5, K=4, rng_seed=2), keep_history=True)
for sd in descent_steps(Y, res):
    chk = descent_condition_check(sd)
    print(f"level {chk.level}: condition {chk.holds!s:5}  descended {chk.descent!s:5}"
          f"  xi={chk.xi:9.3f}")

# no clustering is visited twice except the permitted hand-over pattern
findings = detect_clustering_repeats(WLHistory.from_result(res))
for f in findings:
    print(" ", f)
print("repeat violations:", len(violations(findings)))

sizes = [s.cells for s in res.steps]
iters = [s.wl_iters for s in res.steps]
print("cells per step:", sizes, " iterations:", iters)
print("iteration bound failures:", check_iteration_bounds(sizes, iters, 4))
print("S(20, 4) =", stirling2(20, 4))
