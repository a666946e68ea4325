"""
RPKM step by step
=================

Cluster a 2-D Gaussian mixture by running weighted Lloyd on ever finer
grid summaries, and watch distance counts and error per level.
"""

import numpy as np

from rpkmeans import MixtureSpec, RPKMParams, generate_mixture, rpkm

X, labels, true_means = generate_mixture(MixtureSpec(n=100_000, d=2, K_components=3, seed=1))
print(f"dataset: {X.shape[0]} points in {X.shape[1]}-D")

# evaluate=True adds the full-data error and std.error of every step;
# that work goes to a separate counter, not to the algorithm's cost
res = rpkm(X, RPKMParams(m=6, K=3, rng_seed=0), evaluate=True)

print(f"\n{'level':>5} {'cells':>6} {'iters':>5} {'dist':>8} {'cum dist':>9} "
      f"{'full error':>12} {'std.error':>10}")
for s in res.steps:
    print(f"{s.level:>5} {s.cells:>6} {s.wl_iters:>5} {s.dist_evals:>8} {s.cum_dist_evals:>9} "
          f"{s.full_error:>12.1f} {s.std_error:>10.2e}")

# a single Lloyd iteration on the raw data costs n*K distances
print(f"\none Lloyd iteration on all points: {X.shape[0] * 3} distances")
print(f"whole RPKM run:                    {res.total_dist_evals} distances")
print(f"evaluation only (not charged):     {res.eval_dist_evals} distances")

# the recovered centers sit next to the generating means
order = np.argsort(res.centroids[:, 0])
print("\nfound centers:\n", np.round(res.centroids[order], 3))
print("generating means:\n", np.round(true_means[np.argsort(true_means[:, 0])], 3))

# stopping on centroid displacement instead of running every level
early = rpkm(X, RPKMParams(m=10, K=3, displacement_threshold=1e-4, rng_seed=0))
print(f"\nwith a displacement threshold RPKM stopped at level {early.steps[-1].level}"
      f" after {early.total_dist_evals} distances")
