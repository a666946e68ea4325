"""
RPKM against k-means++ and mini-batch k-means
=============================================

Same data, three algorithms: cost in distance computations versus the
full-data error reached.
"""

import numpy as np

from rpkmeans import (
    DistanceCounter,
    MBParams,
    MixtureSpec,
    RPKMParams,
    full_error,
    generate_mixture,
    kmeanspp_init,
    lloyd,
    minibatch_kmeans,
    rpkm,
)

n, d, K = 50_000, 4, 9
X, _, _ = generate_mixture(MixtureSpec(n, d, K, seed=3))

rows = []

c = DistanceCounter()
C0 = kmeanspp_init(X, K, 0, c)
res = lloyd(X, C0, counter=c)
rows.append(("k-means++ + Lloyd", c.count, res.error_trace[-1]))

for b in (100, 1000):
    c = DistanceCounter()
    rng = np.random.default_rng(0)
    sub = X[rng.choice(n, 3 * b, replace=False)]
    C = minibatch_kmeans(X, K, kmeanspp_init(sub, K, rng, c), MBParams(b, 100, 1), c)
    rows.append((f"mini-batch b={b}", c.count, full_error(X, C)))

for m in (3, 5):
    r = rpkm(X, RPKMParams(m=m, K=K, rng_seed=0))
    rows.append((f"RPKM m={m}", r.total_dist_evals, full_error(X, r.centroids)))

best = min(err for _, _, err in rows)
print(f"{'algorithm':<20} {'distances':>11} {'error':>12} {'vs best':>8}")
for name, cost, err in rows:
    print(f"{name:<20} {cost:>11} {err:>12.1f} {err / best:>8.3f}")
