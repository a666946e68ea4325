"""Competitors instrumented with the same distance counter: K-means++
seeding followed by full-data Lloyd, and minibatch K-means."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DistanceCounter, as_points, pairwise_sq_distances
from .lloyd import EPS_FLOOR, WLParams, WLResult, _repair


@dataclass(frozen=True)
class MBParams:
    batch_size: int
    num_batches: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.num_batches < 1:
            raise ValueError("batch_size and num_batches must be positive")


def kmeanspp_init(X, K: int, rng, counter: DistanceCounter | None = None) -> np.ndarray:
    """K-means++ seeding with squared-distance weighting.

    The first center is uniform over the points. Each following one is
    drawn with probability proportional to the squared distance to the
    nearest center chosen so far. Costs ``n * (K - 1)`` evaluations.

    If every point coincides with a chosen center (duplicates), the next
    center is drawn uniformly among points not selected yet.
    """
    X = as_points(X, "dataset")
    n = len(X)
    if n < K:
        raise ValueError(f"n={n} is smaller than K={K}")
    rng = np.random.default_rng(rng)
    chosen = [int(rng.integers(n))]
    closest = None
    for _ in range(1, K):
        d = pairwise_sq_distances(X, X[chosen[-1]][None, :], counter)[:, 0]
        closest = d if closest is None else np.minimum(closest, d)
        total = closest.sum()
        if total > 0:
            cum = np.cumsum(closest)
            idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            if idx == n:
                # u * total rounded up to the total
                idx = int(np.flatnonzero(closest)[-1])
        else:
            remaining = np.setdiff1d(np.arange(n), chosen)
            idx = int(remaining[rng.integers(len(remaining))])
        chosen.append(idx)
    return X[chosen].copy()


def lloyd(X, C0, params: WLParams | None = None,
          counter: DistanceCounter | None = None) -> WLResult:
    """Plain Lloyd's algorithm on raw points.

    Written independently of :func:`rpkmeans.lloyd.weighted_lloyd` but with
    the same stopping rule and repair, so the two agree exactly when every
    weight is one.
    """
    params = params or WLParams()
    counter = counter if counter is not None else DistanceCounter()
    X = as_points(X, "dataset")
    C = as_points(C0, "initial centroids").copy()
    if C.shape[1] != X.shape[1]:
        raise ValueError("dimension mismatch between data and centroids")
    n, K = len(X), len(C)
    ones = np.ones(n)
    rows = np.arange(n)
    start = counter.count

    def assign(C):
        dist = pairwise_sq_distances(X, C, counter)
        labels, C, dist, extra = _repair(np.argmin(dist, axis=1), X, ones, C, dist, counter)
        return labels, C, float(dist[rows, labels].sum()), extra

    labels, C, err, repair_evals = assign(C)
    trace = [err]
    r = 0
    while True:
        r += 1
        counts = np.bincount(labels, minlength=K)
        sums = np.stack(
            [np.bincount(labels, weights=X[:, a], minlength=K) for a in range(X.shape[1])],
            axis=1,
        )
        C = C.copy()
        hit = counts > 0
        C[hit] = sums[hit] / counts[hit, None]
        diff = X - C[labels]
        trace.append(float(np.einsum("nd,nd->n", diff, diff).sum()))
        new_labels, C, new_err, extra = assign(C)
        repair_evals += extra
        trace.append(new_err)
        prev, labels = labels, new_labels
        if (
            np.array_equal(prev, labels)
            or err - new_err <= params.rel_tolerance * max(err, EPS_FLOOR)
            or r >= params.max_iterations
        ):
            break
        err = new_err
    return WLResult(C, labels, prev, r, trace, counter.count - start, repair_evals)


def minibatch_kmeans(X, K: int, C0, params: MBParams,
                     counter: DistanceCounter | None = None) -> np.ndarray:
    """Minibatch K-means with per-center learning rates.

    Each of ``num_batches`` batches draws ``batch_size`` points uniformly
    with replacement and assigns them against the centers as they stood at
    the start of the batch (``batch_size * K`` evaluations). The points are
    then folded in one at a time: ``c += (1 / count[c]) * (x - c)``.
    """
    X = as_points(X, "dataset")
    C = as_points(C0, "initial centroids").copy()
    if C.shape != (K, X.shape[1]):
        raise ValueError(f"C0 has shape {C.shape}, expected {(K, X.shape[1])}")
    rng = np.random.default_rng(params.rng_seed)
    counts = np.zeros(K, dtype=np.int64)
    for _ in range(params.num_batches):
        batch = X[rng.integers(len(X), size=params.batch_size)]
        nearest = np.argmin(pairwise_sq_distances(batch, C, counter), axis=1)
        for x, k in zip(batch, nearest):
            counts[k] += 1
            C[k] += (1.0 / counts[k]) * (x - C[k])
    return C
