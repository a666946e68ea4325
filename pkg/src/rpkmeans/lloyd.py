"""Weighted Lloyd iterations over a set of representatives."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DistanceCounter,
    UnresolvableEmptyClusterError,
    _weighted_sums,
    as_points,
    pairwise_sq_distances,
)

# Guards the relative stopping test when the error reaches zero.
EPS_FLOOR = 1e-300


@dataclass(frozen=True)
class WLParams:
    rel_tolerance: float = 1e-9
    max_iterations: int = 1000

    def __post_init__(self):
        if self.rel_tolerance < 0:
            raise ValueError("rel_tolerance must be >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class WLResult:
    """Outcome of one weighted Lloyd run.

    ``error_trace`` alternates centroid and clustering errors:
    ``[E(C_0), E(G_0), E(C_1), E(G_1), ..., E(C_l)]``, so it has
    ``2 * iterations + 1`` entries. ``labels`` is the final assignment
    ``G_l`` and ``labels_prev`` is ``G_{l-1}``, the clustering whose centers
    of mass produced the returned centroids (up to empty-cluster repairs).
    """

    centroids: np.ndarray
    labels: np.ndarray
    labels_prev: np.ndarray
    iterations: int
    error_trace: list
    distance_evals: int
    repair_evals: int = 0
    history: list | None = field(default=None, repr=False)

    @property
    def centroid_error(self) -> float:
        return self.error_trace[-1]


def _repair(labels, means, weights, C, dist, counter):
    K = C.shape[0]
    counts = np.bincount(labels, minlength=K)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return labels, C, dist, 0
    if len(means) < K:
        raise UnresolvableEmptyClusterError(
            f"{len(means)} representatives cannot fill {K} clusters"
        )
    contrib = weights * dist[np.arange(len(labels)), labels]
    order = iter(np.argsort(-contrib, kind="stable"))
    C = C.copy()
    for k in empty:
        for s in order:
            if counts[labels[s]] > 1:
                break
        counts[labels[s]] -= 1
        counts[k] += 1
        C[k] = means[s]
    dist = dist.copy()
    dist[:, empty] = pairwise_sq_distances(means, C[empty], counter)
    return np.argmin(dist, axis=1), C, dist, len(means) * len(empty)


def repair_empty_clusters(labels, means, weights, centroids, counter=None):
    """Re-seed every empty cluster at a high-error representative.

    Representatives are taken in decreasing order of their weighted error
    contribution ``w * ||mean - c_assigned||**2``, skipping any whose
    cluster would be left empty, and each is claimed at most once. Labels
    are then recomputed. Standalone calls first evaluate the full distance
    matrix (``len(means) * K``); the moved centroids then cost
    ``len(means) * n_empty`` more.

    With duplicate representatives a re-seeded cluster can still end up
    empty after reassignment because ties go to the lowest index.

    Raises
    ------
    UnresolvableEmptyClusterError
        If there are fewer representatives than clusters.
    """
    means = as_points(means, "means")
    centroids = as_points(centroids, "centroids")
    weights = np.asarray(weights, dtype=np.float64)
    labels = np.asarray(labels)
    K = centroids.shape[0]
    if not np.any(np.bincount(labels, minlength=K) == 0):
        return labels, centroids
    dist = pairwise_sq_distances(means, centroids, counter)
    new_labels, new_c, _, _ = _repair(labels, means, weights, centroids, dist, counter)
    return new_labels, new_c


def _assign(means, weights, C, counter):
    dist = pairwise_sq_distances(means, C, counter)
    labels = np.argmin(dist, axis=1)
    labels, C, dist, extra = _repair(labels, means, weights, C, dist, counter)
    nearest = dist[np.arange(len(labels)), labels]
    return labels, C, float((weights * nearest).sum()), extra


def _update(means, weights, labels, C_old):
    K = C_old.shape[0]
    mass = np.bincount(labels, weights=weights, minlength=K)
    sums = _weighted_sums(means, weights, labels, K)
    C = C_old.copy()
    nonempty = mass > 0
    C[nonempty] = sums[nonempty] / mass[nonempty, None]
    return C


def weighted_lloyd(means, weights, K, C0, params: WLParams | None = None,
                   counter: DistanceCounter | None = None, keep_history=False) -> WLResult:
    """Weighted Lloyd's algorithm.

    Parameters
    ----------
    means : array of shape (p, d)
        Representatives.
    weights : array of shape (p,)
        Positive weights (cardinalities).
    K : int
        Number of clusters.
    C0 : array of shape (K, d)
        Initial centroids.
    params : WLParams, optional
    counter : DistanceCounter, optional
        Receives ``p * K`` per assignment step plus repair work.
    keep_history : bool
        Keep every assignment ``G_0, ..., G_l`` in ``result.history``.

    Stops when the assignment does not change, when the centroid error
    decreases by at most ``rel_tolerance`` times its previous value, or after
    ``max_iterations`` updates.
    """
    params = params or WLParams()
    counter = counter if counter is not None else DistanceCounter()
    means = as_points(means, "means")
    C = as_points(C0, "initial centroids").copy()
    weights = np.asarray(weights, dtype=np.float64)
    if C.shape != (K, means.shape[1]):
        raise ValueError(f"C0 has shape {C.shape}, expected {(K, means.shape[1])}")
    if weights.shape != (len(means),) or np.any(weights <= 0):
        raise ValueError("weights must be positive, one per representative")
    start = counter.count

    labels, C, e_c, repair_evals = _assign(means, weights, C, counter)
    trace = [e_c]
    history = [labels] if keep_history else None
    prev = labels
    r = 0
    while True:
        r += 1
        C = _update(means, weights, labels, C)
        diff = means - C[labels]
        trace.append(float((weights * np.einsum("pd,pd->p", diff, diff)).sum()))
        new_labels, C, e_new, extra = _assign(means, weights, C, counter)
        repair_evals += extra
        trace.append(e_new)
        if keep_history:
            history.append(new_labels)
        prev, labels = labels, new_labels
        if (
            np.array_equal(prev, labels)
            or e_c - e_new <= params.rel_tolerance * max(e_c, EPS_FLOOR)
            or r >= params.max_iterations
        ):
            break
        e_c = e_new
    return WLResult(C, labels, prev, r, trace, counter.count - start, repair_evals, history)
