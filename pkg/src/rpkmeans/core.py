"""Error functions and nearest-centroid maps, all charged to a distance counter.

Points are ``float64`` arrays of shape ``(n, d)``; centroid sets have shape
``(K, d)``. Cell summaries pair ``(p, d)`` means with ``(p,)`` weights.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

# Rows processed per block when building distance matrices.
_CHUNK = 65536


class EmptyClusterError(ValueError):
    """A cluster has no members, so its center of mass is undefined."""

    def __init__(self, clusters):
        self.clusters = list(clusters)
        super().__init__(f"empty cluster(s): {self.clusters}")


class UnresolvableEmptyClusterError(ValueError):
    """Fewer representatives than clusters; some cluster must stay empty."""


class DegenerateErrorError(ArithmeticError):
    """Reference error is zero while the evaluated error is not."""


class Representative(NamedTuple):
    weight: int
    mean: np.ndarray


class DistanceCounter:
    """Tally of d-dimensional squared-distance evaluations.

    One counter belongs to one run. Never share it across concurrent runs.
    """

    __slots__ = ("count",)

    def __init__(self, count: int = 0):
        self.count = int(count)

    def add(self, k: int) -> None:
        if k < 0:
            raise ValueError("counter increments must be non-negative")
        self.count += int(k)

    def __repr__(self):
        return f"DistanceCounter({self.count})"


def as_points(X, name="points") -> np.ndarray:
    """Validate and return ``X`` as a finite 2-D float64 array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"{name} must be nonempty, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def _check_dims(X, C):
    if X.shape[1] != C.shape[1]:
        raise ValueError(
            f"dimension mismatch: data has d={X.shape[1]}, centroids d={C.shape[1]}"
        )


def squared_distance(a, b, counter: DistanceCounter | None = None) -> float:
    """Squared Euclidean distance between two d-vectors; counts one evaluation."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    diff = a - b
    if counter is not None:
        counter.add(1)
    return float(diff @ diff)


def pairwise_sq_distances(X, C, counter: DistanceCounter | None = None) -> np.ndarray:
    """All squared distances between rows of ``X`` and rows of ``C``.

    Returns an ``(n, K)`` matrix and books ``n * K`` evaluations. Uses the
    direct difference form (not the norm expansion) so that a point sitting
    on a centroid gets exactly zero.
    """
    n, K = X.shape[0], C.shape[0]
    out = np.empty((n, K))
    for start in range(0, n, _CHUNK):
        block = X[start:start + _CHUNK]
        diff = block[:, None, :] - C[None, :, :]
        np.einsum("nkd,nkd->nk", diff, diff, out=out[start:start + _CHUNK])
    if counter is not None:
        counter.add(n * K)
    return out


def induce_assignment(means, C, counter: DistanceCounter | None = None) -> np.ndarray:
    """Label each representative with its nearest centroid (lowest index on ties)."""
    means = as_points(means, "means")
    C = as_points(C, "centroids")
    _check_dims(means, C)
    return np.argmin(pairwise_sq_distances(means, C, counter), axis=1)


def induce_centroids(means, weights, labels, K: int) -> np.ndarray:
    """Weighted centers of mass of each cluster.

    Raises
    ------
    EmptyClusterError
        If any of the ``K`` clusters receives no representative.
    """
    means = np.asarray(means, dtype=np.float64)
    if means.ndim == 1:
        means = means[:, None]
    weights = np.asarray(weights, dtype=np.float64)
    labels = np.asarray(labels)
    mass = np.bincount(labels, weights=weights, minlength=K)
    empty = np.flatnonzero(mass == 0)
    if empty.size:
        raise EmptyClusterError(empty)
    return _weighted_sums(means, weights, labels, K) / mass[:, None]


def _weighted_sums(means, weights, labels, K):
    wx = weights[:, None] * means
    return np.stack(
        [np.bincount(labels, weights=wx[:, j], minlength=K) for j in range(means.shape[1])],
        axis=1,
    )


def full_error(X, C, counter: DistanceCounter | None = None) -> float:
    """K-means objective: sum over points of the squared distance to the nearest centroid."""
    X = as_points(X, "dataset")
    C = as_points(C, "centroids")
    _check_dims(X, C)
    return float(pairwise_sq_distances(X, C, counter).min(axis=1).sum())


def centroid_error(means, weights, C, counter: DistanceCounter | None = None):
    """Weighted nearest-centroid error of a set of representatives.

    Returns
    -------
    error : float
    labels : ndarray of shape (p,)
        The assignment induced by ``C``.
    """
    means = as_points(means, "means")
    C = as_points(C, "centroids")
    _check_dims(means, C)
    weights = np.asarray(weights, dtype=np.float64)
    dist = pairwise_sq_distances(means, C, counter)
    labels = np.argmin(dist, axis=1)
    nearest = dist[np.arange(len(labels)), labels]
    return float((weights * nearest).sum()), labels


def clustering_error(means, weights, labels, K: int) -> float:
    """Weighted error of representatives against their own cluster's center of mass.

    Empty clusters are allowed and simply contribute nothing. Performs no
    counted distance evaluations: each representative is compared with a
    single, already-known center.
    """
    means = as_points(means, "means")
    weights = np.asarray(weights, dtype=np.float64)
    labels = np.asarray(labels)
    mass = np.bincount(labels, weights=weights, minlength=K)
    sums = _weighted_sums(means, weights, labels, K)
    centers = np.zeros_like(sums)
    nonempty = mass > 0
    centers[nonempty] = sums[nonempty] / mass[nonempty, None]
    diff = means - centers[labels]
    return float((weights * np.einsum("pd,pd->p", diff, diff)).sum())


def std_error(X, C, params=None, counter: DistanceCounter | None = None) -> float:
    """Relative gap between ``C`` and full-data Lloyd seeded at ``C``.

    Computes ``(E* - E) / E*`` where ``E`` is the full-data error of ``C``
    and ``E*`` the error after running Lloyd's algorithm from ``C``. The
    value is never positive beyond rounding. Distance work is booked to
    ``counter``, which should be an evaluation-only counter, never the one
    of the algorithm being assessed.
    """
    from .baselines import lloyd

    if counter is None:
        counter = DistanceCounter()
    res = lloyd(X, C, params, counter)
    e_start = res.error_trace[0]
    e_star = res.error_trace[-1]
    if e_star == 0.0:
        if e_start == 0.0:
            return 0.0
        raise DegenerateErrorError(
            f"Lloyd reached zero error from a start with error {e_start!r}"
        )
    return (e_star - e_start) / e_star
