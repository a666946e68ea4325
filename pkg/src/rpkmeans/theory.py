"""Numerical checks of the structural results behind RPKM.

Partitions and clusterings of a point set are given as integer label
arrays over the points: ``labels[x]`` names the subset (or cluster) that
point ``x`` belongs to.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import as_points, full_error


def _centers(X, labels):
    _, inv, counts = np.unique(labels, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    sums = np.stack([np.bincount(inv, weights=X[:, j]) for j in range(X.shape[1])], axis=1)
    return sums / counts[:, None], counts, inv


def _sq(v):
    return np.einsum("...d,...d->...", v, v)


def partition_gap(X, partition, c) -> float:
    """``|D| ||mean(D) - c||^2 - sum_R |R| ||mean(R) - c||^2`` for one ``c``."""
    X = as_points(X)
    c = np.asarray(c, dtype=np.float64).ravel()
    means, counts, _ = _centers(X, np.asarray(partition))
    return float(len(X) * _sq(X.mean(axis=0) - c) - (counts * _sq(means - c)).sum())


def partition_gap_residual(X, partition, c, c_prime) -> float:
    """How far the partition-error gap moves between two query centers (should be 0)."""
    return abs(partition_gap(X, partition, c) - partition_gap(X, partition, c_prime))


def _check_nested(coarse, fine, what):
    coarse = np.asarray(coarse)
    fine = np.asarray(fine)
    _, first, inv = np.unique(fine, return_index=True, return_inverse=True)
    if not np.array_equal(coarse, coarse[first[inv.ravel()]]):
        raise ValueError(what)


def partition_clustering_error(X, partition, clustering) -> float:
    """Weighted error of each subset's mean against its cluster's center of mass."""
    X = as_points(X)
    partition = np.asarray(partition)
    clustering = np.asarray(clustering)
    _check_nested(clustering, partition, "clustering splits a subset of the partition")
    g_means, _, g_inv = _centers(X, clustering)
    s_means, s_counts, _ = _centers(X, partition)
    _, first = np.unique(partition, return_index=True)
    own = g_means[g_inv[first]]
    return float((s_counts * _sq(s_means - own)).sum())


def refinement_gap_residual(X, P, P_thin, G, G_prime) -> float:
    """Change in the clustering-error gap between ``G`` and ``G_prime``
    when moving from partition ``P`` to the thinner ``P_thin``.

    Raises ``ValueError`` if ``P_thin`` is not thinner than ``P`` or if a
    clustering splits a subset of ``P``.
    """
    _check_nested(P, P_thin, "P_thin is not thinner than P")
    for g in (G, G_prime):
        _check_nested(g, P, "G is not a clustering of P")
    coarse = partition_clustering_error(X, P, G) - partition_clustering_error(X, P, G_prime)
    thin = partition_clustering_error(X, P_thin, G) - partition_clustering_error(X, P_thin, G_prime)
    return abs(coarse - thin)


@dataclass
class StepData:
    """What the monotone-descent condition needs for one RPKM step ``i``.

    ``partition``, ``G_prev`` and ``G_cur`` are point labels for the
    level-``i`` cells, the clustering that produced ``C_prev`` and the
    clustering that produced ``C_cur``.
    """

    X: np.ndarray
    partition: np.ndarray
    G_prev: np.ndarray
    G_cur: np.ndarray
    C_prev: np.ndarray
    C_cur: np.ndarray
    level: int = 0


@dataclass
class DescentCheck:
    holds: bool
    xi: float
    lhs: float
    rhs: float
    descent: bool
    consistent: bool
    level: int = 0


def descent_condition_check(step: StepData, rel_slack=1e-9) -> DescentCheck:
    """Evaluate the descent condition and its equivalence with ``E(C_i) <= E(C_{i-1})``.

    ``holds`` is ``lhs <= rhs``; ``descent`` is ``E(C_cur) <= E(C_prev)``;
    both comparisons allow ``rel_slack`` relative to the error scale.
    ``consistent`` is whether the two agree.
    """
    X = as_points(step.X)
    singletons = np.arange(len(X))
    e_g_prev = partition_clustering_error(X, singletons, step.G_prev)
    e_g_cur = partition_clustering_error(X, singletons, step.G_cur)
    e_c_prev = full_error(X, step.C_prev)
    e_c_cur = full_error(X, step.C_cur)
    xi = (partition_clustering_error(X, step.partition, step.G_prev)
          - partition_clustering_error(X, step.partition, step.G_cur))
    lhs = e_g_prev - e_c_prev
    rhs = xi + (e_g_cur - e_c_cur)
    slack = rel_slack * max(1.0, e_g_prev, e_c_prev)
    holds = lhs <= rhs + slack
    descent = e_c_cur <= e_c_prev + slack
    return DescentCheck(holds, xi, lhs, rhs, descent, holds == descent, step.level)


def descent_steps(X, result) -> list:
    """Build :class:`StepData` for every RPKM step that has a predecessor."""
    seq = result.partition
    X = as_points(X)
    out = []
    for prev, cur in zip(result.steps, result.steps[1:]):
        cells_prev = seq.point_labels(prev.level)
        cells_cur = seq.point_labels(cur.level)
        out.append(StepData(
            X=X,
            partition=cells_cur,
            G_prev=prev.wl.labels_prev[cells_prev],
            G_cur=cur.wl.labels_prev[cells_cur],
            C_prev=prev.centroids,
            C_cur=cur.centroids,
            level=cur.level,
        ))
    return out


def clustering_key(labels) -> tuple:
    """Canonical partition identity: labels renumbered by first occurrence."""
    labels = np.asarray(labels)
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return tuple(int(v) for v in rank[inv.ravel()])


@dataclass
class WLHistory:
    """Per RPKM step, the keys of ``G_0, ..., G_{l-1}`` in generation order."""

    keys: list = field(default_factory=list)
    l: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.keys) != len(self.l):
            raise ValueError("one key list per step is required")
        for ks, li in zip(self.keys, self.l):
            if len(ks) != li:
                raise ValueError("key list length must equal the step's WL iteration count")

    @classmethod
    def from_result(cls, result) -> WLHistory:
        """Keys are computed over the finest-level cells, shared by all steps."""
        seq = result.partition
        keys, ls = [], []
        for step in result.steps:
            if step.wl.history is None:
                raise ValueError("run rpkm with keep_history=True")
            fine = seq[step.level].fine_map
            keys.append([clustering_key(g[fine]) for g in step.wl.history[:step.wl_iters]])
            ls.append(step.wl_iters)
        return cls(keys, ls)


@dataclass
class RepeatFinding:
    step: int
    r: int
    prev_step: int
    s: int
    verdict: str

    def __str__(self):
        return (f"step {self.step} r={self.r} repeats step {self.prev_step} s={self.s}: "
                f"{self.verdict}")


def detect_clustering_repeats(history: WLHistory) -> list:
    """Find repeated clusterings and classify them.

    A clustering of step ``i`` equal to one of an earlier step ``j`` is
    allowed only when every step ``j+1..i`` ran a single WL iteration and
    the earlier clustering was the last one of step ``j``. Within a step only
    a consecutive repeat (a fixed point) is allowed. Steps are 0-based
    positions in ``history``.
    """
    findings = []
    seen = {}
    for i, keys in enumerate(history.keys):
        local = {}
        for r, key in enumerate(keys):
            if key in local:
                fixed = r > 0 and keys[r - 1] == key
                findings.append(RepeatFinding(i, r, i, local[key],
                                              "allowed" if fixed else "VIOLATION"))
            local[key] = r
            for j, s in seen.get(key, ()):
                ok = (all(lv == 1 for lv in history.l[j + 1:i + 1])
                      and s == history.l[j] - 1)
                findings.append(RepeatFinding(i, r, j, s, "allowed" if ok else "VIOLATION"))
        for r, key in enumerate(keys):
            seen.setdefault(key, []).append((i, r))
    return findings


def violations(findings) -> list:
    return [f for f in findings if f.verdict == "VIOLATION"]


@lru_cache(maxsize=None)
def _stirling_row(n: int, K: int) -> tuple:
    row = [1] + [0] * K  # S(0, k)
    for m in range(1, n + 1):
        new = [0] * (K + 1)
        for k in range(1, min(m, K) + 1):
            new[k] = k * row[k] + row[k - 1]
        row = new
    return tuple(row)


def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind, exact."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be non-negative")
    if k > n:
        return 0
    return _stirling_row(n, k)[k]


def wl_iteration_bound(partition_sizes, l_history, K: int) -> int:
    """Upper bound on the WL iterations of the step following ``l_history``.

    ``partition_sizes[i]`` is the size of the partition used at step ``i``
    and the bound is for step ``i = len(l_history)``.
    """
    i = len(l_history)
    if len(partition_sizes) <= i:
        raise ValueError("need the partition size of the step being bounded")
    return stirling2(int(partition_sizes[i]), K) - sum(int(lj) - 1 for lj in l_history)


def check_iteration_bounds(partition_sizes, ls, K: int) -> list:
    """Steps whose observed iteration count exceeds the bound, or whose bound is not positive."""
    bad = []
    for i, li in enumerate(ls):
        bound = wl_iteration_bound(partition_sizes, ls[:i], K)
        if bound <= 0 or li > bound:
            bad.append((i, int(li), bound))
    return bad
