"""Recursive partition based K-means over nested grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DistanceCounter, as_points, full_error, std_error
from .grid import PartitionSequence, build_sequence
from .lloyd import WLParams, WLResult, weighted_lloyd


class InfeasibleError(ValueError):
    """No partition level has at least K representatives."""


@dataclass(frozen=True)
class RPKMParams:
    m: int
    K: int
    displacement_threshold: float = 0.0
    wl_params: WLParams = field(default_factory=WLParams)
    rng_seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.displacement_threshold < 0:
            raise ValueError("displacement_threshold must be >= 0")


@dataclass
class StepRecord:
    level: int
    cells: int
    wl_iters: int
    dist_evals: int
    cum_dist_evals: int
    centroid_error: float
    delta: float
    centroids: np.ndarray = field(repr=False)
    wl: WLResult = field(repr=False)
    full_error: float | None = None
    std_error: float | None = None


@dataclass
class RPKMResult:
    centroids: np.ndarray
    steps: list
    start_level: int
    initial_centroids: np.ndarray = field(repr=False)
    partition: PartitionSequence = field(repr=False)
    eval_dist_evals: int = 0

    @property
    def total_dist_evals(self) -> int:
        return self.steps[-1].cum_dist_evals

    def step(self, level: int) -> StepRecord:
        for s in self.steps:
            if s.level == level:
                return s
        raise KeyError(f"no step executed at level {level}")


def forgy_init(means, K: int, rng) -> np.ndarray:
    """``K`` distinct representatives drawn uniformly without replacement."""
    means = as_points(means, "means")
    if len(means) < K:
        raise ValueError(f"need at least K={K} representatives, got {len(means)}")
    rng = np.random.default_rng(rng)
    return means[rng.choice(len(means), size=K, replace=False)].copy()


def displacement(C_prev, C_cur) -> float:
    """Largest squared movement of any centroid, matched by index."""
    C_prev = np.asarray(C_prev, dtype=np.float64)
    C_cur = np.asarray(C_cur, dtype=np.float64)
    if C_prev.shape != C_cur.shape:
        raise ValueError(f"shape mismatch: {C_prev.shape} vs {C_cur.shape}")
    diff = C_cur - C_prev
    return float(np.einsum("kd,kd->k", diff, diff).max())


def rpkm(X, params: RPKMParams, *, evaluate=False, keep_history=False) -> RPKMResult:
    """Run RPKM on dataset ``X``.

    Levels with fewer than ``K`` cells are skipped. The first usable level
    is seeded with a Forgy draw of its representatives; every later level
    starts from the previous level's centroids. Execution stops after level
    ``m``, or earlier when the displacement between consecutive centroid
    sets falls below ``displacement_threshold`` (if positive).

    With ``evaluate=True`` each step also records the full-data error and
    std.error of its centroids; that work goes to a separate evaluation
    counter reported as ``eval_dist_evals``.
    """
    X = as_points(X, "dataset")
    K = params.K
    if len(X) < K:
        raise ValueError(f"n={len(X)} is smaller than K={K}")
    seq = build_sequence(X, params.m)
    usable = [lv for lv in seq.levels if len(lv) >= K]
    if not usable:
        raise InfeasibleError(
            f"no level up to m={params.m} has K={K} cells (sizes {seq.sizes})"
        )
    rng = np.random.default_rng(params.rng_seed)
    counter = DistanceCounter()
    eval_counter = DistanceCounter()

    C0 = forgy_init(usable[0].means, K, rng)
    C = C0
    steps = []
    for lv in usable:
        before = counter.count
        wl = weighted_lloyd(lv.means, lv.weights, K, C, params.wl_params, counter,
                            keep_history=keep_history)
        delta = displacement(C, wl.centroids)
        step = StepRecord(
            level=lv.level,
            cells=len(lv),
            wl_iters=wl.iterations,
            dist_evals=counter.count - before,
            cum_dist_evals=counter.count,
            centroid_error=wl.centroid_error,
            delta=delta,
            centroids=wl.centroids,
            wl=wl,
        )
        if evaluate:
            step.full_error = full_error(X, wl.centroids, eval_counter)
            step.std_error = std_error(X, wl.centroids, params.wl_params, eval_counter)
        steps.append(step)
        C = wl.centroids
        if params.displacement_threshold > 0 and delta < params.displacement_threshold:
            break
    return RPKMResult(C, steps, usable[0].level, C0, seq, eval_counter.count)
