"""Experiment sweeps over (n, d, K, algorithm) and their summaries."""

from __future__ import annotations

import csv
import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import MBParams, kmeanspp_init, lloyd, minibatch_kmeans
from .core import DistanceCounter, full_error, std_error
from .data_io import (
    MixtureSpec,
    RunRecord,
    StepEntry,
    SubsampleSpec,
    flatten_records,
    generate_mixture,
    load_csv,
    sniff_csv,
)
from .lloyd import WLParams
from .rpkm import RPKMParams, rpkm

log = logging.getLogger(__name__)

ALGORITHMS = ("rpkm", "kmpp", "mb")


@dataclass
class ExperimentConfig:
    algorithms: tuple = ("rpkm", "kmpp")
    n_list: tuple = (1000,)
    d_list: tuple = (2,)
    K_list: tuple = (3,)
    m: int = 6
    b_list: tuple = (100, 500, 1000)
    num_batches: int = 100
    replicates: int = 10
    seed: int = 0
    output: str | None = None
    evaluation: bool = False
    displacement_threshold: float = 0.0
    wl_params: WLParams = field(default_factory=WLParams)
    sigma: float = 1.0
    min_separation_sigmas: float = 4.0
    csv_path: str | None = None
    timing: bool = False
    jobs: int = 1

    def __post_init__(self):
        self.algorithms = tuple(self.algorithms)
        bad = set(self.algorithms) - set(ALGORITHMS)
        if bad:
            raise ValueError(f"unknown algorithm(s): {sorted(bad)}")
        for name in ("algorithms", "n_list", "d_list", "K_list"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if "mb" in self.algorithms and not self.b_list:
            raise ValueError("b_list must be nonempty when running mb")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")


def derive_seed(base: int, *indices: int) -> int:
    """Seed that depends only on the base seed and the given indices."""
    ss = np.random.SeedSequence(int(base), spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, np.uint32)[0])


def _data_params(cfg, data_seed, n, d, K):
    if cfg.csv_path is not None:
        fmt = sniff_csv(cfg.csv_path)
        X = load_csv(SubsampleSpec(cfg.csv_path, d, n, data_seed), fmt)
        info = {"source": "csv", "path": cfg.csv_path, "delimiter": fmt.name,
                "header": fmt.header}
        return X, info
    spec = MixtureSpec(n, d, K, data_seed, cfg.sigma, cfg.min_separation_sigmas)
    X, _, _ = generate_mixture(spec)
    info = {"source": "mixture", "sigma": spec.sigma,
            "min_separation_sigmas": spec.min_separation_sigmas, "box_side": spec.side,
            "mixing_weights": "uniform"}
    return X, info


def _steps(result):
    return [
        StepEntry(s.level, s.cells, s.wl_iters, s.dist_evals, s.cum_dist_evals,
                  s.centroid_error, s.full_error, s.std_error, s.delta)
        for s in result.steps
    ]


def _run_one(cfg, alg, X, K, seed, extra):
    wl = cfg.wl_params
    params = {"rel_tolerance": wl.rel_tolerance, "max_iterations": wl.max_iterations,
              "algorithm_seed": seed, **extra}
    rec = RunRecord(alg, params, 0, len(X), X.shape[1], K)
    eval_counter = DistanceCounter()
    if alg == "rpkm":
        rp = RPKMParams(cfg.m, K, cfg.displacement_threshold, wl, seed)
        params.update(m=cfg.m, displacement_threshold=cfg.displacement_threshold)
        res = rpkm(X, rp, evaluate=cfg.evaluation)
        rec.per_step = _steps(res)
        rec.total_dist_evals = res.total_dist_evals
        C = res.centroids
        eval_counter.add(res.eval_dist_evals)
        if cfg.evaluation:
            rec.final_error = res.steps[-1].full_error
            rec.std_error = res.steps[-1].std_error
        else:
            rec.final_error = full_error(X, C, eval_counter)
    elif alg == "kmpp":
        counter = DistanceCounter()
        C0 = kmeanspp_init(X, K, seed, counter)
        res = lloyd(X, C0, wl, counter)
        rec.total_dist_evals = counter.count
        rec.final_error = res.error_trace[-1]
        params["lloyd_iters"] = res.iterations
        C = res.centroids
        if cfg.evaluation:
            rec.std_error = std_error(X, C, wl, eval_counter)
    else:
        b = extra["batch_size"]
        rng = np.random.default_rng(seed)
        counter = DistanceCounter()
        init_size = min(len(X), 3 * b)
        sub = X[np.sort(rng.choice(len(X), size=init_size, replace=False))]
        C0 = kmeanspp_init(sub, K, rng, counter)
        params.update(num_batches=cfg.num_batches, init_size=init_size)
        mb = MBParams(b, cfg.num_batches, int(rng.integers(2**32)))
        C = minibatch_kmeans(X, K, C0, mb, counter)
        rec.total_dist_evals = counter.count
        rec.final_error = full_error(X, C, eval_counter)
        if cfg.evaluation:
            rec.std_error = std_error(X, C, wl, eval_counter)
    rec.eval_dist_evals = eval_counter.count
    return rec


def _expand(cfg):
    out = []
    for a_idx, alg in enumerate(cfg.algorithms):
        if alg == "mb":
            out.extend((a_idx, alg, {"batch_size": int(b)}) for b in cfg.b_list)
        else:
            out.append((a_idx, alg, {}))
    return out


def _run_setting(task):
    cfg, (i_n, i_d, i_K, rep) = task
    n, d, K = cfg.n_list[i_n], cfg.d_list[i_d], cfg.K_list[i_K]
    data_seed = derive_seed(cfg.seed, i_n, i_d, i_K, rep, 0)
    records = []
    try:
        X, info = _data_params(cfg, data_seed, n, d, K)
        data_err = None
    except Exception as exc:  # recorded per run; the sweep continues
        X, info, data_err = None, {}, f"{type(exc).__name__}: {exc}"
    for a_idx, alg, extra in _expand(cfg):
        seed = derive_seed(cfg.seed, i_n, i_d, i_K, rep, 1 + a_idx)
        t0 = time.perf_counter()
        if data_err is not None:
            rec = RunRecord(alg, {"algorithm_seed": seed, **extra}, data_seed, n, d, K,
                            error=data_err)
        else:
            try:
                rec = _run_one(cfg, alg, X, K, seed, extra)
            except Exception as exc:
                log.warning("%s failed on n=%d d=%d K=%d rep=%d: %s", alg, n, d, K, rep, exc)
                rec = RunRecord(alg, {"algorithm_seed": seed, **extra}, data_seed, n, d, K,
                                error=f"{type(exc).__name__}: {exc}")
        rec.seed = data_seed
        rec.params["data"] = info
        rec.params["replicate"] = rep
        if cfg.timing:
            rec.wall_time_ms = (time.perf_counter() - t0) * 1000.0
        records.append(rec)
    return records


def run_experiment(config: ExperimentConfig) -> list:
    """Run every (n, d, K, replicate) setting and every configured algorithm.

    Records come back ordered by setting index, replicate, then algorithm,
    regardless of ``config.jobs``.
    """
    tasks = [
        (config, (i_n, i_d, i_K, rep))
        for i_n in range(len(config.n_list))
        for i_d in range(len(config.d_list))
        for i_K in range(len(config.K_list))
        for rep in range(config.replicates)
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chunks = list(pool.map(_run_setting, tasks))
    else:
        chunks = [_run_setting(t) for t in tasks]
    return [rec for chunk in chunks for rec in chunk]


SUMMARY_KEYS = ("algorithm", "batch_size", "step", "n", "d", "K")
SUMMARY_STATS = ("dist_evals", "std_error", "full_error")


def summarize(records, group_by=("algorithm", "batch_size", "step", "n", "d", "K")) -> list:
    """Median and quartiles of distance counts and errors per group.

    RPKM records contribute one row per step (``step`` = level, distance
    counts cumulative up to that step); other algorithms contribute one
    row with ``step`` empty. Errored runs are dropped, and a group left
    with no rows is omitted with a warning.
    """
    group_by = tuple(group_by)
    bad = set(group_by) - set(SUMMARY_KEYS)
    if bad:
        raise ValueError(f"cannot group by {sorted(bad)}")
    groups = {}
    for row in flatten_records(records):
        key = tuple(row[k] for k in group_by)
        groups.setdefault(key, []).append(row)

    def order(key):
        return tuple((v is None, v if v is not None else 0) if not isinstance(v, str)
                     else (False, v) for v in key)

    table = []
    for key in sorted(groups, key=order):
        rows = [r for r in groups[key] if r["error"] is None]
        if not rows:
            warnings.warn(f"group {dict(zip(group_by, key))} has no successful runs; omitted")
            continue
        out = dict(zip(group_by, key))
        out["runs"] = len(rows)
        for stat in SUMMARY_STATS:
            vals = np.array([r[stat] for r in rows if r[stat] is not None], dtype=np.float64)
            q = np.percentile(vals, [25, 50, 75]) if vals.size else [None] * 3
            out[f"{stat}_q1"], out[f"{stat}_median"], out[f"{stat}_q3"] = (
                None if v is None else float(v) for v in q
            )
        table.append(out)
    return table


def summary_to_csv(table, sink) -> None:
    if not table:
        return
    w = csv.DictWriter(sink, fieldnames=list(table[0]))
    w.writeheader()
    for row in table:
        w.writerow({k: "" if v is None else v for k, v in row.items()})
