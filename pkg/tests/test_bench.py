import io
import warnings

import numpy as np
import pytest

from rpkmeans.bench import ExperimentConfig, derive_seed, run_experiment, summarize, summary_to_csv
from rpkmeans.data_io import RunRecord, StepEntry, dumps_record, write_csv


def small_config(**kw):
    base = dict(algorithms=("rpkm", "kmpp", "mb"), n_list=(300,), d_list=(2,), K_list=(3,),
                m=4, b_list=(20, 50), num_batches=10, replicates=2, seed=11)
    base.update(kw)
    return ExperimentConfig(**base)


def test_record_count():
    cfg = small_config(n_list=(200, 300), K_list=(2, 3))
    recs = run_experiment(cfg)
    # mb expands per batch size: 1 + 1 + 2 algorithms
    assert len(recs) == 4 * 2 * 1 * 2 * 2
    assert all(r.error is None for r in recs)


def test_byte_identical():
    a = [dumps_record(r) for r in run_experiment(small_config())]
    b = [dumps_record(r) for r in run_experiment(small_config())]
    assert a == b


def test_seeds_independent_of_algorithm_list():
    # data depends only on (seed, setting, replicate)
    a = run_experiment(small_config(algorithms=("rpkm",)))
    b = run_experiment(small_config(algorithms=("rpkm", "kmpp")))
    assert [r.seed for r in a] == [r.seed for r in b if r.algorithm == "rpkm"]


def test_derive_seed_varies():
    seeds = {derive_seed(0, 0, 0, 0, rep, slot) for rep in range(5) for slot in range(3)}
    assert len(seeds) == 15
    assert derive_seed(3, 1, 2) == derive_seed(3, 1, 2)


def test_rpkm_record_steps():
    rec = run_experiment(small_config(algorithms=("rpkm",), replicates=1, evaluation=True))[0]
    assert [s.level for s in rec.per_step] == [1, 2, 3, 4][-len(rec.per_step):]
    assert rec.total_dist_evals == rec.per_step[-1].cum_dist_evals
    assert all(s.std_error <= 1e-12 for s in rec.per_step)
    assert rec.eval_dist_evals > 0


def test_kmpp_counts():
    rec = run_experiment(small_config(algorithms=("kmpp",), replicates=1))[0]
    it = rec.params["lloyd_iters"]
    assert rec.total_dist_evals >= 300 * 2 + (1 + it) * 300 * 3


def test_mb_counts():
    for rec in run_experiment(small_config(algorithms=("mb",), replicates=1)):
        b = rec.params["batch_size"]
        init = rec.params["init_size"]
        assert rec.total_dist_evals == init * 2 + 10 * b * 3


def test_timing_off_by_default():
    assert all(r.wall_time_ms is None for r in run_experiment(small_config(replicates=1)))
    assert all(r.wall_time_ms >= 0 for r in run_experiment(small_config(replicates=1, timing=True)))


def test_failed_run_recorded(tmp_path):
    p = tmp_path / "tiny.csv"
    write_csv(p, np.arange(12.0).reshape(6, 2))
    cfg = small_config(algorithms=("kmpp",), n_list=(10,), replicates=1, csv_path=str(p))
    [rec] = run_experiment(cfg)
    assert rec.error is not None and "n_select" in rec.error


def test_csv_source(tmp_path):
    rng = np.random.default_rng(0)
    p = tmp_path / "d.csv"
    write_csv(p, rng.normal(size=(400, 5)))
    recs = run_experiment(small_config(algorithms=("rpkm",), d_list=(3,), csv_path=str(p)))
    assert all(r.d == 3 and r.error is None for r in recs)
    assert recs[0].params["data"]["source"] == "csv"


@pytest.mark.parametrize("kw", [dict(algorithms=("bogus",)), dict(n_list=()),
                                dict(replicates=0), dict(m=0)])
def test_bad_config(kw):
    with pytest.raises(ValueError):
        small_config(**kw)


def _rec(alg, ev, rho, steps=None, error=None, b=None):
    params = {} if b is None else {"batch_size": b}
    return RunRecord(alg, params, 0, 100, 2, 3, per_step=steps or [], total_dist_evals=ev,
                     final_error=1.0, std_error=rho, error=error)


class TestSummarize:
    def test_single_record(self):
        [row] = summarize([_rec("kmpp", 500, -0.1)])
        assert row["dist_evals_q1"] == row["dist_evals_median"] == row["dist_evals_q3"] == 500

    def test_grouped_medians(self):
        recs = [_rec("kmpp", v, -0.1) for v in (100, 200, 300)] + [_rec("mb", 50, -0.2, b=10)]
        table = summarize(recs, ("algorithm",))
        assert [r["algorithm"] for r in table] == ["kmpp", "mb"]
        assert table[0]["dist_evals_median"] == 200 and table[0]["runs"] == 3

    def test_steps_expand(self):
        steps = [StepEntry(i, 4 ** i, 2, 10, 10 * i, 1.0, 1.0, -0.1 / i, 0.0) for i in (1, 2, 3)]
        table = summarize([_rec("rpkm", 30, -0.03, steps)], ("algorithm", "step"))
        assert [r["step"] for r in table] == [1, 2, 3]
        rho = [r["std_error_median"] for r in table]
        assert rho == sorted(rho)

    def test_errored_group_omitted(self):
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            table = summarize([_rec("kmpp", 1, None, error="boom"), _rec("mb", 2, -0.1, b=5)],
                              ("algorithm",))
        assert [r["algorithm"] for r in table] == ["mb"]
        assert any("no successful runs" in str(x.message) for x in w)

    def test_bad_group(self):
        with pytest.raises(ValueError):
            summarize([], ("nope",))

    def test_csv(self):
        buf = io.StringIO()
        summary_to_csv(summarize([_rec("kmpp", 1, -0.1)], ("algorithm",)), buf)
        assert buf.getvalue().splitlines()[0].startswith("algorithm,runs,dist_evals_q1")

    def test_rho_shrinks_with_depth_on_mixture(self):
        recs = run_experiment(small_config(algorithms=("rpkm",), n_list=(3000,), m=6,
                                           replicates=5, evaluation=True))
        table = summarize(recs, ("step",))
        rho = {r["step"]: abs(r["std_error_median"]) for r in table}
        assert rho[6] <= rho[min(rho)]
