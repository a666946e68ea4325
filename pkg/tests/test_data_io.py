import io
import json

import numpy as np
import pytest

from rpkmeans.data_io import (
    CSV_HEADER,
    RECORD_FIELDS,
    STEP_FIELDS,
    CSVFormat,
    CSVParseError,
    InfeasibleSpecError,
    MixtureSpec,
    RunRecord,
    StepEntry,
    SubsampleSpec,
    dumps_record,
    generate_mixture,
    load_csv,
    overlap_estimate,
    read_run_records,
    records_to_csv_string,
    sniff_csv,
    write_csv,
    write_run_record,
)


class TestMixture:
    def test_deterministic(self):
        a = generate_mixture(MixtureSpec(500, 3, 4, seed=1))
        b = generate_mixture(MixtureSpec(500, 3, 4, seed=1))
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_seed_matters(self):
        a, _, _ = generate_mixture(MixtureSpec(50, 2, 2, seed=1))
        b, _, _ = generate_mixture(MixtureSpec(50, 2, 2, seed=2))
        assert not np.array_equal(a, b)

    @pytest.mark.parametrize("seed", range(5))
    def test_single_component_mean(self, seed):
        n = 10_000
        X, labels, means = generate_mixture(MixtureSpec(n, 2, 1, seed=seed))
        assert set(labels.tolist()) == {0}
        assert np.all(np.abs(X.mean(axis=0) - means[0]) <= 4 / np.sqrt(n))

    @pytest.mark.parametrize("d, K", [(2, 3), (2, 9), (4, 9), (8, 3)])
    def test_separation_and_overlap(self, d, K):
        for seed in range(5):
            _, _, means = generate_mixture(MixtureSpec(K, d, K, seed=seed))
            dist = np.linalg.norm(means[:, None] - means[None], axis=2)
            assert dist[np.triu_indices(K, 1)].min() >= 4.0
            assert overlap_estimate(means, 1.0, 100_000, seed) < 0.05

    def test_overlap_sanity(self):
        # two means 2 sigma apart in 1-D: error is Phi(-1) ~ 0.1587
        assert overlap_estimate([[0.0], [2.0]], 1.0, 200_000) == pytest.approx(0.1587, abs=0.005)

    def test_infeasible(self):
        with pytest.raises(InfeasibleSpecError):
            generate_mixture(MixtureSpec(100, 1, 50, seed=0, box_side=10.0))

    @pytest.mark.parametrize("kw", [dict(n=2, d=2, K_components=3, seed=0),
                                    dict(n=5, d=0, K_components=1, seed=0),
                                    dict(n=5, d=1, K_components=1, seed=0, sigma=-1.0)])
    def test_bad_spec(self, kw):
        with pytest.raises(ValueError):
            MixtureSpec(**kw)


@pytest.fixture
def matrix():
    return np.arange(40, dtype=float).reshape(10, 4) * 0.5 - 3


class TestCSV:
    def test_header_comma(self, tmp_path, matrix):
        p = tmp_path / "a.csv"
        write_csv(p, matrix)
        assert sniff_csv(p) == CSVFormat(",", True)
        assert np.array_equal(load_csv(SubsampleSpec(str(p))), matrix)

    def test_whitespace_no_header(self, tmp_path, matrix):
        p = tmp_path / "a.txt"
        p.write_text("\n".join(" ".join(repr(float(v)) for v in row) for row in matrix) + "\n")
        fmt = sniff_csv(p)
        assert fmt.delimiter is None and not fmt.header and fmt.name == "whitespace"
        assert np.array_equal(load_csv(SubsampleSpec(str(p))), matrix)

    def test_subsample_deterministic_and_sorted(self, tmp_path, matrix):
        p = tmp_path / "a.csv"
        write_csv(p, matrix)
        a = load_csv(SubsampleSpec(str(p), 2, 5, seed=3))
        b = load_csv(SubsampleSpec(str(p), 2, 5, seed=3))
        assert a.shape == (5, 2) and np.array_equal(a, b)
        # rows and columns keep file order: values increase along both axes
        assert np.all(np.diff(a, axis=0) > 0) and np.all(np.diff(a, axis=1) > 0)

    def test_column_means_match_file(self, tmp_path):
        rng = np.random.default_rng(0)
        M = rng.normal(size=(200, 3))
        p = tmp_path / "a.csv"
        write_csv(p, M)
        X = load_csv(SubsampleSpec(str(p), 3, 200, seed=9))
        assert np.allclose(X.mean(axis=0), M.mean(axis=0), rtol=1e-12, atol=1e-12)

    def test_parse_error_location(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b\n1,2\n3,oops\n")
        with pytest.raises(CSVParseError) as exc:
            load_csv(SubsampleSpec(str(p)))
        assert (exc.value.row, exc.value.column, exc.value.value) == (3, 2, "oops")

    def test_ragged_row(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("1,2\n3,4,5\n")
        with pytest.raises(CSVParseError) as exc:
            load_csv(SubsampleSpec(str(p)))
        assert exc.value.row == 2

    def test_non_finite(self, tmp_path):
        p = tmp_path / "nan.csv"
        p.write_text("1,2\n3,nan\n")
        with pytest.raises(CSVParseError):
            load_csv(SubsampleSpec(str(p)))

    @pytest.mark.parametrize("d, n", [(5, None), (None, 11), (0, None)])
    def test_too_few(self, tmp_path, matrix, d, n):
        p = tmp_path / "a.csv"
        write_csv(p, matrix)
        with pytest.raises(ValueError):
            load_csv(SubsampleSpec(str(p), d, n))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(SubsampleSpec(str(tmp_path / "nope.csv")))

    def test_labels_column(self, tmp_path, matrix):
        p = tmp_path / "a.csv"
        write_csv(p, matrix, np.arange(10))
        assert p.read_text().splitlines()[0] == "x0,x1,x2,x3,label"


def make_record(**kw):
    step = StepEntry(1, 4, 2, 36, 36, 1.5, 2.0, -0.01, 0.3)
    base = dict(algorithm="rpkm", params={"m": 3}, seed=7, n=100, d=2, K=3,
                per_step=[step], total_dist_evals=36, eval_dist_evals=900,
                final_error=2.0, std_error=-0.01)
    base.update(kw)
    return RunRecord(**base)


class TestRecords:
    def test_round_trip(self):
        rec = make_record()
        assert RunRecord.from_dict(json.loads(dumps_record(rec))) == rec

    def test_two_lines(self, tmp_path):
        p = tmp_path / "r.jsonl"
        write_run_record(make_record(), p)
        write_run_record(make_record(seed=8), p)
        lines = p.read_text().splitlines()
        assert len(lines) == 2
        assert [r.seed for r in read_run_records(p)] == [7, 8]

    def test_stream_sink(self):
        buf = io.StringIO()
        write_run_record(make_record(), buf)
        assert read_run_records(io.StringIO(buf.getvalue()))[0] == make_record()

    def test_field_sets(self):
        obj = json.loads(dumps_record(make_record()))
        assert tuple(obj) == RECORD_FIELDS
        assert tuple(obj["per_step"][0]) == STEP_FIELDS
        for name in ("algorithm", "params", "seed", "n", "d", "K", "per_step",
                     "total_dist_evals", "final_error", "wall_time_ms"):
            assert name in obj

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            dumps_record(make_record(final_error=float("nan")))

    def test_unknown_field(self):
        with pytest.raises(ValueError):
            RunRecord.from_dict(dict(make_record().to_dict(), bogus=1))

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            write_run_record(make_record(), tmp_path / "missing" / "r.jsonl")

    def test_csv_export(self):
        mb = make_record(algorithm="mb", params={"batch_size": 10}, per_step=[])
        lines = records_to_csv_string([make_record(), mb]).splitlines()
        assert lines[0].split(",") == list(CSV_HEADER)
        assert len(lines) == 3
        assert lines[2].startswith("mb,7,100,2,3,10,")
