"""Datasets in and run records out.

Synthetic data are isotropic Gaussian mixtures whose component means are
kept at least ``min_separation_sigmas * sigma`` apart. Real data come from
numeric CSV files, subsampled by rows and columns. Run records are written
as JSON Lines with a fixed field order.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

MAX_MEAN_ATTEMPTS = 10_000


@dataclass(frozen=True)
class MixtureSpec:
    n: int
    d: int
    K_components: int
    seed: int
    sigma: float = 1.0
    min_separation_sigmas: float = 4.0
    box_side: float | None = None

    def __post_init__(self):
        if not self.n >= self.K_components >= 1:
            raise ValueError("need n >= K_components >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    @property
    def side(self) -> float:
        return 20.0 * self.sigma if self.box_side is None else self.box_side


class InfeasibleSpecError(ValueError):
    pass


def sample_means(spec: MixtureSpec, rng) -> np.ndarray:
    """Component means uniform in ``[0, side]^d``, pairwise separated.

    Means are drawn one at a time; a candidate too close to an accepted
    mean is rejected and redrawn.
    """
    min_dist = spec.min_separation_sigmas * spec.sigma
    means = []
    attempts = 0
    while len(means) < spec.K_components:
        if attempts >= MAX_MEAN_ATTEMPTS:
            raise InfeasibleSpecError(
                f"could not place {spec.K_components} means {min_dist} apart "
                f"in a box of side {spec.side} after {attempts} attempts"
            )
        attempts += 1
        cand = rng.uniform(0.0, spec.side, size=spec.d)
        if all(np.linalg.norm(cand - m) >= min_dist for m in means):
            means.append(cand)
    return np.array(means)


def generate_mixture(spec: MixtureSpec):
    """Draw ``spec.n`` points from an equal-weight isotropic Gaussian mixture.

    Returns
    -------
    X : ndarray of shape (n, d)
    labels : ndarray of shape (n,)
        Generating component of each point.
    means : ndarray of shape (K_components, d)
    """
    rng = np.random.default_rng(spec.seed)
    means = sample_means(spec, rng)
    labels = rng.integers(spec.K_components, size=spec.n)
    X = means[labels] + spec.sigma * rng.standard_normal((spec.n, spec.d))
    return X, labels, means


def overlap_estimate(means, sigma: float, n_samples: int = 100_000, seed=0) -> float:
    """Monte-Carlo Bayes misclassification rate of an equal-weight isotropic mixture.

    With equal weights and a shared isotropic covariance the Bayes rule is
    the nearest mean, so the estimate is the fraction of mixture samples
    whose nearest mean is not their generating one.
    """
    means = np.atleast_2d(np.asarray(means, dtype=np.float64))
    rng = np.random.default_rng(seed)
    comp = rng.integers(len(means), size=n_samples)
    pts = means[comp] + sigma * rng.standard_normal((n_samples, means.shape[1]))
    d2 = ((pts[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    return float(np.mean(d2.argmin(axis=1) != comp))


@dataclass(frozen=True)
class SubsampleSpec:
    path: str
    d_select: int | None = None
    n_select: int | None = None
    seed: int = 0


@dataclass(frozen=True)
class CSVFormat:
    delimiter: str | None  # None means runs of whitespace
    header: bool

    @property
    def name(self) -> str:
        return "whitespace" if self.delimiter is None else self.delimiter


class CSVParseError(ValueError):
    def __init__(self, path, row, column, value):
        self.path, self.row, self.column, self.value = path, row, column, value
        super().__init__(f"{path}: row {row}, column {column}: cannot parse {value!r}")


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _split(line: str, delimiter):
    if delimiter is None:
        return line.split()
    return [t.strip() for t in next(csv.reader([line], delimiter=delimiter))]


def sniff_csv(path) -> CSVFormat:
    """Comma-delimited if the first line has a comma, else whitespace; header
    if any field of the first line is not a number."""
    with open(path) as fh:
        first = ""
        for first in fh:
            if first.strip():
                break
    delimiter = "," if "," in first else None
    header = not all(_is_number(t) for t in _split(first, delimiter))
    return CSVFormat(delimiter, header)


def _read_matrix(path, fmt: CSVFormat) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=fmt.delimiter, skiprows=int(fmt.header),
                          dtype=np.float64, ndmin=2)
    except ValueError:
        pass
    # Slow pass, only to locate the offending cell.
    with open(path) as fh:
        rows = [ln for ln in fh if ln.strip()]
    width = None
    for r, line in enumerate(rows[int(fmt.header):], start=1 + int(fmt.header)):
        toks = _split(line, fmt.delimiter)
        if width is None:
            width = len(toks)
        if len(toks) != width:
            raise CSVParseError(path, r, len(toks), f"{len(toks)} fields, expected {width}")
        for c, tok in enumerate(toks, start=1):
            if not _is_number(tok):
                raise CSVParseError(path, r, c, tok)
    raise ValueError(f"{path}: could not parse file")


def load_csv(spec: SubsampleSpec, fmt: CSVFormat | None = None) -> np.ndarray:
    """Load a numeric CSV and draw a random subsample of rows and columns.

    Columns and rows are chosen uniformly without replacement (columns
    first, then rows) and kept in file order. ``None`` selects everything.
    """
    if not os.path.exists(spec.path):
        raise FileNotFoundError(spec.path)
    fmt = fmt or sniff_csv(spec.path)
    data = _read_matrix(spec.path, fmt)
    n_rows, n_cols = data.shape
    d = n_cols if spec.d_select is None else spec.d_select
    n = n_rows if spec.n_select is None else spec.n_select
    if not 1 <= d <= n_cols:
        raise ValueError(f"d_select={d} but the file has {n_cols} columns")
    if not 1 <= n <= n_rows:
        raise ValueError(f"n_select={n} but the file has {n_rows} rows")
    rng = np.random.default_rng(spec.seed)
    cols = np.sort(rng.choice(n_cols, size=d, replace=False))
    rows = np.sort(rng.choice(n_rows, size=n, replace=False))
    X = np.ascontiguousarray(data[np.ix_(rows, cols)])
    bad = np.argwhere(~np.isfinite(X))
    if len(bad):
        r, c = bad[0]
        raise CSVParseError(spec.path, int(rows[r]) + 1 + int(fmt.header), int(cols[c]) + 1,
                            str(X[r, c]))
    return X


def write_csv(path, X, labels=None) -> None:
    X = np.asarray(X)
    cols = [f"x{j}" for j in range(X.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols + (["label"] if labels is not None else []))
        for i, row in enumerate(X):
            out = [repr(float(v)) for v in row]
            if labels is not None:
                out.append(int(labels[i]))
            w.writerow(out)


# --- run records ---------------------------------------------------------

STEP_FIELDS = ("level", "cells", "wl_iters", "dist_evals", "cum_dist_evals",
               "centroid_error", "full_error", "std_error", "delta")


@dataclass
class StepEntry:
    level: int
    cells: int
    wl_iters: int
    dist_evals: int
    cum_dist_evals: int
    centroid_error: float
    full_error: float | None
    std_error: float | None
    delta: float


@dataclass
class RunRecord:
    algorithm: str
    params: dict
    seed: int
    n: int
    d: int
    K: int
    per_step: list = field(default_factory=list)
    total_dist_evals: int = 0
    eval_dist_evals: int = 0
    final_error: float | None = None
    std_error: float | None = None
    wall_time_ms: float | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> RunRecord:
        names = [f.name for f in fields(cls)]
        unknown = set(obj) - set(names)
        if unknown:
            raise ValueError(f"unknown record fields: {sorted(unknown)}")
        kw = dict(obj)
        kw["per_step"] = [StepEntry(**s) for s in obj.get("per_step", [])]
        return cls(**kw)


RECORD_FIELDS = tuple(f.name for f in fields(RunRecord))


def dumps_record(record: RunRecord) -> str:
    return json.dumps(record.to_dict(), allow_nan=False, separators=(",", ":"))


def write_run_record(record: RunRecord, sink) -> None:
    """Append one record as a JSON line to a path or an open text stream."""
    line = dumps_record(record) + "\n"
    if isinstance(sink, (str, os.PathLike)):
        try:
            with open(sink, "a") as fh:
                fh.write(line)
        except OSError as exc:
            raise OSError(f"cannot write run record to {os.fspath(sink)}: {exc}") from exc
    else:
        sink.write(line)


def read_run_records(source) -> list:
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            text = fh.read()
    else:
        text = source.read()
    return [RunRecord.from_dict(json.loads(ln)) for ln in text.splitlines() if ln.strip()]


CSV_HEADER = ("algorithm", "seed", "n", "d", "K", "batch_size", "step", "cells", "wl_iters",
              "dist_evals", "centroid_error", "full_error", "std_error", "delta", "error")


def records_to_csv(records, sink) -> None:
    """Flat CSV export: one row per RPKM step, one row per other run.

    ``dist_evals`` is cumulative up to the step for RPKM rows and the run
    total otherwise.
    """
    w = csv.writer(sink)
    w.writerow(CSV_HEADER)
    for row in flatten_records(records):
        w.writerow(["" if row[h] is None else row[h] for h in CSV_HEADER])


def flatten_records(records) -> list:
    rows = []
    for rec in records:
        base = dict(algorithm=rec.algorithm, seed=rec.seed, n=rec.n, d=rec.d, K=rec.K,
                    batch_size=rec.params.get("batch_size"), error=rec.error)
        if rec.per_step:
            for s in rec.per_step:
                rows.append(dict(base, step=s.level, cells=s.cells, wl_iters=s.wl_iters,
                                 dist_evals=s.cum_dist_evals, centroid_error=s.centroid_error,
                                 full_error=s.full_error, std_error=s.std_error,
                                 delta=s.delta))
        else:
            rows.append(dict(base, step=None, cells=None, wl_iters=None,
                             dist_evals=rec.total_dist_evals, centroid_error=None,
                             full_error=rec.final_error, std_error=rec.std_error,
                             delta=None))
    return rows


def records_to_csv_string(records) -> str:
    buf = io.StringIO()
    records_to_csv(records, buf)
    return buf.getvalue()


def jsonable(obj: Any):
    """Convert numpy scalars and arrays inside ``obj`` to plain Python."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
