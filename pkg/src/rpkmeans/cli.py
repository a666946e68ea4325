"""Command line: ``rpkmeans generate | run | summarize``.

Exit codes: 0 on success, 1 on configuration errors, 2 when some runs of
a sweep failed (their records carry an ``error`` field).
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import bench
from .data_io import (
    InfeasibleSpecError,
    MixtureSpec,
    dumps_record,
    generate_mixture,
    read_run_records,
    write_csv,
)
from .lloyd import WLParams


def _csv_list(cast):
    def parse(text):
        try:
            return tuple(cast(v) for v in text.split(",") if v.strip())
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    return parse


class _Parser(argparse.ArgumentParser):
    # bad flags are configuration errors: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rpkmeans", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a Gaussian-mixture dataset as CSV")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--K", type=int, required=True, help="number of mixture components")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--sigma", type=float, default=1.0)
    g.add_argument("--min-separation", type=float, default=4.0,
                   help="minimum distance between component means, in sigmas")
    g.add_argument("--labels", action="store_true", help="append the component label column")
    g.add_argument("--out", required=True)

    r = sub.add_parser("run", help="run a benchmark sweep and write JSON Lines")
    r.add_argument("--algorithms", type=_csv_list(str), default=("rpkm", "kmpp"),
                   help="comma list from: rpkm,kmpp,mb")
    r.add_argument("--n", dest="n_list", type=_csv_list(int), default=(1000,))
    r.add_argument("--d", dest="d_list", type=_csv_list(int), default=(2,))
    r.add_argument("--K", dest="K_list", type=_csv_list(int), default=(3,))
    r.add_argument("--m", type=int, default=6, help="deepest grid level for RPKM")
    r.add_argument("--b", dest="b_list", type=_csv_list(int), default=(100, 500, 1000),
                   help="minibatch sizes")
    r.add_argument("--batches", type=int, default=100, help="number of minibatches")
    r.add_argument("--replicates", type=int, default=10)
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--evaluate", action="store_true",
                   help="record full-data error and std.error per RPKM step")
    r.add_argument("--threshold", type=float, default=0.0,
                   help="RPKM displacement stopping threshold (0 disables)")
    r.add_argument("--tol", type=float, default=1e-9, help="relative Lloyd tolerance")
    r.add_argument("--max-iter", type=int, default=1000)
    r.add_argument("--sigma", type=float, default=1.0)
    r.add_argument("--min-separation", type=float, default=4.0)
    r.add_argument("--csv", dest="csv_path", help="subsample this CSV instead of generating data")
    r.add_argument("--timing", action="store_true",
                   help="record wall time (output is then no longer reproducible byte for byte)")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out", required=True, help="JSON Lines output path ('-' for stdout)")

    s = sub.add_parser("summarize", help="median/quartile table from run records")
    s.add_argument("records", help="JSON Lines file written by 'run'")
    s.add_argument("--group-by", type=_csv_list(str),
                   default=("algorithm", "batch_size", "step", "n", "d", "K"))
    s.add_argument("--out", default="-", help="CSV output path ('-' for stdout)")
    return p


def _open_out(path):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def _generate(args):
    spec = MixtureSpec(args.n, args.d, args.K, args.seed, args.sigma, args.min_separation)
    X, labels, _ = generate_mixture(spec)
    write_csv(args.out, X, labels if args.labels else None)
    return 0


def _run(args):
    cfg = bench.ExperimentConfig(
        algorithms=args.algorithms, n_list=args.n_list, d_list=args.d_list,
        K_list=args.K_list, m=args.m, b_list=args.b_list, num_batches=args.batches,
        replicates=args.replicates, seed=args.seed, output=args.out,
        evaluation=args.evaluate, displacement_threshold=args.threshold,
        wl_params=WLParams(args.tol, args.max_iter), sigma=args.sigma,
        min_separation_sigmas=args.min_separation, csv_path=args.csv_path,
        timing=args.timing, jobs=args.jobs,
    )
    records = bench.run_experiment(cfg)
    fh = _open_out(args.out)
    try:
        for rec in records:
            fh.write(dumps_record(rec) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 2 if any(rec.error for rec in records) else 0


def _summarize(args):
    table = bench.summarize(read_run_records(args.records), args.group_by)
    fh = _open_out(args.out)
    try:
        bench.summary_to_csv(table, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"generate": _generate, "run": _run, "summarize": _summarize}
    try:
        return handlers[args.command](args)
    except (ValueError, InfeasibleSpecError, OSError) as exc:
        print(f"rpkmeans {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
