"""
A small benchmark sweep
=======================

Run every algorithm over a grid of settings, write JSON Lines, then
summarize medians and quartiles. The same flow is available from the
shell as ``rpkmeans run`` followed by ``rpkmeans summarize``.
"""

from rpkmeans.bench import ExperimentConfig, run_experiment, summarize
from rpkmeans.data_io import dumps_record

cfg = ExperimentConfig(
    algorithms=("rpkm", "kmpp", "mb"),
    n_list=(10_000,),
    d_list=(2, 4),
    K_list=(3,),
    m=5,
    b_list=(100, 500),
    replicates=3,
    seed=42,
    evaluation=True,
)
records = run_experiment(cfg)
print(f"{len(records)} records; first one:")
print(dumps_record(records[0])[:300], "...")

table = summarize(records, ("algorithm", "batch_size", "step", "d"))
print(f"\n{'algorithm':>9} {'b':>5} {'step':>4} {'d':>2} {'runs':>4} "
      f"{'median dist':>12} {'median std.error':>17}")
for row in table:
    b = "" if row["batch_size"] is None else row["batch_size"]
    step = "" if row["step"] is None else row["step"]
    print(f"{row['algorithm']:>9} {b!s:>5} {step!s:>4} {row['d']:>2} {row['runs']:>4} "
          f"{row['dist_evals_median']:>12.0f} {row['std_error_median']:>17.3e}")

# summary_to_csv(table, sink) writes the same table as CSV
