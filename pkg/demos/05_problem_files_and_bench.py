"""Problem files and the benchmark harness, driven end to end.

The ``dalbench`` command wraps everything: ``gen`` writes a binary problem
container, ``solve`` emits one JSON record per run, and ``bench`` sweeps a
(solver, size, seed) grid into a per-run CSV plus a median aggregate.  The
same entry point is callable in-process, which is what this script does.
"""

import csv
import json
import tempfile
from pathlib import Path

from dalsparse import load_problem
from dalsparse.cli import main

workdir = Path(tempfile.mkdtemp(prefix="dalbench-demo-"))
problem_path = workdir / "demo.dalp"

print("== gen ==")
main(["gen", "--family", "normal", "--m", "64", "--seed", "11",
      "--out", str(problem_path)])
gen = load_problem(problem_path)
print(f"container round-trip: m={gen.problem.m} n={gen.problem.n} "
      f"lambda={gen.problem.lam}")
print()

print("== solve (one JSON record per run) ==")
for solver in ("dal-chol", "dal-cg", "ist-bb"):
    main(["solve", str(problem_path), "--solver", solver, "--tol", "1e-4"])
print()

print("== bench (tiny grid) ==")
rows_csv = workdir / "rows.csv"
main(["bench", "--family", "normal", "--sizes", "32,64", "--seeds", "1..3",
      "--solvers", "dal-cg,ist-bb", "--out", str(rows_csv)])
print()

with open(rows_csv, newline="") as fh:
    rows = list(csv.DictReader(fh))
print(f"{len(rows)} rows; first row as JSON:")
print(json.dumps(rows[0], indent=2))
print()
with open(workdir / "rows_agg.csv", newline="") as fh:
    for agg in csv.DictReader(fh):
        print(f"aggregate: {agg['solver']} m={agg['m']}: "
              f"median iters {agg['median_outer_iters']}, "
              f"median nnz {float(agg['median_nnz_fraction']):.3f}")
