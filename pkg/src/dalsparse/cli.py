"""Benchmark harness: generate problems, run solvers, persist comparable records.

Three subcommands:

* ``gen``   -- write a problem file in the binary container format.
* ``solve`` -- run one solver on a problem file; emit a JSON record on stdout.
* ``bench`` -- run a (solver, size, seed) cross-product for a family; write a
  per-run CSV plus a per-(solver, size) median aggregate CSV.

Exit codes: 0 success (non-convergence is data, not failure), 2 usage,
3 data/format/IO, 4 internal numeric error.  ``DAL_NUM_THREADS`` caps harness
parallelism; rows are sorted on a deterministic key so output is identical
for any worker count, modulo the wall-time column.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import probgen
from .baselines import IstConfig, estimate_spectral_norm_sq, ist_solve
from .dal import LineSearchError, NumericError, SolveReport, SolverConfig, solve
from .probgen import DalpFormatError, GenSpec, LambdaRule

SOLVER_IDS = ("dal-chol", "dal-cg", "ist", "ist-bb")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

# Default size grids (m for normal/poor, n for largescale).
DEFAULT_SIZES = {
    "normal": (128, 256, 512),
    "poor": (128, 256, 512),
    "largescale": (4096, 16384, 65536),
}
HUGE_N_CAP = 2**17


@dataclass(frozen=True)
class BenchRecord:
    """One solver run in the shape shared by JSON and CSV outputs."""

    solver: str
    family: str | None
    m: int
    n: int
    seed: int | None
    wall_time_s: float
    outer_iters: int
    inner_iters: int
    nnz_fraction: float
    final_gap: float
    converged: bool
    eta_initial: float | None


def _record_from_report(
    report: SolveReport,
    solver: str,
    family: str | None,
    m: int,
    n: int,
    seed: int | None,
    eta_initial: float | None,
) -> BenchRecord:
    return BenchRecord(
        solver=solver,
        family=family,
        m=m,
        n=n,
        seed=seed,
        wall_time_s=report.wall_time_seconds,
        outer_iters=report.outer_iters,
        inner_iters=report.inner_newton_iters,
        nnz_fraction=report.nnz_fraction,
        final_gap=report.relative_gap,
        converged=report.converged,
        eta_initial=eta_initial,
    )


def _initial_w(mode: str, n: int) -> np.ndarray | None:
    if mode == "zero":
        return None
    if mode.startswith("random:"):
        seed = int(mode.split(":", 1)[1])
        rng = np.random.Generator(np.random.Philox(key=seed))
        return rng.standard_normal(n)
    raise ValueError(f"w-init must be 'zero' or 'random:SEED', got {mode!r}")


def run_solver(
    solver: str,
    problem,
    tol: float,
    eta_initial: float | None = None,
    max_outer: int = 100,
    max_ist_iters: int = 50000,
    w_initial: np.ndarray | None = None,
) -> tuple[SolveReport, float | None]:
    """Dispatch one of the four solver ids; returns (report, eta actually used)."""
    if solver == "dal-chol" or solver == "dal-cg":
        variant = "cholesky" if solver == "dal-chol" else "pcg"
        eta = eta_initial if eta_initial is not None else 1.0 / problem.lam
        config = SolverConfig(
            eta_initial=eta,
            outer_tolerance=tol,
            max_outer=max_outer,
            inner_variant=variant,
        )
        return solve(problem, config, w_initial), eta
    if solver == "ist":
        lipschitz = estimate_spectral_norm_sq(problem.design)
        tau = 1.0 / lipschitz if lipschitz > 0 else 1.0
        config = IstConfig(step_rule="constant", tau=tau, tolerance=tol,
                           max_iters=max_ist_iters)
        return ist_solve(problem, config, w_initial), None
    if solver == "ist-bb":
        config = IstConfig(step_rule="bb", tolerance=tol, max_iters=max_ist_iters)
        return ist_solve(problem, config, w_initial), None
    raise ValueError(f"unknown solver {solver!r}")


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s]


def _parse_sizes(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dalbench",
        description="Sparse-reconstruction solver benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a problem file")
    gen.add_argument("--family", required=True, choices=probgen.FAMILIES)
    gen.add_argument("--m", type=int)
    gen.add_argument("--n", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--density", type=float, default=0.04)
    gen.add_argument("--noise-variance", type=float, default=None)
    gen.add_argument("--lam", type=float, default=None,
                     help="fixed regularization weight (overrides the family rule)")
    gen.add_argument("--out", default=None, help="output path (.dalp)")
    gen.add_argument("--csv", default=None,
                     help="also export a CSV copy (small instances only)")

    slv = sub.add_parser("solve", help="solve a problem file")
    slv.add_argument("problem", help="path to a .dalp problem file")
    slv.add_argument("--solver", required=True, choices=SOLVER_IDS)
    slv.add_argument("--tol", type=float, default=1e-3)
    slv.add_argument("--eta1", type=float, default=None)
    slv.add_argument("--max-outer", type=int, default=100)
    slv.add_argument("--max-ist-iters", type=int, default=50000)
    slv.add_argument("--w-init", default="zero", help="zero | random:SEED")

    bench = sub.add_parser("bench", help="run a solver/size/seed cross-product")
    bench.add_argument("--family", required=True, choices=probgen.FAMILIES)
    bench.add_argument("--sizes", default=None,
                       help="comma list; m for normal/poor, n for largescale")
    bench.add_argument("--seeds", default="1..10", help="e.g. 1..10 or 3,5,9")
    bench.add_argument("--solvers", default=",".join(SOLVER_IDS))
    bench.add_argument("--tol", type=float, default=1e-3)
    bench.add_argument("--eta1", type=float, default=None)
    bench.add_argument("--max-outer", type=int, default=100)
    bench.add_argument("--max-ist-iters", type=int, default=50000)
    bench.add_argument("--w-init", default="zero", help="zero | random (seed-derived)")
    bench.add_argument("--out", required=True, help="per-run CSV path")
    bench.add_argument("--aggregate-out", default=None,
                       help="median CSV path (default: <out>_agg.csv)")
    bench.add_argument("--workers", type=int, default=None,
                       help="parallel cells (default: DAL_NUM_THREADS or 1)")
    bench.add_argument("--allow-huge", action="store_true",
                       help=f"permit largescale n above {HUGE_N_CAP}")
    return parser


def _gen_spec_from_args(args, seed: int) -> GenSpec:
    rule = LambdaRule("fixed", args.lam) if args.lam is not None else None
    return GenSpec(
        family=args.family,
        m=args.m,
        n=args.n,
        density=args.density,
        noise_variance=args.noise_variance,
        lambda_rule=rule,
        seed=seed,
    )


def _cmd_gen(args, parser) -> int:
    if args.family in ("normal", "poor") and args.m is None:
        parser.error(f"--m is required for family {args.family!r}")
    if args.family == "largescale" and args.n is None:
        parser.error("--n is required for family 'largescale'")
    generated = probgen.generate(_gen_spec_from_args(args, args.seed))
    p = generated.problem
    out = args.out
    if out is None:
        out = f"{args.family}_m{p.m}_n{p.n}_seed{args.seed}.dalp"
    probgen.save_problem(out, generated)
    if args.csv is not None:
        probgen.export_problem_csv(args.csv, generated)
    nnz = int(np.count_nonzero(generated.true_coeffs))
    print(out)
    print(f"m={p.m} n={p.n} lambda={p.lam:g} nnz(w0)={nnz}", file=sys.stderr)
    return EXIT_OK


def _cmd_solve(args) -> int:
    generated = probgen.load_problem(args.problem)
    p = generated.problem
    w0 = _initial_w(args.w_init, p.n)
    report, eta = run_solver(
        args.solver,
        p,
        tol=args.tol,
        eta_initial=args.eta1,
        max_outer=args.max_outer,
        max_ist_iters=args.max_ist_iters,
        w_initial=w0,
    )
    record = _record_from_report(report, args.solver, None, p.m, p.n, None, eta)
    print(json.dumps(asdict(record)))
    status = "converged" if record.converged else "NOT converged"
    print(
        f"{args.solver} on {args.problem}: {status}, gap={record.final_gap:.3e}, "
        f"iters={record.outer_iters}, nnz={record.nnz_fraction:.4f}, "
        f"time={record.wall_time_s:.3f}s",
        file=sys.stderr,
    )
    return EXIT_OK


def _bench_cell(family, size, seed, solver, args):
    if family == "largescale":
        spec = GenSpec(family=family, n=size, seed=seed)
    else:
        spec = GenSpec(family=family, m=size, seed=seed)
    generated = probgen.generate(spec)
    p = generated.problem
    if args.w_init == "random":
        # Derive the initial-vector stream from the problem seed.
        w0 = _initial_w(f"random:{seed + 0x5EED}", p.n)
    else:
        w0 = _initial_w(args.w_init, p.n)
    try:
        report, eta = run_solver(
            solver,
            p,
            tol=args.tol,
            eta_initial=args.eta1,
            max_outer=args.max_outer,
            max_ist_iters=args.max_ist_iters,
            w_initial=w0,
        )
        return _record_from_report(report, solver, family, p.m, p.n, seed, eta)
    except (NumericError, LineSearchError):
        # Partial failures become non-converged rows; the harness continues.
        return BenchRecord(
            solver=solver, family=family, m=p.m, n=p.n, seed=seed,
            wall_time_s=0.0, outer_iters=0, inner_iters=0, nnz_fraction=0.0,
            final_gap=float("inf"), converged=False, eta_initial=args.eta1,
        )


_CSV_FIELDS = [
    "solver", "family", "m", "n", "seed", "wall_time_s", "outer_iters",
    "inner_iters", "nnz_fraction", "final_gap", "converged", "eta_initial",
]

_MEDIAN_FIELDS = ["wall_time_s", "outer_iters", "inner_iters", "nnz_fraction",
                  "final_gap"]


def _csv_value(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records_csv(path, records: list[BenchRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for rec in records:
            row = asdict(rec)
            writer.writerow([_csv_value(row[f]) for f in _CSV_FIELDS])


def aggregate_records(records: list[BenchRecord]) -> list[dict]:
    """Per-(solver, family, m, n) medians over seeds, plus convergence counts."""
    groups: dict[tuple, list[BenchRecord]] = {}
    for rec in records:
        groups.setdefault((rec.solver, rec.family, rec.m, rec.n), []).append(rec)
    rows = []
    for key in sorted(groups, key=lambda k: (str(k[0]), str(k[1]), k[2], k[3])):
        members = groups[key]
        row = {
            "solver": key[0],
            "family": key[1],
            "m": key[2],
            "n": key[3],
            "runs": len(members),
            "converged_runs": sum(1 for r in members if r.converged),
        }
        for fname in _MEDIAN_FIELDS:
            row[f"median_{fname}"] = statistics.median(
                getattr(r, fname) for r in members
            )
        rows.append(row)
    return rows


def write_aggregate_csv(path, rows: list[dict]) -> None:
    fields = ["solver", "family", "m", "n", "runs", "converged_runs"] + [
        f"median_{f}" for f in _MEDIAN_FIELDS
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_csv_value(row[f]) for f in fields])


def _cmd_bench(args, parser) -> int:
    sizes = _parse_sizes(args.sizes) if args.sizes else list(DEFAULT_SIZES[args.family])
    if args.family == "largescale" and not args.allow_huge:
        over = [n for n in sizes if n > HUGE_N_CAP]
        if over:
            parser.error(
                f"sizes {over} exceed the default n cap {HUGE_N_CAP}; "
                f"pass --allow-huge to proceed"
            )
    seeds = _parse_seeds(args.seeds)
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    unknown = [s for s in solvers if s not in SOLVER_IDS]
    if unknown:
        parser.error(f"unknown solvers {unknown}; choose from {SOLVER_IDS}")
    if args.w_init not in ("zero", "random"):
        parser.error("--w-init must be 'zero' or 'random' for bench")

    env_cap = os.environ.get("DAL_NUM_THREADS")
    workers = args.workers
    if workers is None:
        workers = int(env_cap) if env_cap else 1
    if env_cap:
        workers = min(workers, int(env_cap))
    workers = max(1, workers)

    cells = [
        (size, seed, solver)
        for size in sizes
        for seed in seeds
        for solver in solvers
    ]
    if workers == 1:
        records = [_bench_cell(args.family, sz, sd, sv, args) for sz, sd, sv in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(
                pool.map(
                    lambda cell: _bench_cell(args.family, cell[0], cell[1], cell[2], args),
                    cells,
                )
            )
    records.sort(key=lambda r: (r.solver, r.m, r.n, r.seed))
    write_records_csv(args.out, records)
    agg_path = args.aggregate_out
    if agg_path is None:
        root, ext = os.path.splitext(args.out)
        agg_path = f"{root}_agg{ext or '.csv'}"
    write_aggregate_csv(agg_path, aggregate_records(records))
    print(args.out)
    print(agg_path)
    done = sum(1 for r in records if r.converged)
    print(f"{len(records)} runs, {done} converged", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return _cmd_gen(args, parser)
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_bench(args, parser)
    except (DalpFormatError, OSError, csv.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, LineSearchError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:  # console-script wrapper
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
