"""Benchmark command-line harness.

Subcommands: factor, deps-compare, level-stats, solve. Exit codes:
0 success, 1 usage or I/O error, 2 pivot breakdown, 3 schedule-safety
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import depgraph, numeric, resource, sparse, symbolic

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PIVOT = 2
EXIT_HAZARD = 3

_DETECTORS = {
    "upward": depgraph.detect_upward,
    "exact": depgraph.detect_double_u_exact,
    "relaxed": depgraph.detect_relaxed,
}


@dataclass
class RunReport:
    matrix: str
    n: int
    nz: int
    nnz: int
    deps_method: str
    level_count: int
    times: dict = field(default_factory=dict)
    residual: float | None = None
    mode_histogram: dict = field(default_factory=dict)
    workers: int = 1

    def to_json_dict(self) -> dict:
        return {
            "matrix": self.matrix,
            "n": self.n,
            "nz": self.nz,
            "nnz": self.nnz,
            "deps_method": self.deps_method,
            "level_count": self.level_count,
            "times": self.times,
            "residual": self.residual,
            "mode_histogram": self.mode_histogram,
            "workers": self.workers,
        }


class CliError(Exception):
    def __init__(self, msg, code=EXIT_USAGE):
        super().__init__(msg)
        self.code = code


def _add_matrix_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("matrix", help="Matrix Market coordinate file")
    p.add_argument("--perm", help="symmetric permutation file (one 0-based index per line)")
    p.add_argument("--row-perm", help="row permutation file")
    p.add_argument("--col-perm", help="column permutation file")
    p.add_argument(
        "--precision", choices=["single", "double"], default="double",
        help="numeric scalar type (default double)",
    )


def _add_factor_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--deps", choices=["upward", "exact", "relaxed"], default="relaxed")
    p.add_argument("--sequential", choices=["left", "right"])
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--deterministic", action="store_true", default=True)
    p.add_argument("--atomic", dest="deterministic", action="store_false",
                   help="unordered atomic accumulation instead of deterministic commits")
    p.add_argument("--warps", type=int, default=96)
    p.add_argument("--stream-threshold", type=int, default=16)
    p.add_argument("--mem-budget", type=int, default=1 << 30)
    p.add_argument("--check-residual", action="store_true")
    p.add_argument("--detect-races", action="store_true")
    p.add_argument("--allow-unsafe", action="store_true")
    p.add_argument("--stats-out", help="write the run report to PATH.csv or PATH.json")


def _load_matrix(args) -> sparse.CscMatrix:
    dtype = np.float32 if args.precision == "single" else np.float64
    try:
        with open(args.matrix) as fh:
            trip = sparse.load_matrix_market(fh)
    except OSError as e:
        raise CliError(f"cannot read {args.matrix}: {e}")
    except sparse.MatrixFormatError as e:
        raise CliError(f"{args.matrix}: {e}")
    a = sparse.to_csc(trip, dtype=dtype)
    if args.perm and (args.row_perm or args.col_perm):
        raise CliError("--perm conflicts with --row-perm/--col-perm")
    try:
        if args.perm:
            with open(args.perm) as fh:
                p = sparse.load_permutation(fh, a.n)
            a = sparse.permute(a, p, p)
        elif args.row_perm or args.col_perm:
            if not (args.row_perm and args.col_perm):
                raise CliError("--row-perm and --col-perm must be given together")
            with open(args.row_perm) as fh:
                pr = sparse.load_permutation(fh, a.n)
            with open(args.col_perm) as fh:
                pc = sparse.load_permutation(fh, a.n)
            a = sparse.permute(a, pr, pc)
    except OSError as e:
        raise CliError(f"cannot read permutation: {e}")
    return a


def _resource_model(args) -> resource.ResourceModel:
    scalar = 4 if args.precision == "single" else 8
    return resource.ResourceModel(
        total_warps=args.warps,
        stream_threshold=args.stream_threshold,
        memory_budget_bytes=args.mem_budget,
        scalar_size_bytes=scalar,
    )


def _analyze(a, method: str):
    """Symbolic fill-in, dependency detection and levelization with timings."""
    t0 = time.perf_counter()
    fp = symbolic.symbolic_fillin(a.pattern)
    t1 = time.perf_counter()
    graph = _DETECTORS[method](fp)
    t2 = time.perf_counter()
    schedule = depgraph.levelize(graph)
    t3 = time.perf_counter()
    times = {"symbolic": t1 - t0, "detection": t2 - t1, "levelization": t3 - t2}
    return fp, graph, schedule, times


def cmd_factor(args) -> int:
    if args.sequential and args.parallel:
        raise CliError("--sequential and --parallel are mutually exclusive")
    if not args.sequential:
        args.parallel = True
    if args.parallel and args.deps == "upward" and not args.allow_unsafe:
        raise CliError("--deps upward with --parallel requires --allow-unsafe")

    a = _load_matrix(args)
    fp, graph, schedule, times = _analyze(a, args.deps)
    rm = _resource_model(args)
    stats_obj = depgraph.level_stats(fp, schedule)
    plans = resource.plan_schedule(schedule, stats_obj, a.n, rm)

    opts = numeric.FactorOptions(
        deterministic=args.deterministic,
        worker_count=args.threads,
        resource=rm,
        detect_races=args.detect_races,
    )
    mode_hist: Counter = Counter()
    t0 = time.perf_counter()
    try:
        if args.sequential == "left":
            lu = numeric.factor_left_looking(a, fp, opts)
        elif args.sequential == "right":
            lu = numeric.factor_right_looking_seq(a, fp, opts)
        else:
            lu, fstats = numeric.factor_parallel(a, fp, schedule, plans, opts)
            mode_hist = Counter(fstats.level_modes)
    except numeric.PivotError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PIVOT
    except numeric.ScheduleHazardError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_HAZARD
    times["numeric"] = time.perf_counter() - t0

    res = numeric.residual(a, lu) if args.check_residual else None
    report = RunReport(
        matrix=args.matrix,
        n=a.n,
        nz=fp.nz_before,
        nnz=fp.nnz,
        deps_method=args.deps,
        level_count=schedule.level_count,
        times=times,
        residual=res,
        mode_histogram=dict(sorted(mode_hist.items())),
        workers=args.threads if args.parallel else 1,
    )
    checksum = hashlib.sha256(lu.values.tobytes()).hexdigest()[:16]
    cpu_time = times["symbolic"] + times["detection"] + times["levelization"]
    print(f"matrix {args.matrix}: n={a.n} nz={fp.nz_before} nnz={fp.nnz}")
    print(f"deps={args.deps} levels={schedule.level_count} workers={report.workers}")
    print(f"cpu-phase time {cpu_time * 1e3:.3f} ms, numeric time {times['numeric'] * 1e3:.3f} ms")
    if mode_hist:
        print("modes: " + ", ".join(f"{m}={c}" for m, c in sorted(mode_hist.items())))
    if res is not None:
        print(f"residual {res:.3e}")
    print(f"checksum {checksum}")
    if args.stats_out:
        _write_report(args.stats_out, report)
    return EXIT_OK


def _write_report(path: str, report: RunReport) -> None:
    d = report.to_json_dict()
    if path.endswith(".json"):
        with open(path, "w") as fh:
            json.dump(d, fh, indent=2)
            fh.write("\n")
    elif path.endswith(".csv"):
        flat = {
            "matrix": d["matrix"], "n": d["n"], "nz": d["nz"], "nnz": d["nnz"],
            "deps_method": d["deps_method"], "level_count": d["level_count"],
            "symbolic_s": d["times"]["symbolic"], "detection_s": d["times"]["detection"],
            "levelization_s": d["times"]["levelization"], "numeric_s": d["times"]["numeric"],
            "residual": d["residual"], "workers": d["workers"],
        }
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(flat))
            w.writeheader()
            w.writerow(flat)
    else:
        raise CliError("--stats-out must end in .csv or .json")


def cmd_deps_compare(args) -> int:
    a = _load_matrix(args)
    fp = symbolic.symbolic_fillin(a.pattern)
    results = []
    for name in ("upward", "exact", "relaxed"):
        t0 = time.perf_counter()
        graph = _DETECTORS[name](fp)
        dt = time.perf_counter() - t0
        schedule = depgraph.levelize(graph)
        results.append((name, graph, schedule.level_count, dt))
    edges = {name: g.edge_set() for name, g, _, _ in results}
    if not (edges["upward"] <= edges["exact"] <= edges["relaxed"]):
        print("error: detector superset ordering violated", file=sys.stderr)
        return EXIT_HAZARD
    for name, g, levels, dt in results:
        print(f"{name:8s} edges={g.edge_count:8d} levels={levels:6d} time={dt * 1e3:.3f} ms")
    if args.csv:
        out = sys.stdout if args.csv == "-" else open(args.csv, "w")
        try:
            out.write("method,edges,levels\n")
            for name, g, levels, _ in results:
                out.write(f"{name},{g.edge_count},{levels}\n")
        finally:
            if out is not sys.stdout:
                out.close()
    return EXIT_OK


def cmd_level_stats(args) -> int:
    a = _load_matrix(args)
    fp, graph, schedule, _ = _analyze(a, args.deps)
    stats_obj = depgraph.level_stats(fp, schedule)
    resource.plan_schedule(schedule, stats_obj, a.n, _resource_model(args))
    out = sys.stdout
    out.write("level,size,max_subcolumns,mode\n")
    for lvl in range(stats_obj.level_count):
        out.write(
            f"{lvl},{stats_obj.sizes[lvl]},{stats_obj.max_subcolumns[lvl]},"
            f"{stats_obj.modes[lvl]}\n"
        )
    return EXIT_OK


def cmd_solve(args) -> int:
    a = _load_matrix(args)
    try:
        b = np.loadtxt(args.rhs, dtype=a.values.dtype, ndmin=1)
    except OSError as e:
        raise CliError(f"cannot read {args.rhs}: {e}")
    if len(b) != a.n:
        raise CliError(f"rhs has {len(b)} entries, expected {a.n}")
    fp, graph, schedule, _ = _analyze(a, args.deps)
    stats_obj = depgraph.level_stats(fp, schedule)
    rm = _resource_model(args)
    plans = resource.plan_schedule(schedule, stats_obj, a.n, rm)
    opts = numeric.FactorOptions(worker_count=args.threads, resource=rm)
    try:
        lu, _ = numeric.factor_parallel(a, fp, schedule, plans, opts)
        x = numeric.solve(lu, b)
    except numeric.PivotError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PIVOT
    np.savetxt(args.out, x)
    ax = np.zeros(a.n, dtype=a.values.dtype)
    for j in range(a.n):
        ax[a.col_rows(j)] += a.col_values(j) * x[j]
    denom = np.abs(b).max()
    res = np.abs(ax - b).max() / denom if denom else np.abs(ax - b).max()
    print(f"wrote {args.out}")
    print(f"residual {res:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levlu", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factor", help="factorize a matrix and report statistics")
    _add_matrix_flags(p)
    _add_factor_flags(p)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("deps-compare", help="compare the three dependency detectors")
    _add_matrix_flags(p)
    p.add_argument("--csv", help="write method,edges,levels CSV to PATH ('-' for stdout)")
    p.set_defaults(func=cmd_deps_compare)

    p = sub.add_parser("level-stats", help="emit per-level statistics as CSV")
    _add_matrix_flags(p)
    p.add_argument("--deps", choices=["upward", "exact", "relaxed"], default="relaxed")
    p.add_argument("--warps", type=int, default=96)
    p.add_argument("--stream-threshold", type=int, default=16)
    p.add_argument("--mem-budget", type=int, default=1 << 30)
    p.set_defaults(func=cmd_level_stats)

    p = sub.add_parser("solve", help="factor and solve A x = b")
    _add_matrix_flags(p)
    p.add_argument("rhs", help="right-hand side, one scalar per line")
    p.add_argument("--out", default="x.txt", help="solution output file")
    p.add_argument("--deps", choices=["upward", "exact", "relaxed"], default="relaxed")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--warps", type=int, default=96)
    p.add_argument("--stream-threshold", type=int, default=16)
    p.add_argument("--mem-budget", type=int, default=1 << 30)
    p.set_defaults(func=cmd_solve)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage; 2 is reserved for pivot breakdown
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except symbolic.SymbolicError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
