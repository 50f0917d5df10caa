"""Numeric LU factorization over a precomputed fill-in pattern.

Three paths produce the factors: a sequential left-looking reference, a
sequential hybrid right-looking path, and a level-parallel path driven
by a dependency schedule and a per-level resource plan. In
deterministic mode every element accumulates its MACs in ascending
source-column order, so all three paths agree bitwise; atomic mode
commits updates in arrival order and is only reproducible up to
floating-point reassociation.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels as K
from .depgraph import LevelSchedule, simulate_hazards, LevelStats
from .resource import LevelPlan, ResourceModel, concurrency_cap
from .sparse import CscMatrix
from .symbolic import FilledPattern

DEFAULT_PIVOT_THRESHOLD = 1e-14


class PivotError(ArithmeticError):
    """Zero or near-zero pivot; no numeric pivoting is attempted."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"pivot breakdown at column {column}")


class ScheduleHazardError(RuntimeError):
    """A read-write conflict was detected under the given schedule."""

    def __init__(self, hazards):
        self.hazards = hazards
        h = hazards[0]
        super().__init__(
            f"schedule hazard: column {h.writer} writes element {h.element} "
            f"read by column {h.reader} in level {h.level}"
        )


class PatternMismatchError(RuntimeError):
    """A numeric update targeted a slot absent from the filled pattern."""


@dataclass(frozen=True)
class FactorOptions:
    zero_pivot_threshold: float = DEFAULT_PIVOT_THRESHOLD
    deterministic: bool = True
    worker_count: int = 1
    resource: ResourceModel | None = None
    detect_races: bool = False

    def __post_init__(self):
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        if self.zero_pivot_threshold < 0:
            raise ValueError("zero_pivot_threshold must be non-negative")


@dataclass(frozen=True)
class LuFactors:
    """L and U sharing one value array over the filled pattern.

    L is unit lower triangular (diagonal implicit); U sits on and above
    the diagonal.
    """

    pattern: FilledPattern
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.pattern.n

    def to_scipy(self):
        """(L, U) as scipy CSC matrices, unit diagonal made explicit in L."""
        fp = self.pattern
        cp = fp.full.col_ptr
        rows = fp.full.row_idx
        cols = np.repeat(np.arange(fp.n, dtype=np.int64), np.diff(cp))
        lower = rows > cols
        upper = ~lower
        eye = sp.identity(fp.n, dtype=self.values.dtype, format="csc")
        L = sp.csc_matrix(
            (self.values[lower], (rows[lower], cols[lower])), shape=(fp.n, fp.n)
        ) + eye
        U = sp.csc_matrix(
            (self.values[upper], (rows[upper], cols[upper])), shape=(fp.n, fp.n)
        )
        return L, U


@dataclass
class FactorStats:
    level_times: list = field(default_factory=list)
    level_modes: list = field(default_factory=list)
    flop_count: int = 0
    peak_concurrent_columns: int = 0


def _scatter(a: CscMatrix, fp: FilledPattern) -> np.ndarray:
    v = np.empty(fp.nnz, dtype=a.values.dtype)
    bad = K.scatter_values(
        a.n, a.col_ptr, a.row_idx, a.values, fp.full.col_ptr, fp.full.row_idx, v
    )
    if bad >= 0:
        raise PatternMismatchError(
            f"column {bad} of A has entries outside the filled pattern"
        )
    return v


def _check(err: int) -> None:
    if err == -2:
        raise PatternMismatchError("update targeted a structurally absent slot")
    if err >= 0:
        raise PivotError(err)


def factor_left_looking(
    a: CscMatrix, fp: FilledPattern, opts: FactorOptions = FactorOptions()
) -> LuFactors:
    """Sequential Gilbert-Peierls left-looking factorization."""
    v = _scatter(a, fp)
    x = np.zeros(a.n, dtype=v.dtype)
    cols = np.arange(a.n, dtype=np.int64)
    err = K.left_columns(
        cols, fp.full.col_ptr, fp.full.row_idx, fp.diag_pos, v, x,
        v.dtype.type(opts.zero_pivot_threshold),
    )
    _check(err)
    return LuFactors(fp, v)


def factor_right_looking_seq(
    a: CscMatrix, fp: FilledPattern, opts: FactorOptions = FactorOptions()
) -> LuFactors:
    """Sequential hybrid right-looking factorization.

    Bitwise-identical to the left-looking path: each element receives
    its MACs in ascending source-column order in both.
    """
    v = _scatter(a, fp)
    err = K.right_looking_seq(
        a.n, fp.full.col_ptr, fp.full.row_idx, fp.diag_pos, v,
        fp.csr.row_ptr, fp.csr.col_idx, fp.csr.csc_pos,
        v.dtype.type(opts.zero_pivot_threshold),
    )
    _check(err)
    return LuFactors(fp, v)


def subcolumn_update(fp: FilledPattern, values: np.ndarray, source_j: int, dest_k: int):
    """Apply one subcolumn update: dest column k receives column j's MACs.

    Requires A_s(j,k) structurally present and column j already divided.
    Raises PatternMismatchError if a target slot is missing.
    """
    row_cols = fp.csr.row_cols(source_j)
    t = np.searchsorted(row_cols, dest_k)
    if t >= len(row_cols) or row_cols[t] != dest_k:
        raise PatternMismatchError(
            f"A_s({source_j},{dest_k}) is structurally absent"
        )
    mult = values[fp.csr.row_pos(source_j)[t]]
    dest_rows = fp.full.col_rows(dest_k)
    dest_base = fp.full.col_ptr[dest_k]
    for p in fp.l_positions(source_j):
        r = fp.full.row_idx[p]
        q = np.searchsorted(dest_rows, r)
        if q >= len(dest_rows) or dest_rows[q] != r:
            raise PatternMismatchError(
                f"target slot ({r},{dest_k}) is structurally absent"
            )
        values[dest_base + q] -= values[p] * mult


def _pattern_flops(fp: FilledPattern) -> int:
    cp = fp.full.col_ptr
    l_len = cp[1:] - fp.diag_pos - 1
    cols = np.repeat(np.arange(fp.n, dtype=np.int64), np.diff(cp))
    u_mask = fp.full.row_idx < cols
    macs = int(l_len[fp.full.row_idx[u_mask]].sum())
    return macs + int(l_len.sum())


class _WorkCrew:
    """Persistent worker threads driven through one reusable barrier.

    Dispatching a level phase costs two barrier waits instead of a pool
    submit/result round trip per worker, which matters when a schedule
    has hundreds of thin levels.
    """

    def __init__(self, size: int):
        self._barrier = threading.Barrier(size + 1)
        self._task = None
        self._stop = False
        self._results = [-1] * size
        self._threads = [
            threading.Thread(target=self._loop, args=(w,), daemon=True)
            for w in range(size)
        ]
        for t in self._threads:
            t.start()

    def _loop(self, w: int) -> None:
        while True:
            self._barrier.wait()
            if self._stop:
                return
            try:
                self._results[w] = self._task(w)
            except BaseException as exc:  # surfaced by run(); keeps the barrier sane
                self._results[w] = exc
            self._barrier.wait()

    def run(self, task) -> list:
        """Run task(worker_index) on every worker; returns per-worker results."""
        self._task = task
        self._barrier.wait()
        self._barrier.wait()
        return self._results

    def close(self) -> None:
        self._stop = True
        self._barrier.wait()
        for t in self._threads:
            t.join()


def factor_parallel(
    a: CscMatrix,
    fp: FilledPattern,
    schedule: LevelSchedule,
    plans: list[LevelPlan],
    opts: FactorOptions,
) -> tuple[LuFactors, FactorStats]:
    """Level-parallel factorization under a resource plan.

    Levels run strictly in order with a barrier between them; within a
    level, column tasks run concurrently up to the plan's concurrency
    cap. Deterministic mode has each column pull its updates in
    ascending source order (bitwise equal to the sequential paths);
    atomic mode pushes subcolumn updates with serialized commits.
    """
    if len(plans) != schedule.level_count:
        raise ValueError("one LevelPlan per level required")
    rm = opts.resource or ResourceModel()
    if opts.detect_races:
        report = simulate_hazards(fp, schedule)
        if report.hazards:
            raise ScheduleHazardError(report.hazards)

    v = _scatter(a, fp)
    cp, rows, dpos = fp.full.col_ptr, fp.full.row_idx, fp.diag_pos
    rp, rcols, rpos = fp.csr.row_ptr, fp.csr.col_idx, fp.csr.csc_pos
    thresh = v.dtype.type(opts.zero_pivot_threshold)

    stats = FactorStats(flop_count=_pattern_flops(fp))
    caps = [
        min(concurrency_cap(plan, len(cols), rm), opts.worker_count, len(cols))
        for plan, cols in zip(plans, schedule.levels)
    ]
    pool_size = max(caps)
    stats.peak_concurrent_columns = pool_size

    workspaces = [np.zeros(a.n, dtype=v.dtype) for _ in range(pool_size)]

    def _finish(results) -> None:
        for r in results:
            if isinstance(r, BaseException):
                raise r
        bad = [r for r in results if r != -1]
        if bad:
            _check(min(bad) if min(bad) >= 0 else -2)

    def det_task(cols, cap):
        """Each active worker pulls a strided slice of the level's columns."""
        def task(w):
            if w >= cap:
                return -1
            return K.left_columns(cols[w::cap], cp, rows, dpos, v, workspaces[w], thresh)
        return task

    def atomic_task(prev_cols, prev_cap, cols, cap):
        """Fused phase: divide the previous level, push the current one.

        The ownership partition (k mod cap) serializes all MACs into any
        one slot on a single worker, which is how the atomic
        read-modify-write contract is realized on this backend;
        accumulation order across levels is unspecified. The previous
        level's divides touch only its own columns, which no push of the
        current level reads or writes, so the two halves can share one
        barrier.
        """
        def task(w):
            if prev_cols is not None and w < prev_cap:
                err = K.divide_columns(prev_cols[w::prev_cap], cp, rows, dpos, v, thresh)
                if err != -1:
                    return err
            if w < cap:
                return K.push_updates_owned(cols, w, cap, cp, rows, dpos, v,
                                            rp, rcols, rpos)
            return -1
        return task

    crew = _WorkCrew(pool_size) if pool_size > 1 else None
    try:
        if opts.deterministic:
            for plan, cols, cap in zip(plans, schedule.levels, caps):
                t0 = time.perf_counter()
                if crew is None or cap <= 1:
                    _check(K.left_columns(cols, cp, rows, dpos, v, workspaces[0], thresh))
                else:
                    _finish(crew.run(det_task(cols, cap)))
                stats.level_times.append(time.perf_counter() - t0)
                stats.level_modes.append(plan.mode.value)
        else:
            prev_cols, prev_cap = None, 1
            for plan, cols, cap in zip(plans, schedule.levels, caps):
                t0 = time.perf_counter()
                if crew is None:
                    if prev_cols is not None:
                        _check(K.divide_columns(prev_cols, cp, rows, dpos, v, thresh))
                    _check(K.push_updates_owned(cols, 0, 1, cp, rows, dpos, v,
                                                rp, rcols, rpos))
                else:
                    _finish(crew.run(atomic_task(prev_cols, prev_cap, cols, cap)))
                prev_cols, prev_cap = cols, cap
                stats.level_times.append(time.perf_counter() - t0)
                stats.level_modes.append(plan.mode.value)
            if prev_cols is not None:
                if crew is None:
                    _check(K.divide_columns(prev_cols, cp, rows, dpos, v, thresh))
                else:
                    _finish(crew.run(atomic_task(prev_cols, prev_cap,
                                                 prev_cols[:0], 0)))
    finally:
        if crew is not None:
            crew.close()
    return LuFactors(fp, v), stats


def lower_solve(lu: LuFactors, b: np.ndarray) -> np.ndarray:
    """Solve L y = b with implicit unit diagonal."""
    if len(b) != lu.n:
        raise ValueError("right-hand side length mismatch")
    y = np.asarray(b, dtype=lu.values.dtype).copy()
    fp = lu.pattern
    K.lower_solve_inplace(lu.n, fp.full.col_ptr, fp.full.row_idx, fp.diag_pos, lu.values, y)
    return y


def upper_solve(lu: LuFactors, y: np.ndarray) -> np.ndarray:
    """Solve U x = y."""
    if len(y) != lu.n:
        raise ValueError("right-hand side length mismatch")
    x = np.asarray(y, dtype=lu.values.dtype).copy()
    fp = lu.pattern
    bad = K.upper_solve_inplace(lu.n, fp.full.col_ptr, fp.full.row_idx, fp.diag_pos, lu.values, x)
    if bad >= 0:
        raise PivotError(bad)
    return x


def solve(lu: LuFactors, b: np.ndarray) -> np.ndarray:
    """Solve A x = b through the two triangular systems."""
    return upper_solve(lu, lower_solve(lu, b))


def residual(a: CscMatrix, lu: LuFactors) -> float:
    """Relative Frobenius residual ||A - L U||_F / ||A||_F."""
    L, U = lu.to_scipy()
    A = sp.csc_matrix((a.values, a.row_idx, a.col_ptr), shape=(a.n, a.n))
    diff = (A - L @ U).tocoo()
    num = np.linalg.norm(diff.data)
    den = np.linalg.norm(a.values)
    return float(num / den) if den else float(num)
