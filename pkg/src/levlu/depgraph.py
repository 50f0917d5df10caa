"""Column dependency detection, levelization and schedule safety checks.

Three detectors are provided. The upward detector reads only the U
pattern and misses the extra ordering constraints created by parallel
submatrix updates; the exact detector finds those with a cubic triple
loop; the relaxed detector covers them with a single additional row
scan, at the cost of a few redundant edges.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .symbolic import FilledPattern


class DetectMethod(enum.Enum):
    UPWARD = "upward"
    DOUBLE_U_EXACT = "exact"
    RELAXED = "relaxed"


@dataclass(frozen=True)
class DependencyGraph:
    """Per-column lists of strictly smaller columns each column depends on."""

    n: int
    deps: list  # deps[j]: sorted int64 array of columns < j
    method: DetectMethod

    @property
    def edge_count(self) -> int:
        return sum(len(d) for d in self.deps)

    def edge_set(self) -> set:
        return {(j, int(i)) for j in range(self.n) for i in self.deps[j]}


@dataclass(frozen=True)
class LevelSchedule:
    """Partition of columns into ordered levels of mutually independent columns."""

    levels: list  # list of sorted int64 arrays
    level_of: np.ndarray

    @property
    def level_count(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class Hazard:
    writer: int
    reader: int
    element: tuple  # (i, k) position in the filled pattern
    level: int


@dataclass(frozen=True)
class HazardReport:
    hazards: list

    def __len__(self) -> int:
        return len(self.hazards)


@dataclass
class LevelStats:
    """Per-level column counts and subcolumn maxima; modes filled by planning."""

    sizes: list
    max_subcolumns: list
    modes: list = field(default_factory=list)

    @property
    def level_count(self) -> int:
        return len(self.sizes)


def _edges_to_graph(n: int, src: np.ndarray, dst: np.ndarray, method: DetectMethod) -> DependencyGraph:
    """Deduplicate (src depends on dst) edge arrays into per-column sorted lists."""
    if len(src):
        keys = np.unique(src * np.int64(n) + dst)
        src = keys // n
        dst = keys % n
    counts = np.zeros(n, dtype=np.int64)
    np.add.at(counts, src, 1)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    deps = [dst[offsets[j] : offsets[j + 1]] for j in range(n)]
    return DependencyGraph(n, deps, method)


def _upward_edges(fp: FilledPattern):
    """Edges (k depends on i) for U entries A_s(i,k) with a non-empty L column i."""
    cp = fp.full.col_ptr
    rows = fp.full.row_idx
    cols = np.repeat(np.arange(fp.n, dtype=np.int64), np.diff(cp))
    nonempty = fp.l_col_nonempty
    mask = (rows < cols) & nonempty[rows]
    return cols[mask], rows[mask]


def detect_upward(fp: FilledPattern) -> DependencyGraph:
    """U-pattern dependency detection: k needs i when A_s(i,k) is a
    nonzero above the diagonal and column i has a non-empty L part."""
    src, dst = _upward_edges(fp)
    return _edges_to_graph(fp.n, src, dst, DetectMethod.UPWARD)


def detect_relaxed(fp: FilledPattern) -> DependencyGraph:
    """Relaxed detection: the upward rule plus a left scan of each L row.

    Any nonzero A_s(k,i) left of the diagonal adds the edge k -> i
    unconditionally; the result is a superset of the exact edge set.
    """
    up_src, up_dst = _upward_edges(fp)
    rp = fp.csr.row_ptr
    csr_cols = fp.csr.col_idx
    csr_rows = np.repeat(np.arange(fp.n, dtype=np.int64), np.diff(rp))
    left = csr_cols < csr_rows
    src = np.concatenate([up_src, csr_rows[left]])
    dst = np.concatenate([up_dst, csr_cols[left]])
    return _edges_to_graph(fp.n, src, dst, DetectMethod.RELAXED)


def detect_double_u_exact(fp: FilledPattern) -> DependencyGraph:
    """Exact detection: upward edges plus the double-U triple loop.

    For columns i < t with A_s(t,i) != 0, t gains a dependency on i as
    soon as some column j >= t with A_s(j,t) != 0 shares a nonzero
    column k > t between rows i and j.
    """
    n = fp.n
    row_sets = [set(fp.csr.row_cols(i).tolist()) for i in range(n)]
    src = []
    dst = []
    for i in range(n):
        ri = row_sets[i]
        for t in fp.l_rows(i):
            t = int(t)
            found = False
            for j in [t] + fp.l_rows(t).tolist():
                common = ri & row_sets[int(j)]
                if any(k > t for k in common):
                    found = True
                    break
            if found:
                src.append(t)
                dst.append(i)
    up_src, up_dst = _upward_edges(fp)
    src = np.concatenate([up_src, np.array(src, dtype=np.int64)])
    dst = np.concatenate([up_dst, np.array(dst, dtype=np.int64)])
    return _edges_to_graph(n, src, dst, DetectMethod.DOUBLE_U_EXACT)


def levelize(g: DependencyGraph) -> LevelSchedule:
    """Group columns into levels: level(j) = 1 + max level of its dependencies."""
    level_of = np.zeros(g.n, dtype=np.int64)
    for j in range(g.n):
        d = g.deps[j]
        if len(d):
            level_of[j] = level_of[d].max() + 1
    n_levels = int(level_of.max()) + 1 if g.n else 0
    order = np.argsort(level_of, kind="stable")
    bounds = np.searchsorted(level_of[order], np.arange(n_levels + 1))
    levels = [np.sort(order[bounds[i] : bounds[i + 1]]) for i in range(n_levels)]
    return LevelSchedule(levels, level_of)


def _write_set(fp: FilledPattern, j: int) -> set:
    lr = fp.l_rows(j).tolist()
    sc = fp.subcolumns(j).tolist()
    return {(i, k) for i in lr for k in sc}


def _read_set(fp: FilledPattern, j: int) -> set:
    return {(j, int(k)) for k in fp.subcolumns(j)} | {(int(i), j) for i in fp.l_rows(j)}


def simulate_hazards(fp: FilledPattern, s: LevelSchedule) -> HazardReport:
    """Exhaustively check a schedule against the right-looking hazard semantics.

    A hazard is any same-level pair (writer, reader) whose submatrix
    write set intersects the reader's multiplier read set.
    """
    seen = np.concatenate(s.levels) if s.levels else np.empty(0, dtype=np.int64)
    if len(seen) != fp.n or len(np.unique(seen)) != fp.n:
        raise ValueError("schedule is not a partition of the columns")
    hazards = []
    for lvl, cols in enumerate(s.levels):
        cols = [int(c) for c in cols]
        writes = {j: _write_set(fp, j) for j in cols}
        reads = {j: _read_set(fp, j) for j in cols}
        for w in cols:
            if not writes[w]:
                continue
            for r in cols:
                if w == r:
                    continue
                for elem in sorted(writes[w] & reads[r]):
                    hazards.append(Hazard(w, r, elem, lvl))
    return HazardReport(hazards)


def level_stats(fp: FilledPattern, s: LevelSchedule) -> LevelStats:
    """Per-level size and the maximum subcolumn count over its columns."""
    sub_counts = np.zeros(fp.n, dtype=np.int64)
    for j in range(fp.n):
        sub_counts[j] = len(fp.subcolumns(j))
    sizes = [len(cols) for cols in s.levels]
    max_subs = [int(sub_counts[cols].max()) if len(cols) else 0 for cols in s.levels]
    return LevelStats(sizes, max_subs)
