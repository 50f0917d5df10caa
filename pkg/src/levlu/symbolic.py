"""Symbolic fill-in analysis.

Computes the filled pattern of L+U from the pattern of A before any
numeric work, using per-column depth-first reachability over the
partially built L graph. The result is exactly the set of entries the
left-looking factorization touches; entries are never pruned on
numeric grounds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .sparse import CscPattern, CsrView, make_csr_view


class SymbolicError(ValueError):
    """Raised for structurally unusable input (empty column, missing diagonal)."""


@dataclass(frozen=True)
class FilledPattern:
    """The fill-in pattern of L+U with per-column U/diagonal/L splits.

    Column j's rows are sorted ascending, so the U part (rows < j) is the
    prefix before ``diag_pos[j]`` and the L part (rows > j) the suffix
    after it. ``csr`` gives row-major access to the same nonzero set.
    """

    n: int
    full: CscPattern
    diag_pos: np.ndarray  # absolute slot of (j, j) per column
    csr: CsrView
    nz_before: int

    @property
    def nnz(self) -> int:
        return self.full.nnz

    def u_rows(self, j: int) -> np.ndarray:
        return self.full.row_idx[self.full.col_ptr[j] : self.diag_pos[j]]

    def l_rows(self, j: int) -> np.ndarray:
        return self.full.row_idx[self.diag_pos[j] + 1 : self.full.col_ptr[j + 1]]

    def u_positions(self, j: int) -> np.ndarray:
        return np.arange(self.full.col_ptr[j], self.diag_pos[j])

    def l_positions(self, j: int) -> np.ndarray:
        return np.arange(self.diag_pos[j] + 1, self.full.col_ptr[j + 1])

    @property
    def l_col_nonempty(self) -> np.ndarray:
        return (self.full.col_ptr[1:] - self.diag_pos) > 1

    def subcolumns(self, j: int) -> np.ndarray:
        """Columns k > j with an entry at (j, k), i.e. row j right of the diagonal."""
        cols = self.csr.row_cols(j)
        return cols[cols > j]


@njit(nogil=True, cache=True)
def _reach_column(j, a_rows, fill_rows, l_lo, l_hi, visited, stack, out):
    """Rows reachable from a_rows through L columns left of j. Returns count."""
    cnt = 0
    for p in range(len(a_rows)):
        r = a_rows[p]
        if visited[r] == j:
            continue
        visited[r] = j
        stack[0] = r
        top = 1
        while top > 0:
            top -= 1
            k = stack[top]
            out[cnt] = k
            cnt += 1
            if k < j:
                for q in range(l_lo[k], l_hi[k]):
                    i = fill_rows[q]
                    if visited[i] != j:
                        visited[i] = j
                        stack[top] = i
                        top += 1
    return cnt


def symbolic_fillin(a: CscPattern, inject_diagonal: bool = True) -> FilledPattern:
    """Compute the exact Gilbert-Peierls fill-in pattern of a square pattern.

    Column j's filled pattern is the set of rows reachable from the
    nonzeros of A(:,j) through the graph of already-computed L columns.
    Missing structural diagonals are injected (with a warning) when
    ``inject_diagonal`` is set, otherwise they raise SymbolicError.
    """
    n = a.n
    nz_before = a.nnz
    visited = np.full(n, -1, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    scratch = np.empty(n, dtype=np.int64)

    cap = max(2 * nz_before, 16)
    fill_rows = np.empty(cap, dtype=np.int64)
    col_ptr = np.zeros(n + 1, dtype=np.int64)
    diag_pos = np.empty(n, dtype=np.int64)
    l_lo = np.zeros(n, dtype=np.int64)  # slice of L rows within fill_rows
    l_hi = np.zeros(n, dtype=np.int64)
    injected = 0

    for j in range(n):
        a_rows = a.col_rows(j)
        if len(a_rows) == 0:
            raise SymbolicError(f"column {j} is structurally empty (singular)")
        if not np.any(a_rows == j):
            if not inject_diagonal:
                raise SymbolicError(f"structural diagonal missing in column {j}")
            injected += 1
            a_rows = np.sort(np.append(a_rows, j))
        cnt = _reach_column(j, a_rows, fill_rows, l_lo, l_hi, visited, stack, scratch)
        col = np.sort(scratch[:cnt])
        start = col_ptr[j]
        end = start + cnt
        if end > len(fill_rows):
            grown = np.empty(max(2 * len(fill_rows), end), dtype=np.int64)
            grown[:start] = fill_rows[:start]
            fill_rows = grown
        fill_rows[start:end] = col
        col_ptr[j + 1] = end
        d = start + int(np.searchsorted(col, j))
        diag_pos[j] = d
        l_lo[j] = d + 1
        l_hi[j] = end

    if injected:
        warnings.warn(
            f"injected {injected} structurally missing diagonal entr"
            f"{'y' if injected == 1 else 'ies'}",
            stacklevel=2,
        )
    full = CscPattern(n, col_ptr, fill_rows[: col_ptr[n]].copy())
    return FilledPattern(n, full, diag_pos, make_csr_view(full), nz_before)


def count_fill(fp: FilledPattern) -> tuple[int, int]:
    """Nonzero counts before and after fill-in."""
    return fp.nz_before, fp.nnz
