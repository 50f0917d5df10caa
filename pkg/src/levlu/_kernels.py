"""Numba kernels for the numeric factorization paths.

All kernels release the GIL so the level-parallel executor gets real
concurrency from a thread pool. fastmath stays off: the bitwise
equivalence of the three factorization paths depends on every MAC being
the same two rounded operations (multiply, then subtract) everywhere.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(nogil=True, cache=True)
def scatter_values(n, a_colptr, a_rows, a_vals, f_colptr, f_rows, out):
    """Scatter A's values into the filled-pattern slots; zero-fill the rest.

    Returns -1, or the first column whose A entries are not all present
    in the filled pattern (symbolic/numeric mismatch).
    """
    out[:] = 0.0
    for j in range(n):
        q = f_colptr[j]
        hi = f_colptr[j + 1]
        for p in range(a_colptr[j], a_colptr[j + 1]):
            r = a_rows[p]
            while q < hi and f_rows[q] < r:
                q += 1
            if q >= hi or f_rows[q] != r:
                return j
            out[q] = a_vals[p]
            q += 1
    return -1


@njit(nogil=True, cache=True)
def left_columns(cols, colptr, rows, diagpos, v, x, thresh):
    """Left-looking factorization of the given columns, in order.

    Each column is gathered into the dense workspace x, updated by every
    factorized column named in its U part, pivot-checked, divided and
    scattered back. Returns the failing column on pivot breakdown, -1
    otherwise. Requires every column in ``cols`` to have all of its U-part
    source columns already factorized.
    """
    for c in range(len(cols)):
        j = cols[c]
        lo = colptr[j]
        hi = colptr[j + 1]
        d = diagpos[j]
        for p in range(lo, hi):
            x[rows[p]] = v[p]
        for p in range(lo, d):
            k = rows[p]
            if colptr[k + 1] - diagpos[k] > 1:  # L column k non-empty
                xk = x[k]
                for q in range(diagpos[k] + 1, colptr[k + 1]):
                    x[rows[q]] -= v[q] * xk
        piv = x[j]
        cmax = 0.0
        for p in range(lo, hi):
            av = abs(x[rows[p]])
            if av > cmax:
                cmax = av
        if abs(piv) <= thresh * cmax:
            for p in range(lo, hi):
                x[rows[p]] = 0.0
            return j
        for p in range(d + 1, hi):
            x[rows[p]] /= piv
        for p in range(lo, hi):
            r = rows[p]
            v[p] = x[r]
            x[r] = 0.0
    return -1


@njit(nogil=True, cache=True)
def right_looking_seq(n, colptr, rows, diagpos, v, rowptr, rowcols, rowpos, thresh):
    """Sequential hybrid right-looking factorization, in place over v.

    For each column: pivot check, divide the L part, then push a
    subcolumn update into every column k > j with an entry at (j, k).
    Returns the failing column on pivot breakdown, -1 otherwise.
    """
    for j in range(n):
        lo = colptr[j]
        hi = colptr[j + 1]
        d = diagpos[j]
        piv = v[d]
        cmax = 0.0
        for p in range(lo, hi):
            av = abs(v[p])
            if av > cmax:
                cmax = av
        if abs(piv) <= thresh * cmax:
            return j
        for p in range(d + 1, hi):
            v[p] /= piv
        for t in range(rowptr[j], rowptr[j + 1]):
            k = rowcols[t]
            if k <= j:
                continue
            mult = v[rowpos[t]]
            # merge L rows of j into column k's sorted row list
            q = colptr[k]
            khi = colptr[k + 1]
            for p in range(d + 1, hi):
                r = rows[p]
                while q < khi and rows[q] < r:
                    q += 1
                if q >= khi or rows[q] != r:
                    return -2  # target slot absent: symbolic/numeric mismatch
                v[q] -= v[p] * mult
    return -1


@njit(nogil=True, cache=True)
def push_updates_owned(cols, owner, n_owners, colptr, rows, diagpos, v, rowptr, rowcols, rowpos):
    """Atomic-mode update push for one worker over a level's source columns.

    Every subcolumn update into a destination column k is applied by the
    single worker owning k (k mod n_owners == owner), so concurrent
    workers never touch the same slot. Sources are still undivided here;
    each MAC uses (A_s(i,j) / pivot) * A_s(j,k), bitwise the value the
    sequential path stores for L before multiplying. Returns -2 on a
    structurally absent target slot, -1 otherwise.
    """
    for c in range(len(cols)):
        j = cols[c]
        d = diagpos[j]
        hi = colptr[j + 1]
        piv = v[d]
        for t in range(rowptr[j], rowptr[j + 1]):
            k = rowcols[t]
            if k <= j or k % n_owners != owner:
                continue
            mult = v[rowpos[t]]
            q = colptr[k]
            khi = colptr[k + 1]
            for p in range(d + 1, hi):
                r = rows[p]
                while q < khi and rows[q] < r:
                    q += 1
                if q >= khi or rows[q] != r:
                    return -2
                v[q] -= (v[p] / piv) * mult
    return -1


@njit(nogil=True, cache=True)
def divide_columns(cols, colptr, rows, diagpos, v, thresh):
    """Pivot-check and divide the L part of each given column in place.

    Returns the first failing column on pivot breakdown, -1 otherwise.
    """
    for c in range(len(cols)):
        j = cols[c]
        lo = colptr[j]
        hi = colptr[j + 1]
        d = diagpos[j]
        piv = v[d]
        cmax = 0.0
        for p in range(lo, hi):
            av = abs(v[p])
            if av > cmax:
                cmax = av
        if abs(piv) <= thresh * cmax:
            return j
        for p in range(d + 1, hi):
            v[p] /= piv
    return -1


@njit(nogil=True, cache=True)
def lower_solve_inplace(n, colptr, rows, diagpos, v, y):
    """Solve L y = b in place (unit diagonal, L strictly below)."""
    for j in range(n):
        yj = y[j]
        if yj != 0.0:
            for p in range(diagpos[j] + 1, colptr[j + 1]):
                y[rows[p]] -= v[p] * yj


@njit(nogil=True, cache=True)
def upper_solve_inplace(n, colptr, rows, diagpos, v, y):
    """Solve U x = y in place; returns the column of a zero diagonal, else -1."""
    for j in range(n - 1, -1, -1):
        piv = v[diagpos[j]]
        if piv == 0.0:
            return j
        xj = y[j] / piv
        y[j] = xj
        for p in range(colptr[j], diagpos[j]):
            y[rows[p]] -= v[p] * xj
    return -1
