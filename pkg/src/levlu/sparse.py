"""Compressed sparse column storage, Matrix Market ingestion and permutations.

Everything downstream (symbolic analysis, dependency detection, numeric
factorization) works on the immutable CSC/CSR containers defined here.
Indices are 0-based internally; Matrix Market's 1-based convention is
converted at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MatrixFormatError(ValueError):
    """Raised on malformed or unsupported Matrix Market input."""


@dataclass
class Triplets:
    """Raw (row, col, value) entries as read from a file.

    Duplicates are permitted here; they are summed by :func:`to_csc`.
    """

    n_rows: int
    n_cols: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.int64)
        self.cols = np.asarray(self.cols, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.rows) != len(self.cols) or len(self.rows) != len(self.values):
            raise ValueError("triplet arrays must have equal length")
        if len(self.rows) and (
            self.rows.min() < 0
            or self.rows.max() >= self.n_rows
            or self.cols.min() < 0
            or self.cols.max() >= self.n_cols
        ):
            raise MatrixFormatError("triplet index out of declared bounds")

    @property
    def nnz(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class CscPattern:
    """Sparsity structure of a square matrix in compressed-column form.

    Row indices are strictly increasing within each column and no
    duplicate (row, col) position is stored.
    """

    n: int
    col_ptr: np.ndarray  # int64, length n+1
    row_idx: np.ndarray  # int64, length nnz

    @property
    def nnz(self) -> int:
        return int(self.col_ptr[-1])

    def col_rows(self, j: int) -> np.ndarray:
        return self.row_idx[self.col_ptr[j] : self.col_ptr[j + 1]]

    def has_entry(self, i: int, j: int) -> bool:
        rows = self.col_rows(j)
        k = np.searchsorted(rows, i)
        return k < len(rows) and rows[k] == i

    def validate(self) -> None:
        if len(self.col_ptr) != self.n + 1 or self.col_ptr[0] != 0:
            raise ValueError("bad col_ptr")
        if np.any(np.diff(self.col_ptr) < 0):
            raise ValueError("col_ptr must be non-decreasing")
        for j in range(self.n):
            rows = self.col_rows(j)
            if len(rows) > 1 and np.any(np.diff(rows) <= 0):
                raise ValueError(f"rows of column {j} not strictly increasing")


@dataclass(frozen=True)
class CscMatrix:
    """Square sparse matrix in compressed-column form with values."""

    n: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.col_ptr[-1])

    @property
    def pattern(self) -> CscPattern:
        return CscPattern(self.n, self.col_ptr, self.row_idx)

    def col_rows(self, j: int) -> np.ndarray:
        return self.row_idx[self.col_ptr[j] : self.col_ptr[j + 1]]

    def col_values(self, j: int) -> np.ndarray:
        return self.values[self.col_ptr[j] : self.col_ptr[j + 1]]

    def to_dense(self) -> np.ndarray:
        d = np.zeros((self.n, self.n), dtype=self.values.dtype)
        for j in range(self.n):
            d[self.col_rows(j), j] = self.col_values(j)
        return d

    def extract_triplets(self) -> Triplets:
        cols = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.col_ptr))
        return Triplets(self.n, self.n, self.row_idx.copy(), cols, self.values.copy())


@dataclass(frozen=True)
class CsrView:
    """Row-major view of a CscPattern.

    ``csc_pos[t]`` maps the t-th CSR entry back to its slot in the source
    CSC arrays, so row scans can read or address column-stored values.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    csc_pos: np.ndarray

    def row_cols(self, i: int) -> np.ndarray:
        return self.col_idx[self.row_ptr[i] : self.row_ptr[i + 1]]

    def row_pos(self, i: int) -> np.ndarray:
        return self.csc_pos[self.row_ptr[i] : self.row_ptr[i + 1]]


@dataclass(frozen=True)
class Permutation:
    """A permutation with its inverse; forward[old] = new position."""

    forward: np.ndarray
    inverse: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        fwd = np.asarray(self.forward, dtype=np.int64)
        object.__setattr__(self, "forward", fwd)
        n = len(fwd)
        if sorted(fwd.tolist()) != list(range(n)):
            raise ValueError("not a permutation of 0..n-1")
        if self.inverse is None:
            inv = np.empty(n, dtype=np.int64)
            inv[fwd] = np.arange(n, dtype=np.int64)
            object.__setattr__(self, "inverse", inv)

    @property
    def n(self) -> int:
        return len(self.forward)

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(np.arange(n, dtype=np.int64))


def load_matrix_market(stream) -> Triplets:
    """Parse a Matrix Market coordinate file into Triplets.

    Supports real/integer fields with general or symmetric symmetry.
    Symmetric inputs are expanded to the full nonzero set. Raises
    MatrixFormatError for pattern matrices, non-square sizes, malformed
    headers or out-of-bounds indices.
    """
    header = stream.readline()
    if isinstance(header, bytes):
        raise MatrixFormatError("expected a text stream")
    parts = header.strip().split()
    if len(parts) != 5 or parts[0] != "%%MatrixMarket" or parts[1].lower() != "matrix":
        raise MatrixFormatError(f"malformed MatrixMarket header: {header.strip()!r}")
    fmt, fld, sym = parts[2].lower(), parts[3].lower(), parts[4].lower()
    if fmt != "coordinate":
        raise MatrixFormatError(f"unsupported format {fmt!r} (coordinate required)")
    if fld == "pattern":
        raise MatrixFormatError("pattern matrices carry no values")
    if fld not in ("real", "integer"):
        raise MatrixFormatError(f"unsupported field {fld!r}")
    if sym not in ("general", "symmetric"):
        raise MatrixFormatError(f"unsupported symmetry {sym!r}")

    line = stream.readline()
    while line and line.lstrip().startswith("%"):
        line = stream.readline()
    dims = line.split()
    if len(dims) != 3:
        raise MatrixFormatError(f"malformed size line: {line.strip()!r}")
    n_rows, n_cols, nnz = int(dims[0]), int(dims[1]), int(dims[2])
    if n_rows != n_cols:
        raise MatrixFormatError(f"matrix must be square, got {n_rows}x{n_cols}")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    count = 0
    for line in stream:
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        toks = s.split()
        if len(toks) < 3:
            raise MatrixFormatError(f"malformed entry line: {s!r}")
        i, j, v = int(toks[0]) - 1, int(toks[1]) - 1, float(toks[2])
        if count >= nnz:
            raise MatrixFormatError("more entries than declared")
        if not (0 <= i < n_rows and 0 <= j < n_cols):
            raise MatrixFormatError(f"index ({i + 1},{j + 1}) out of bounds")
        rows[count], cols[count], vals[count] = i, j, v
        count += 1
    if count != nnz:
        raise MatrixFormatError(f"declared {nnz} entries, found {count}")

    if sym == "symmetric":
        off = rows != cols
        mirror_rows, mirror_cols, mirror_vals = cols[off], rows[off], vals[off]
        rows = np.concatenate([rows, mirror_rows])
        cols = np.concatenate([cols, mirror_cols])
        vals = np.concatenate([vals, mirror_vals])
    return Triplets(n_rows, n_cols, rows, cols, vals)


def to_csc(t: Triplets, dtype=np.float64) -> CscMatrix:
    """Normalize triplets into CSC form: columns sorted, duplicates summed."""
    if t.n_rows != t.n_cols:
        raise MatrixFormatError("matrix must be square")
    n = t.n_cols
    # sort by (col, row), then collapse duplicates
    order = np.lexsort((t.rows, t.cols))
    rows = t.rows[order]
    cols = t.cols[order]
    vals = t.values[order].astype(dtype)
    if len(rows):
        keep = np.empty(len(rows), dtype=bool)
        keep[0] = True
        keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        group = np.cumsum(keep) - 1
        summed = np.zeros(int(group[-1]) + 1, dtype=dtype)
        np.add.at(summed, group, vals)
        rows, cols, vals = rows[keep], cols[keep], summed
    col_ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(col_ptr, cols + 1, 1)
    np.cumsum(col_ptr, out=col_ptr)
    return CscMatrix(n, col_ptr, rows.astype(np.int64), vals)


def permute(a: CscMatrix, p_row: Permutation, p_col: Permutation) -> CscMatrix:
    """Apply row/column permutations: result(i,j) = a(p_row.inv[i], p_col.inv[j])."""
    if p_row.n != a.n or p_col.n != a.n:
        raise ValueError("permutation size mismatch")
    t = a.extract_triplets()
    return to_csc(
        Triplets(a.n, a.n, p_row.forward[t.rows], p_col.forward[t.cols], t.values),
        dtype=a.values.dtype,
    )


def make_csr_view(p: CscPattern) -> CsrView:
    """Build the row-major view of a column pattern with a CSC back-map."""
    n = p.n
    nnz = p.nnz
    rows = p.row_idx
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(row_ptr, rows + 1, 1)
    np.cumsum(row_ptr, out=row_ptr)
    cols = np.repeat(np.arange(n, dtype=np.int64), np.diff(p.col_ptr))
    # stable sort by row keeps the column-ascending order within each row
    order = np.argsort(rows, kind="stable")
    return CsrView(n, row_ptr, cols[order], order)


def load_permutation(stream, n: int) -> Permutation:
    """Read a permutation file: one 0-based index per line, length n."""
    idx = [int(line) for line in stream if line.strip()]
    if len(idx) != n:
        raise ValueError(f"permutation has {len(idx)} entries, expected {n}")
    return Permutation(np.array(idx, dtype=np.int64))
