"""Shared fixtures and matrix generators for the test suite."""

import pathlib

import numpy as np
import pytest

import levlu as lv

DATA = pathlib.Path(__file__).parent / "data"


def random_dd_matrix(rng, n, density):
    """Random sparse diagonally dominant CscMatrix with a full diagonal."""
    m = max(int(density * n * n), n)
    rows = rng.integers(0, n, size=m)
    cols = rng.integers(0, n, size=m)
    vals = rng.uniform(-1.0, 1.0, size=m)
    rows = np.concatenate([rows, np.arange(n)])
    cols = np.concatenate([cols, np.arange(n)])
    vals = np.concatenate([vals, np.zeros(n)])
    a = lv.to_csc(lv.Triplets(n, n, rows, cols, vals))
    # push the diagonal above each row's off-diagonal mass
    dense_abs_rowsum = np.zeros(n)
    np.add.at(dense_abs_rowsum, a.row_idx, np.abs(a.values))
    vals = a.values.copy()
    for j in range(n):
        lo, hi = a.col_ptr[j], a.col_ptr[j + 1]
        d = lo + int(np.searchsorted(a.row_idx[lo:hi], j))
        vals[d] = dense_abs_rowsum[j] + 1.0
    return lv.CscMatrix(a.n, a.col_ptr, a.row_idx, vals)


def random_pattern(rng, n, density=0.1):
    """Random CscMatrix used only for its sparsity structure."""
    return random_dd_matrix(rng, n, density)


def banded_matrix(n, half_bw=8, seed=0):
    """Banded diagonally dominant matrix of half-bandwidth half_bw."""
    rng = np.random.default_rng(seed)
    offs = np.arange(-half_bw, half_bw + 1)
    rows, cols = [], []
    for o in offs:
        idx = np.arange(max(0, -o), min(n, n - o))
        rows.append(idx + o)
        cols.append(idx)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = rng.uniform(0.1, 1.0, size=len(rows))
    vals[rows == cols] += 2.0 * (2 * half_bw + 1)
    return lv.to_csc(lv.Triplets(n, n, rows, cols, vals))


def block_arrow_matrix(nblocks=20, bs=256, seed=7):
    """Dense diagonal blocks plus a dense last row and column.

    Columns across different blocks are mutually independent, so the
    schedule has nblocks-wide levels throughout.
    """
    rng = np.random.default_rng(seed)
    n = nblocks * bs + 1
    rows, cols, vals = [], [], []
    for b in range(nblocks):
        off = b * bs
        r, c = np.meshgrid(np.arange(bs), np.arange(bs), indexing="ij")
        rows.append((r + off).ravel())
        cols.append((c + off).ravel())
        vals.append(rng.uniform(0.1, 1.0, size=bs * bs))
    last = n - 1
    rows.append(np.full(n - 1, last))
    cols.append(np.arange(n - 1))
    vals.append(rng.uniform(0.1, 1.0, n - 1))
    rows.append(np.arange(n - 1))
    cols.append(np.full(n - 1, last))
    vals.append(rng.uniform(0.1, 1.0, n - 1))
    rows.append(np.array([last]))
    cols.append(np.array([last]))
    vals.append(np.array([1.0]))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    diag = rows == cols
    rowsum = np.zeros(n)
    np.add.at(rowsum, rows, np.abs(vals))
    vals[diag] += rowsum[rows[diag]]
    return lv.to_csc(lv.Triplets(n, n, rows, cols, vals))


def analyze(a, detect=lv.detect_relaxed):
    """Fill-in, dependencies and levels in one call."""
    fp = lv.symbolic_fillin(a.pattern)
    g = detect(fp)
    s = lv.levelize(g)
    return fp, g, s


@pytest.fixture(scope="session")
def conflict8():
    with open(DATA / "conflict8.mtx") as fh:
        return lv.to_csc(lv.load_matrix_market(fh))


@pytest.fixture(scope="session")
def conflict8_filled(conflict8):
    return lv.symbolic_fillin(conflict8.pattern)
