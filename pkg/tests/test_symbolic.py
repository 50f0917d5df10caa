"""Fill-in analysis against a dense elimination oracle."""

import numpy as np
import pytest

import levlu as lv

from conftest import random_pattern


def dense_fill_oracle(pattern_dense):
    """Boolean Gaussian elimination: the filled pattern of L+U.

    Structural only, so it never cancels; this is the reference the
    sparse reachability computation must reproduce exactly.
    """
    f = pattern_dense.copy()
    n = f.shape[0]
    np.fill_diagonal(f, True)
    for k in range(n):
        below = np.nonzero(f[k + 1:, k])[0] + k + 1
        right = np.nonzero(f[k, k + 1:])[0] + k + 1
        f[np.ix_(below, right)] = True
    return f


def filled_to_dense(fp):
    d = np.zeros((fp.n, fp.n), dtype=bool)
    for j in range(fp.n):
        d[fp.full.col_rows(j), j] = True
    return d


@pytest.mark.parametrize("seed,n,density", [
    (0, 10, 0.2), (1, 25, 0.1), (2, 40, 0.08), (3, 60, 0.05), (4, 80, 0.04),
])
def test_fill_matches_dense_oracle(seed, n, density):
    rng = np.random.default_rng(seed)
    a = random_pattern(rng, n, density)
    fp = lv.symbolic_fillin(a.pattern)
    expect = dense_fill_oracle(a.to_dense() != 0)
    assert np.array_equal(filled_to_dense(fp), expect)


def test_fill_known_small_case():
    # entries (1,0) and (0,2) force fill at (1,2)
    rows = np.array([0, 1, 2, 1, 0])
    cols = np.array([0, 1, 2, 0, 2])
    a = lv.to_csc(lv.Triplets(3, 3, rows, cols, np.ones(5)))
    fp = lv.symbolic_fillin(a.pattern)
    assert fp.full.has_entry(1, 2)
    assert fp.nz_before == 5
    assert fp.nnz == 6
    assert lv.count_fill(fp) == (5, 6)


def test_column_splits():
    rng = np.random.default_rng(9)
    a = random_pattern(rng, 30, 0.1)
    fp = lv.symbolic_fillin(a.pattern)
    for j in range(fp.n):
        assert np.all(fp.u_rows(j) < j)
        assert np.all(fp.l_rows(j) > j)
        assert fp.full.row_idx[fp.diag_pos[j]] == j
        assert fp.l_col_nonempty[j] == (len(fp.l_rows(j)) > 0)


def test_subcolumns_are_row_right_of_diagonal():
    rng = np.random.default_rng(10)
    a = random_pattern(rng, 30, 0.1)
    fp = lv.symbolic_fillin(a.pattern)
    d = filled_to_dense(fp)
    for j in range(fp.n):
        assert np.array_equal(fp.subcolumns(j), np.nonzero(d[j, j + 1:])[0] + j + 1)


def test_missing_diagonal_injected_with_warning():
    rows = np.array([1, 0, 1])
    cols = np.array([0, 1, 1])
    a = lv.to_csc(lv.Triplets(2, 2, rows, cols, np.ones(3)))
    with pytest.warns(UserWarning, match="diagonal"):
        fp = lv.symbolic_fillin(a.pattern)
    assert fp.full.has_entry(0, 0)


def test_missing_diagonal_rejected_when_strict():
    rows = np.array([1, 0, 1])
    cols = np.array([0, 1, 1])
    a = lv.to_csc(lv.Triplets(2, 2, rows, cols, np.ones(3)))
    with pytest.raises(lv.SymbolicError):
        lv.symbolic_fillin(a.pattern, inject_diagonal=False)


def test_empty_column_rejected():
    rows = np.array([0, 2])
    cols = np.array([0, 2])
    a = lv.to_csc(lv.Triplets(3, 3, rows, cols, np.ones(2)))
    with pytest.raises(lv.SymbolicError, match="empty"):
        lv.symbolic_fillin(a.pattern)
