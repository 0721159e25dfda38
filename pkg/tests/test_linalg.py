"""Exact sparse linear algebra: echelon bases, rank, nullspace, solve."""

import random
from fractions import Fraction

from formald.linalg import ColumnEchelon, Matrix, intersection_dim


def dense_to_cols(rows):
    nrows = len(rows)
    ncols = len(rows[0])
    cols = []
    for j in range(ncols):
        col = {}
        for i in range(nrows):
            if rows[i][j]:
                col[i] = Fraction(rows[i][j])
        cols.append(col)
    return Matrix.from_cols(cols, nrows)


def test_rank_and_nullity():
    m = dense_to_cols([[1, 2, 3], [2, 4, 6], [0, 1, 1]])
    assert m.rank() == 2
    assert m.nullity() == 1


def test_nullspace_vectors_annihilate():
    rng = random.Random(0)
    for _ in range(20):
        nrows, ncols = rng.randint(2, 5), rng.randint(2, 6)
        rows = [[rng.randint(-3, 3) for _ in range(ncols)] for _ in range(nrows)]
        m = dense_to_cols(rows)
        basis = m.nullspace()
        assert len(basis) == m.nullity()
        for vec in basis:
            assert not m.apply(vec)


def test_solve_consistency():
    rng = random.Random(1)
    for _ in range(20):
        nrows, ncols = rng.randint(2, 5), rng.randint(2, 5)
        rows = [[rng.randint(-3, 3) for _ in range(ncols)] for _ in range(nrows)]
        m = dense_to_cols(rows)
        x = {j: Fraction(rng.randint(-2, 2)) for j in range(ncols)}
        rhs = m.apply(x)
        sol = m.solve(rhs)
        assert sol is not None
        assert m.apply(sol) == rhs


def test_solve_detects_infeasible():
    m = dense_to_cols([[1, 0], [0, 0]])
    assert m.solve({1: Fraction(1)}) is None


def test_echelon_membership_and_projection():
    ech = ColumnEchelon()
    ech.add({0: Fraction(1), 1: Fraction(1)}, "a")
    ech.add({1: Fraction(1)}, "b")
    assert ech.contains({0: Fraction(2), 1: Fraction(5)})
    residual = ech.project({2: Fraction(3), 0: Fraction(1)})
    assert residual == {2: Fraction(3)}


def test_intersection_dim():
    a = [{0: Fraction(1)}, {1: Fraction(1)}]
    b = [{1: Fraction(1)}, {2: Fraction(1)}]
    assert intersection_dim(a, b) == 1
    assert intersection_dim(a, [{2: Fraction(1)}]) == 0


def test_compose_matches_manual():
    a = dense_to_cols([[1, 2], [0, 1]])
    b = dense_to_cols([[1, 0], [1, 1]])
    ab = a.compose(b)
    assert ab.cols == dense_to_cols([[3, 2], [1, 1]]).cols
