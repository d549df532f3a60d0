from math import comb

import pytest

from permsym.tableaux import (
    conjugate,
    constant_tableau,
    count_to_shape,
    is_semistandard,
    partitions,
    row_count_matrix,
    shape_of,
    ssyt_count,
    ssyt_enumerate,
    syt_count,
    weight,
)


class TestPartitions:
    def test_d2_examples(self):
        assert partitions(2, 3) == [(3,), (2, 1)]
        assert partitions(2, 4) == [(4,), (3, 1), (2, 2)]

    def test_d1(self):
        for n in (1, 2, 5):
            assert partitions(1, n) == [(n,)]

    def test_n0(self):
        assert partitions(3, 0) == [()]

    def test_reverse_lexicographic(self):
        for d, n in [(2, 6), (3, 5), (4, 6)]:
            ps = partitions(d, n)
            assert ps == sorted(ps, reverse=True)
            assert all(sum(p) == n and len(p) <= d for p in ps)
            assert all(all(p[i] >= p[i + 1] for i in range(len(p) - 1)) for p in ps)

    def test_count_bound(self):
        for d, n in [(2, 8), (3, 6)]:
            assert len(partitions(d, n)) <= (n + 1) ** d


class TestCounts:
    def test_syt_single_row(self):
        for n in (1, 4, 9):
            assert syt_count((n,)) == 1

    def test_syt_hook_example(self):
        assert syt_count((2, 1)) == 2

    def test_schur_weyl_dimension_identity(self):
        # sum of m * f over shapes reproduces the full tensor power dimension
        for d, n in [(2, 4), (2, 8), (3, 5)]:
            total = sum(ssyt_count(lam, d) * syt_count(lam) for lam in partitions(d, n))
            assert total == d**n

    def test_ssyt_single_row(self):
        for n in (1, 3, 6):
            assert ssyt_count((n,), 2) == n + 1

    def test_ssyt_single_column(self):
        for d in (2, 3, 4):
            assert ssyt_count((1,) * d, d) == 1

    def test_orbit_dimension_identity(self):
        # sum of m^2 equals the orbit count
        for d, n in [(2, 3), (2, 6), (3, 4)]:
            total = sum(ssyt_count(lam, d) ** 2 for lam in partitions(d, n))
            assert total == comb(n + d * d - 1, d * d - 1)

    def test_enumeration_matches_count(self):
        for d in (2, 3):
            for n in range(0, 6):
                for lam in partitions(d, n):
                    tabs = ssyt_enumerate(lam, d)
                    assert len(tabs) == ssyt_count(lam, d)
                    assert all(is_semistandard(t) for t in tabs)
                    assert len(set(tabs)) == len(tabs)


class TestTableauHelpers:
    def test_constant_tableau(self):
        t = constant_tableau((3, 1))
        assert t == ((0, 0, 0), (1,))
        assert is_semistandard(t)

    def test_conjugate(self):
        assert conjugate((3, 1)) == (2, 1, 1)
        assert conjugate(()) == ()

    def test_weight_and_row_counts(self):
        t = ((0, 1), (1,))
        assert weight(t, 2) == (1, 2)
        E = row_count_matrix(t, 2)
        # symbol 0 once in row 0; symbol 1 once in each row
        assert E.get(0, 0) == 1 and E.get(1, 0) == 1 and E.get(1, 1) == 1

    def test_count_to_shape(self):
        t = ((0, 1), (1,))
        E = row_count_matrix(t, 2)
        assert count_to_shape(E) == (2, 1)
