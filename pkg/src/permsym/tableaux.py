"""Partitions and semistandard Young tableaux.

Partitions are tuples of non-increasing positive ints; a tableau is a tuple
of rows, each a tuple of 0-based symbols.  Counting goes through the exact
hook-length and hook-content products.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial, prod

from .orbits import CountMatrix

Partition = tuple[int, ...]
Tableau = tuple[tuple[int, ...], ...]


def partitions(d: int, n: int) -> list[Partition]:
    """All partitions of n with at most d parts, reverse-lexicographic order."""
    if d < 1 or n < 0:
        raise ValueError("need d >= 1 and n >= 0")
    out: list[Partition] = []

    def rec(remaining: int, max_part: int, prefix: tuple[int, ...]):
        if remaining == 0:
            out.append(prefix)
            return
        if len(prefix) == d:
            return
        for part in range(min(remaining, max_part), 0, -1):
            rec(remaining - part, part, prefix + (part,))

    rec(n, n, ())
    return out


def conjugate(lam: Partition) -> Partition:
    if not lam:
        return ()
    return tuple(sum(1 for p in lam if p > j) for j in range(lam[0]))


def hook_lengths(lam: Partition) -> list[list[int]]:
    conj = conjugate(lam)
    return [
        [lam[i] - j + conj[j] - i - 1 for j in range(lam[i])]
        for i in range(len(lam))
    ]


def syt_count(lam: Partition) -> int:
    """Number of standard Young tableaux (hook-length formula), exact."""
    n = sum(lam)
    hooks = prod(h for row in hook_lengths(lam) for h in row)
    return factorial(n) // hooks


def ssyt_count(lam: Partition, d: int) -> int:
    """Number of semistandard tableaux with entries in [d] (hook-content)."""
    if len(lam) > d:
        return 0
    res = Fraction(1)
    hooks = hook_lengths(lam)
    for i in range(len(lam)):
        for j in range(lam[i]):
            res *= Fraction(d + j - i, hooks[i][j])
    assert res.denominator == 1
    return int(res)


def ssyt_enumerate(lam: Partition, d: int) -> list[Tableau]:
    """All semistandard tableaux of the given shape with 0-based entries in
    range(d): rows non-decreasing, columns strictly increasing.  Ordered
    lexicographically by row-major reading."""
    if not lam:
        return [()]
    if len(lam) > d:
        return []
    rows: list[list[tuple[int, ...]]] = []
    out: list[Tableau] = []

    def fill(rows_done: tuple[tuple[int, ...], ...], i: int):
        if i == len(lam):
            out.append(rows_done)
            return
        width = lam[i]
        above = rows_done[i - 1] if i > 0 else None

        def fill_row(row: tuple[int, ...], j: int):
            if j == width:
                fill(rows_done + (row,), i + 1)
                return
            lo = row[j - 1] if j > 0 else 0
            if above is not None:
                lo = max(lo, above[j] + 1)
            for v in range(lo, d):
                fill_row(row + (v,), j + 1)

        fill_row((), 0)

    fill((), 0)
    return out


def constant_tableau(lam: Partition) -> Tableau:
    """Row i filled with symbol i."""
    return tuple(tuple([i] * lam[i]) for i in range(len(lam)))


def is_semistandard(t: Tableau) -> bool:
    for i, row in enumerate(t):
        for j in range(1, len(row)):
            if row[j] < row[j - 1]:
                return False
        if i > 0:
            prev = t[i - 1]
            if len(row) > len(prev):
                return False
            for j in range(len(row)):
                if row[j] <= prev[j]:
                    return False
    return True


def shape_of(t: Tableau) -> Partition:
    return tuple(len(row) for row in t)


def weight(t: Tableau, d: int) -> tuple[int, ...]:
    """Occurrences of every symbol; tableaux of distinct weight give
    orthogonal symmetrized vectors."""
    w = [0] * d
    for row in t:
        for v in row:
            w[v] += 1
    return tuple(w)


def row_count_matrix(t: Tableau, d: int) -> CountMatrix:
    """Count matrix pairing a tableau against the constant tableau of its
    shape: entry (a, b) counts boxes in row b holding symbol a.  Lower
    triangular for semistandard fillings."""
    ent = [0] * (d * d)
    for b, row in enumerate(t):
        for a in row:
            ent[a * d + b] += 1
    return CountMatrix(tuple(ent), d)


def count_to_shape(E: CountMatrix) -> Partition:
    """Partition from column sums of a count matrix, sorted non-increasing."""
    d = E.d
    cols = [sum(E.get(a, b) for a in range(d)) for b in range(d)]
    return tuple(sorted((c for c in cols if c > 0), reverse=True))
