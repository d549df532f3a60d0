"""Orbit basis of permutation-invariant operators on n-fold tensor products.

The diagonal action of the symmetric group on pairs of length-n multi-indices
partitions them into orbits.  Each orbit is labelled by a d x d grid of
nonnegative integers (a "count matrix") summing to n, and the 0/1 incidence
matrix of an orbit is an element of an orthogonal basis of the space of
permutation-invariant operators.  Everything in this module manipulates
count matrices and sparse coefficient vectors over them; the exponentially
large incidence matrices are never built outside of the dense oracles used
for validation.

Symbols are 0-based internally; user-facing docs and error messages count
from 1 like the usual convention {1..d}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial, prod
from typing import Iterator, Optional

import numpy as np

from .errors import BasisMismatchError, CapacityError

#: default cap on the number of enumerated orbits
DEFAULT_ORBIT_BUDGET = 50_000_000


@dataclass(frozen=True)
class SystemSpec:
    """An n-fold tensor power of a product of elementary factors.

    local_dims lists the dimension of each elementary factor of a single
    copy (e.g. ``(d_A, d_B)`` for a channel's joint input/output space);
    copies is the tensor power n.
    """

    local_dims: tuple[int, ...]
    copies: int

    def __post_init__(self):
        if self.copies < 1:
            raise ValueError("copies must be >= 1")
        if not self.local_dims or any(d < 1 for d in self.local_dims):
            raise ValueError("all local dimensions must be >= 1")
        object.__setattr__(self, "local_dims", tuple(int(d) for d in self.local_dims))

    @property
    def dim(self) -> int:
        """Total single-copy dimension."""
        return prod(self.local_dims)

    @property
    def n(self) -> int:
        return self.copies


@dataclass(frozen=True)
class CountMatrix:
    """d x d grid of nonnegative integers summing to n; canonical orbit label.

    entries is the row-major flattening of the grid.
    """

    entries: tuple[int, ...]
    d: int

    def __post_init__(self):
        if len(self.entries) != self.d * self.d:
            raise ValueError("entries must have length d*d")
        if any(e < 0 for e in self.entries):
            raise ValueError("count matrix entries must be nonnegative")

    @classmethod
    def from_array(cls, arr) -> "CountMatrix":
        arr = np.asarray(arr, dtype=int)
        d = arr.shape[0]
        if arr.shape != (d, d):
            raise ValueError("count matrix must be square")
        return cls(tuple(int(v) for v in arr.reshape(-1)), d)

    @property
    def n(self) -> int:
        return sum(self.entries)

    def get(self, a: int, b: int) -> int:
        return self.entries[a * self.d + b]

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=int).reshape(self.d, self.d)

    def transpose(self) -> "CountMatrix":
        d = self.d
        return CountMatrix(
            tuple(self.entries[b * d + a] for a in range(d) for b in range(d)), d
        )

    def is_diagonal(self) -> bool:
        d = self.d
        return all(
            self.entries[a * d + b] == 0 for a in range(d) for b in range(d) if a != b
        )

    def nonzero_positions(self) -> tuple[tuple[int, int], ...]:
        d = self.d
        return tuple(
            (a, b) for a in range(d) for b in range(d) if self.entries[a * d + b] > 0
        )


def count_of_pair(i: tuple[int, ...], j: tuple[int, ...], d: int) -> CountMatrix:
    """Count matrix of a multi-index pair: entry (a,b) counts positions k with
    i_k = a and j_k = b.  Invariant under simultaneous permutation of i and j.
    """
    if len(i) != len(j):
        raise ValueError("multi-indices must have equal length")
    ent = [0] * (d * d)
    for a, b in zip(i, j):
        if not (0 <= a < d and 0 <= b < d):
            raise ValueError("multi-index symbol out of range")
        ent[a * d + b] += 1
    return CountMatrix(tuple(ent), d)


def representative(E: CountMatrix) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Deterministic representative pair: row-major over (a,b), append
    E[a,b] copies of (a,b)."""
    i: list[int] = []
    j: list[int] = []
    d = E.d
    for a in range(d):
        for b in range(d):
            c = E.get(a, b)
            i.extend([a] * c)
            j.extend([b] * c)
    return tuple(i), tuple(j)


def orbit_size(E: CountMatrix) -> int:
    """Number of multi-index pairs in the orbit; equals the squared
    Hilbert-Schmidt norm of the incidence matrix.  Exact multinomial."""
    n = E.n
    res = factorial(n)
    for e in E.entries:
        res //= factorial(e)
    return res


def trace_orbit(E: CountMatrix) -> int:
    """Trace of the incidence matrix: zero unless E is diagonal, else the
    multinomial over the diagonal entries."""
    if not E.is_diagonal():
        return 0
    res = factorial(E.n)
    for a in range(E.d):
        res //= factorial(E.get(a, a))
    return res


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Weak compositions of `total` into `parts` parts, lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass
class OrbitBasis:
    """Canonically ordered list of count matrices labelling the orbit basis.

    When `support` is given (a set of 0-based single-copy positions (a, b)),
    only count matrices vanishing outside the support are enumerated; the
    ordering is the one induced by lexicographic order on the full row-major
    entry vector, so restricted and unrestricted bases order shared orbits
    identically.
    """

    spec: SystemSpec
    support: Optional[frozenset[tuple[int, int]]] = None
    budget: int = DEFAULT_ORBIT_BUDGET
    orbits: list[CountMatrix] = field(init=False, repr=False)
    index: dict[tuple[int, ...], int] = field(init=False, repr=False)

    def __post_init__(self):
        d = self.spec.dim
        n = self.spec.copies
        if self.support is not None:
            self.support = frozenset((int(a), int(b)) for a, b in self.support)
            for a, b in self.support:
                if not (0 <= a < d and 0 <= b < d):
                    raise ValueError("support position out of range")
            positions = sorted(self.support, key=lambda ab: ab[0] * d + ab[1])
        else:
            positions = [(a, b) for a in range(d) for b in range(d)]
        k = len(positions)
        count = comb(n + k - 1, k - 1) if k > 0 else (1 if n == 0 else 0)
        if count > self.budget:
            raise CapacityError(count, self.budget)
        flat_pos = [a * d + b for a, b in positions]
        orbits = []
        for compo in _compositions(n, k) if k else iter(()):
            ent = [0] * (d * d)
            for p, c in zip(flat_pos, compo):
                ent[p] = c
            orbits.append(CountMatrix(tuple(ent), d))
        self.orbits = orbits
        self.index = {E.entries: r for r, E in enumerate(orbits)}
        self._sizes = [orbit_size(E) for E in orbits]
        self._traces = [trace_orbit(E) for E in orbits]

    def __len__(self) -> int:
        return len(self.orbits)

    def index_of(self, E: CountMatrix) -> int:
        try:
            return self.index[E.entries]
        except KeyError:
            raise KeyError(f"count matrix {E.entries} not in basis") from None

    def sizes(self) -> list[int]:
        """Orbit sizes |O_r| (exact integers), basis order."""
        return self._sizes

    def traces(self) -> list[int]:
        """Incidence-matrix traces, basis order."""
        return self._traces

    def transpose_permutation(self) -> np.ndarray:
        """perm[r] = index of the transposed count matrix of orbit r.

        Requires the support (if any) to be closed under transposition.
        """
        perm = np.empty(len(self.orbits), dtype=np.int64)
        for r, E in enumerate(self.orbits):
            perm[r] = self.index_of(E.transpose())
        return perm


def enumerate_orbits(spec: SystemSpec, support=None, budget: int = DEFAULT_ORBIT_BUDGET) -> OrbitBasis:
    """All orbits of spec, canonical order; cardinality C(n + d^2 - 1, d^2 - 1)."""
    sup = frozenset(support) if support is not None else None
    return OrbitBasis(spec, sup, budget)


@dataclass
class OrbitCoefficients:
    """Sparse coefficient vector over an orbit basis.

    values maps orbit ordinals to complex coefficients.  `support`, when
    declared, is the set of single-copy positions outside of which every
    count matrix in the support of `values` vanishes.
    """

    basis: OrbitBasis
    values: dict[int, complex]
    support: Optional[frozenset[tuple[int, int]]] = None

    def __post_init__(self):
        m = len(self.basis)
        for r in self.values:
            if not (0 <= r < m):
                raise ValueError(f"orbit index {r} out of range for basis")
        if self.support is not None:
            self.support = frozenset(self.support)
            for r, v in self.values.items():
                if v != 0:
                    E = self.basis.orbits[r]
                    if any(pos not in self.support for pos in E.nonzero_positions()):
                        raise ValueError(
                            "nonzero coefficient on an orbit outside the declared support"
                        )

    def to_dense_vector(self) -> np.ndarray:
        out = np.zeros(len(self.basis), dtype=complex)
        for r, v in self.values.items():
            out[r] = v
        return out


def tensor_coefficients(X, n: int, basis: OrbitBasis) -> OrbitCoefficients:
    """Orbit coefficients of the n-fold tensor power of a single-copy matrix.

    The coefficient of orbit E is the product of X entries raised to the
    E powers; only orbits supported on nz(X) are stored.
    """
    X = np.asarray(X, dtype=complex)
    d = basis.spec.dim
    if X.shape != (d, d):
        raise ValueError(f"matrix must be {d}x{d} to match basis")
    if basis.spec.copies != n:
        raise ValueError("copies mismatch between n and basis")
    nz = frozenset(
        (a, b) for a in range(d) for b in range(d) if X[a, b] != 0
    )
    if basis.support is not None and not nz <= basis.support:
        raise ValueError(
            "matrix has nonzero entries outside the basis support; "
            "coefficients would be silently dropped"
        )
    values: dict[int, complex] = {}
    for r, E in enumerate(basis.orbits):
        pos = E.nonzero_positions()
        if any(p not in nz for p in pos):
            continue
        c = 1.0 + 0.0j
        for a, b in pos:
            c *= X[a, b] ** E.get(a, b)
        values[r] = c
    return OrbitCoefficients(basis, values, support=nz)


def transpose_coeffs(x: OrbitCoefficients) -> OrbitCoefficients:
    """Coefficients of the full transpose: output at E is input at E^T."""
    basis = x.basis
    if x.support is not None and any(
        (b, a) not in x.support for (a, b) in x.support
    ):
        new_support = frozenset((b, a) for (a, b) in x.support)
        new_basis = OrbitBasis(basis.spec, new_support, basis.budget)
    else:
        new_support = x.support
        new_basis = basis
    values: dict[int, complex] = {}
    for r, v in x.values.items():
        ET = basis.orbits[r].transpose()
        values[new_basis.index_of(ET)] = v
    return OrbitCoefficients(new_basis, values, support=new_support)


def _composite_split(a: int, dims: tuple[int, int]) -> tuple[int, int]:
    dA, dB = dims
    return a // dB, a % dB


def _composite_join(aA: int, aB: int, dims: tuple[int, int]) -> int:
    return aA * dims[1] + aB


def _partial_transpose_count(E: CountMatrix, dims: tuple[int, int], side: str) -> CountMatrix:
    """Count matrix of the partial transpose on the chosen factor."""
    dA, dB = dims
    d = dA * dB
    ent = [0] * (d * d)
    for a in range(d):
        for b in range(d):
            v = E.get(a, b)
            if v == 0:
                continue
            aA, aB = _composite_split(a, dims)
            bA, bB = _composite_split(b, dims)
            if side == "B":
                a2 = _composite_join(aA, bB, dims)
                b2 = _composite_join(bA, aB, dims)
            elif side == "A":
                a2 = _composite_join(bA, aB, dims)
                b2 = _composite_join(aA, bB, dims)
            else:
                raise ValueError("side must be 'A' or 'B'")
            ent[a2 * d + b2] += v
    return CountMatrix(tuple(ent), d)


def partial_transpose_coeffs(x: OrbitCoefficients, side: str = "B") -> OrbitCoefficients:
    """Coefficient reshuffle implementing the partial transpose on one factor
    of a bipartite spec; involutive, and T_A then T_B equals the full
    transpose."""
    spec = x.basis.spec
    if len(spec.local_dims) != 2:
        raise ValueError("partial transpose requires a bipartite spec")
    dims = spec.local_dims
    basis = x.basis

    def pt_pos(pos):
        a, b = pos
        aA, aB = _composite_split(a, dims)
        bA, bB = _composite_split(b, dims)
        if side == "B":
            return (_composite_join(aA, bB, dims), _composite_join(bA, aB, dims))
        return (_composite_join(bA, aB, dims), _composite_join(aA, bB, dims))

    if x.support is not None and any(pt_pos(p) not in x.support for p in x.support):
        new_support = frozenset(pt_pos(p) for p in x.support)
        new_basis = OrbitBasis(spec, new_support, basis.budget)
    else:
        new_support = x.support
        new_basis = basis
    values: dict[int, complex] = {}
    for r, v in x.values.items():
        EPT = _partial_transpose_count(basis.orbits[r], dims, side)
        values[new_basis.index_of(EPT)] = v
    return OrbitCoefficients(new_basis, values, support=new_support)


def _marginal_counts(E: CountMatrix, dims: tuple[int, int]) -> tuple[CountMatrix, CountMatrix]:
    """A- and B-marginal count matrices of a joint count matrix."""
    dA, dB = dims
    EA = np.zeros((dA, dA), dtype=int)
    EB = np.zeros((dB, dB), dtype=int)
    d = dA * dB
    for a in range(d):
        for b in range(d):
            v = E.get(a, b)
            if v == 0:
                continue
            aA, aB = _composite_split(a, dims)
            bA, bB = _composite_split(b, dims)
            EA[aA, bA] += v
            EB[aB, bB] += v
    return CountMatrix.from_array(EA), CountMatrix.from_array(EB)


def _kappa(E: CountMatrix, EA: CountMatrix, dims: tuple[int, int], traced: str) -> int:
    """Exact multinomial weight of the partial trace over the traced factor.

    For traced='B': the product over (a_A, b_A) of multinomials distributing
    the A-marginal entry among the joint entries sharing that A type.
    """
    dA, dB = dims
    d = dA * dB
    res = 1
    if traced == "B":
        for aA in range(dA):
            for bA in range(dA):
                top = factorial(EA.get(aA, bA))
                bot = 1
                for aB in range(dB):
                    for bB in range(dB):
                        bot *= factorial(
                            E.get(_composite_join(aA, aB, dims), _composite_join(bA, bB, dims))
                        )
                res *= top // bot
    else:
        for aB in range(dB):
            for bB in range(dB):
                top = factorial(EA.get(aB, bB))
                bot = 1
                for aA in range(dA):
                    for bA in range(dA):
                        bot *= factorial(
                            E.get(_composite_join(aA, aB, dims), _composite_join(bA, bB, dims))
                        )
                res *= top // bot
    return res


@dataclass
class MarginalData:
    """Per-joint-orbit marginal bookkeeping for a bipartite spec.

    For every joint orbit s: the ordinals r(s) and t(s) of its A- and
    B-marginal orbits, the exact integer partial-trace weights kappa_A and
    kappa_B, and tau = 1 iff the B-marginal count matrix is diagonal.
    """

    basis_joint: OrbitBasis
    basis_a: OrbitBasis
    basis_b: OrbitBasis
    r_of: np.ndarray
    t_of: np.ndarray
    kappa_a: list[int]
    kappa_b: list[int]
    tau: np.ndarray
    tau_a: np.ndarray  # A-marginal diagonal flag, used when tracing over A

    @property
    def dims(self) -> tuple[int, int]:
        return self.basis_joint.spec.local_dims  # type: ignore[return-value]


def marginal_data(
    basis_joint: OrbitBasis,
    basis_a: Optional[OrbitBasis] = None,
    basis_b: Optional[OrbitBasis] = None,
) -> MarginalData:
    """Build MarginalData for a bipartite joint basis.

    Marginal bases default to the full single-system bases; pass restricted
    ones (e.g. a block-diagonal algebra basis) when the marginals are known
    to live there.
    """
    spec = basis_joint.spec
    if len(spec.local_dims) != 2:
        raise ValueError("marginal data requires a bipartite spec")
    dims = spec.local_dims
    n = spec.copies
    if basis_a is None:
        basis_a = OrbitBasis(SystemSpec((dims[0],), n))
    if basis_b is None:
        basis_b = OrbitBasis(SystemSpec((dims[1],), n))
    m = len(basis_joint)
    r_of = np.empty(m, dtype=np.int64)
    t_of = np.empty(m, dtype=np.int64)
    kappa_a: list[int] = []
    kappa_b: list[int] = []
    tau = np.empty(m, dtype=bool)
    tau_a = np.empty(m, dtype=bool)
    for s, E in enumerate(basis_joint.orbits):
        EA, EB = _marginal_counts(E, dims)
        r_of[s] = basis_a.index_of(EA)
        t_of[s] = basis_b.index_of(EB)
        kappa_a.append(_kappa(E, EA, dims, "B"))
        kappa_b.append(_kappa(E, EB, dims, "A"))
        tau[s] = EB.is_diagonal()
        tau_a[s] = EA.is_diagonal()
    return MarginalData(basis_joint, basis_a, basis_b, r_of, t_of, kappa_a, kappa_b, tau, tau_a)


def partial_trace_coeffs(
    x: OrbitCoefficients, md: MarginalData, traced: str = "B"
) -> OrbitCoefficients:
    """Partial trace over the traced factor, entirely in coefficients:
    out_r = sum over joint orbits s with matching marginal of
    x_s * kappa_s * tau_s."""
    if x.basis is not md.basis_joint and x.basis.index != md.basis_joint.index:
        raise BasisMismatchError("coefficients were not built on md's joint basis")
    values: dict[int, complex] = {}
    if traced == "B":
        out_basis = md.basis_a
        for s, v in x.values.items():
            if not md.tau[s]:
                continue
            r = int(md.r_of[s])
            values[r] = values.get(r, 0.0) + v * md.kappa_a[s]
    elif traced == "A":
        out_basis = md.basis_b
        for s, v in x.values.items():
            if not md.tau_a[s]:
                continue
            t = int(md.t_of[s])
            values[t] = values.get(t, 0.0) + v * md.kappa_b[s]
    else:
        raise ValueError("traced must be 'A' or 'B'")
    return OrbitCoefficients(out_basis, values)


def hs_inner(x: OrbitCoefficients, y: OrbitCoefficients) -> complex:
    """Hilbert-Schmidt inner product Tr[X^dag Y] from coefficients."""
    if x.basis.index != y.basis.index:
        raise BasisMismatchError("hs_inner requires a shared basis")
    sizes = x.basis.sizes()
    total = 0.0 + 0.0j
    for r, v in x.values.items():
        w = y.values.get(r)
        if w is not None:
            total += np.conj(v) * w * sizes[r]
    return total


def trace_coeffs(x: OrbitCoefficients) -> complex:
    """Trace of the represented operator."""
    traces = x.basis.traces()
    return sum(v * traces[r] for r, v in x.values.items() if traces[r])


def identity_coefficients(basis: OrbitBasis) -> OrbitCoefficients:
    """Coefficient vector of the identity operator: 1 on every diagonal orbit."""
    values = {
        r: 1.0 + 0.0j for r, E in enumerate(basis.orbits) if E.is_diagonal()
    }
    return OrbitCoefficients(basis, values)
