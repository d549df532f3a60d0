"""Channel concatenation and channel application in the orbit basis.

Serial concatenations of Choi matrices reduce, orbit by orbit, to exact
integer gather-scatter formulas: the partial trace of one orbit matrix
against another collapses to a multinomial weight times a marginal orbit.
This module implements the two reference-system compositions used by the
seesaw loop, the fully covariant three-system case, and channel application
as a preparation-channel composition.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial
from typing import Optional, Union

import numpy as np

from .errors import BasisMismatchError, CapacityError
from .orbits import (
    DEFAULT_ORBIT_BUDGET,
    CountMatrix,
    MarginalData,
    OrbitBasis,
    OrbitCoefficients,
    SystemSpec,
    _compositions,
)


@dataclass
class RefCoefficients:
    """Coefficients of an operator on (reference) x (symmetric side).

    values[k, l, r] is the coefficient of |k><l|_R tensor C_r; the basis is
    the orbit basis of the symmetric side.  Hermitian operators satisfy
    values[l, k, rT] == conj(values[k, l, r]).
    """

    basis: OrbitBasis
    d_ref: int
    values: np.ndarray  # complex, shape (d_ref, d_ref, len(basis))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.d_ref, self.d_ref, len(self.basis)):
            raise ValueError("values must have shape (d_ref, d_ref, num_orbits)")

    @classmethod
    def zeros(cls, basis: OrbitBasis, d_ref: int) -> "RefCoefficients":
        return cls(basis, d_ref, np.zeros((d_ref, d_ref, len(basis)), dtype=complex))

    def copy(self) -> "RefCoefficients":
        return RefCoefficients(self.basis, self.d_ref, self.values.copy())


def ref_adjoint(x: RefCoefficients) -> RefCoefficients:
    """Coefficients of the full transpose: new[k, l, r] = old[l, k, rT].

    For Hermitian operators this is the entrywise conjugate; it is the
    reshuffle taking a Choi matrix to the Choi matrix of the adjoint map.
    """
    perm = x.basis.transpose_permutation()
    out = np.empty_like(x.values)
    out[:, :, :] = x.values.transpose(1, 0, 2)[:, :, perm]
    return RefCoefficients(x.basis, x.d_ref, out)


def ref_hs_inner(x: RefCoefficients, y: RefCoefficients) -> complex:
    """Tr[X^dag Y] for two reference-tensored coefficient sets."""
    if x.basis.index != y.basis.index or x.d_ref != y.d_ref:
        raise BasisMismatchError("operands do not share a basis")
    sizes = np.array([float(s) for s in x.basis.sizes()])
    return complex(np.sum(np.conj(x.values) * y.values * sizes[None, None, :]))


def contract_refs(left: RefCoefficients, right: RefCoefficients) -> np.ndarray:
    """Full link over the shared symmetric side.

    Both operands are reference-tensored coefficient sets on the same orbit
    basis; the result is the dense matrix of
    Tr_{S^n}[(Gamma_L)^{T_{S^n}} Gamma_R] indexed by (k_L k_R, l_L l_R).
    Used to close a seesaw composite into an operator on the two small
    reference factors.
    """
    if left.basis.index != right.basis.index:
        raise BasisMismatchError("operands do not share a basis")
    sizes = np.array([float(s) for s in left.basis.sizes()])
    G = np.einsum("klt,mnt,t->kmln", left.values, right.values, sizes)
    dl, dr = left.d_ref, right.d_ref
    return G.reshape(dl * dr, dl * dr)


def _check_channel(channel: OrbitCoefficients, md: MarginalData):
    if channel.basis.index != md.basis_joint.index:
        raise BasisMismatchError("channel coefficients not on md's joint basis")


def _channel_arrays(channel: OrbitCoefficients, md: MarginalData):
    s_idx = np.fromiter(channel.values.keys(), dtype=np.int64, count=len(channel.values))
    c = np.fromiter(channel.values.values(), dtype=complex, count=len(channel.values))
    return s_idx, c


def compose_after_encoder(
    channel: OrbitCoefficients, encoder: RefCoefficients, md: MarginalData
) -> RefCoefficients:
    """Choi coefficients of (channel o encoder), seen from the output side.

    out[k, l, t] = sum over joint orbits s with B-marginal t of
    kappa_B[s] * encoder[k, l, r(s)] * channel[s].
    """
    _check_channel(channel, md)
    if encoder.basis.index != md.basis_a.index:
        raise BasisMismatchError("encoder lives on the wrong side for this composition")
    out = RefCoefficients.zeros(md.basis_b, encoder.d_ref)
    s_idx, c = _channel_arrays(channel, md)
    kb = np.array([float(md.kappa_b[int(s)]) for s in s_idx])
    contrib = encoder.values[:, :, md.r_of[s_idx]] * (kb * c)[None, None, :]
    t_idx = md.t_of[s_idx]
    for k in range(encoder.d_ref):
        for l in range(encoder.d_ref):
            np.add.at(out.values[k, l], t_idx, contrib[k, l])
    return out


def compose_before_decoder(
    channel: OrbitCoefficients, decoder: RefCoefficients, md: MarginalData
) -> RefCoefficients:
    """Choi coefficients of (decoder o channel), seen from the input side.

    out[k, l, r] = sum over joint orbits s with A-marginal r of
    kappa_A[s] * decoder[k, l, t(s)] * channel[s].
    """
    _check_channel(channel, md)
    if decoder.basis.index != md.basis_b.index:
        raise BasisMismatchError(
            "decoder lives on the wrong side for this composition; note that a "
            "decoder must carry the fixed small reference dimension (an identity "
            "decoder with d_ref = d_B^n is not representable here)"
        )
    out = RefCoefficients.zeros(md.basis_a, decoder.d_ref)
    s_idx, c = _channel_arrays(channel, md)
    ka = np.array([float(md.kappa_a[int(s)]) for s in s_idx])
    contrib = decoder.values[:, :, md.t_of[s_idx]] * (ka * c)[None, None, :]
    r_idx = md.r_of[s_idx]
    for k in range(decoder.d_ref):
        for l in range(decoder.d_ref):
            np.add.at(out.values[k, l], r_idx, contrib[k, l])
    return out


@dataclass
class TripartiteTable:
    """Sparse table of exact integer weights for covariant concatenation.

    entries[(s_key, u_key)] is a dict mapping output count-matrix keys to the
    integer weight with which channel coefficient c_s (on A x B) times
    c_u (on B x C) contributes to output orbit w (on A x C).  Keys are
    count-matrix entry tuples, so the table is independent of any particular
    basis restriction.
    """

    dims: tuple[int, int, int]
    n: int
    entries: dict[tuple[tuple[int, ...], tuple[int, ...]], dict[tuple[int, ...], int]]

    def weight(self, s: CountMatrix, u: CountMatrix) -> dict[tuple[int, ...], int]:
        return self.entries.get((s.entries, u.entries), {})


_TRIPARTITE_CACHE: dict[tuple, "TripartiteTable"] = {}


def build_tripartite(
    dims: tuple[int, int, int],
    n: int,
    support_ab: Optional[frozenset] = None,
    support_bc: Optional[frozenset] = None,
    budget: int = DEFAULT_ORBIT_BUDGET,
) -> TripartiteTable:
    """Enumerate tripartite count grids and accumulate concatenation weights.

    The grid axes are (aA, bA, alpha, beta, aC, bC) where (alpha, beta) are
    the symbols carried by the two contracted B-side multi-indices.  A grid
    position is admitted only if its induced positions on A x B and B x C lie
    in the declared supports.  For every admissible grid Z summing to n, the
    weight is the product over outer types of the multinomial distributing
    the A x C marginal entry over the (alpha, beta) cells.

    Tables are memoized per (dims, n, supports) since the enumeration
    dominates and the result is immutable.
    """
    cache_key = (
        tuple(dims), n,
        frozenset(support_ab) if support_ab is not None else None,
        frozenset(support_bc) if support_bc is not None else None,
    )
    cached = _TRIPARTITE_CACHE.get(cache_key)
    if cached is not None:
        return cached
    dA, dB, dC = dims
    # admissible flattened grid positions
    positions = []
    for aA in range(dA):
        for bA in range(dA):
            for alpha in range(dB):
                for beta in range(dB):
                    for aC in range(dC):
                        for bC in range(dC):
                            pos_ab = (aA * dB + alpha, bA * dB + beta)
                            pos_bc = (alpha * dC + aC, beta * dC + bC)
                            if support_ab is not None and pos_ab not in support_ab:
                                continue
                            if support_bc is not None and pos_bc not in support_bc:
                                continue
                            positions.append((aA, bA, alpha, beta, aC, bC))
    k = len(positions)
    total = comb(n + k - 1, k - 1) if k else 0
    if total > budget:
        raise CapacityError(total, budget)

    entries: dict = {}
    for compo in _compositions(n, k) if k else iter(()):
        EsT = np.zeros((dA * dB, dA * dB), dtype=int)   # marginal over C, raw
        Eu = np.zeros((dB * dC, dB * dC), dtype=int)
        Ew = np.zeros((dA * dC, dA * dC), dtype=int)
        cell = {}
        for (aA, bA, alpha, beta, aC, bC), c in zip(positions, compo):
            if c == 0:
                continue
            EsT[aA * dB + alpha, bA * dB + beta] += c
            Eu[alpha * dC + aC, beta * dC + bC] += c
            key_w = (aA * dC + aC, bA * dC + bC)
            Ew[key_w] += c
            cell.setdefault(key_w, []).append(c)
        weight = 1
        for key_w, cs in cell.items():
            top = factorial(Ew[key_w])
            for c in cs:
                top //= factorial(c)
            weight *= top
        s_key = tuple(int(v) for v in EsT.reshape(-1))
        u_key = tuple(int(v) for v in Eu.reshape(-1))
        w_key = tuple(int(v) for v in Ew.reshape(-1))
        slot = entries.setdefault((s_key, u_key), {})
        slot[w_key] = slot.get(w_key, 0) + weight
    table = TripartiteTable((dA, dB, dC), n, entries)
    _TRIPARTITE_CACHE[cache_key] = table
    return table


def compose_covariant(
    n_coeffs: OrbitCoefficients,
    o_coeffs: OrbitCoefficients,
    table: TripartiteTable,
) -> OrbitCoefficients:
    """Choi coefficients of the concatenation of two covariant channels.

    n_coeffs lives on [d_A, d_B], o_coeffs on [d_B, d_C]; the result lives on
    [d_A, d_C] with coefficients c_w = sum over (s, u) of K[s,u,w] c_s c_u.
    """
    dA, dB, dC = table.dims
    n = table.n
    spec_n = n_coeffs.basis.spec
    spec_o = o_coeffs.basis.spec
    if spec_n.local_dims != (dA, dB) or spec_o.local_dims != (dB, dC):
        raise BasisMismatchError("coefficient specs do not match the table dims")
    if spec_n.copies != n or spec_o.copies != n:
        raise BasisMismatchError("copies mismatch with the table")
    out_vals: dict[tuple[int, ...], complex] = {}
    support_out: set[tuple[int, int]] = set()
    for s, cs in n_coeffs.values.items():
        Es = n_coeffs.basis.orbits[s]
        for u, cu in o_coeffs.values.items():
            Eu = o_coeffs.basis.orbits[u]
            for w_key, K in table.weight(Es, Eu).items():
                out_vals[w_key] = out_vals.get(w_key, 0.0) + K * cs * cu
    for w_key in out_vals:
        E = CountMatrix(w_key, dA * dC)
        support_out.update(E.nonzero_positions())
    out_basis = OrbitBasis(SystemSpec((dA, dC), n), frozenset(support_out))
    values = {out_basis.index_of(CountMatrix(k, dA * dC)): v for k, v in out_vals.items()}
    return OrbitCoefficients(out_basis, values, support=frozenset(support_out))


def apply_channel_to_state(
    state: Union[RefCoefficients, OrbitCoefficients],
    channel: OrbitCoefficients,
    md_or_table: Union[MarginalData, TripartiteTable],
) -> Union[RefCoefficients, OrbitCoefficients]:
    """Apply a permutation-covariant channel to a permutation-invariant state.

    The state is treated as the Choi matrix of a preparation channel, so the
    application is a serial concatenation: reference-correlated states
    delegate to the encoder-side composition, doubly symmetric states to the
    covariant one.
    """
    if isinstance(state, RefCoefficients):
        if not isinstance(md_or_table, MarginalData):
            raise TypeError("reference-correlated states need MarginalData")
        return compose_after_encoder(channel, state, md_or_table)
    if isinstance(state, OrbitCoefficients):
        if not isinstance(md_or_table, TripartiteTable):
            raise TypeError("doubly symmetric states need a TripartiteTable")
        return compose_covariant(state, channel, md_or_table)
    raise TypeError("state must be RefCoefficients or OrbitCoefficients")
