"""Block-diagonal matrix algebras: orbit bases restricted to block-diagonal
count matrices, their finer block decomposition, and the link product with
an algebra-valued side.

A direct sum of full matrix algebras models a classical-quantum output (a
flag label times a quantum state).  Invariant operators over n copies split
by the multiplicity vector counting how many copies land in each summand;
within one multiplicity sector the decomposition is a tensor product of the
per-summand constructions.  Each sector block additionally appears in the
physical embedding with a multinomial number of identical copies, which
multiplies the trace weight of the block.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import factorial, prod
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from .blockmap import ORTHO, BlockRep, ChangeOfBasis
from .errors import GaugeError
from .linkprod import RefCoefficients
from .orbits import (
    CountMatrix,
    MarginalData,
    OrbitBasis,
    OrbitCoefficients,
    SystemSpec,
    _compositions,
    marginal_data,
    orbit_size,
)
from .tableaux import Partition, partitions, ssyt_count, syt_count


@dataclass(frozen=True)
class AlgebraSpec:
    """Direct sum of square blocks, tensored n times."""

    block_dims: tuple[int, ...]
    copies: int

    def __post_init__(self):
        if not self.block_dims or any(d < 1 for d in self.block_dims):
            raise ValueError("block dimensions must be >= 1")
        if self.copies < 1:
            raise ValueError("copies must be >= 1")
        object.__setattr__(self, "block_dims", tuple(int(d) for d in self.block_dims))

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def embed_dim(self) -> int:
        return sum(self.block_dims)

    def offsets(self) -> list[int]:
        out = [0]
        for d in self.block_dims:
            out.append(out[-1] + d)
        return out

    def support(self) -> frozenset[tuple[int, int]]:
        """Single-copy positions inside the diagonal blocks."""
        offs = self.offsets()
        pos = set()
        for j, dj in enumerate(self.block_dims):
            for a in range(offs[j], offs[j] + dj):
                for b in range(offs[j], offs[j] + dj):
                    pos.add((a, b))
        return frozenset(pos)


def algebra_orbits(spec: AlgebraSpec, extra_support=None) -> OrbitBasis:
    """Orbit basis restricted to block-diagonal count matrices; optionally
    intersected with a further support (e.g. the nonzero pattern of a
    sparse Choi matrix)."""
    sup = spec.support()
    if extra_support is not None:
        sup = sup & frozenset(extra_support)
    return OrbitBasis(SystemSpec((spec.embed_dim,), spec.copies), sup)


def split_orbit(E: CountMatrix, spec: AlgebraSpec) -> tuple[tuple[int, ...], list[CountMatrix]]:
    """Decompose a block-diagonal count matrix into its per-summand pieces
    and the multiplicity vector of copies per summand."""
    offs = spec.offsets()
    parts = []
    mu = []
    seen = 0
    for j, dj in enumerate(spec.block_dims):
        sub = np.zeros((dj, dj), dtype=int)
        for a in range(dj):
            for b in range(dj):
                sub[a, b] = E.get(offs[j] + a, offs[j] + b)
        parts.append(CountMatrix.from_array(sub))
        mu.append(int(sub.sum()))
        seen += mu[-1]
    if seen != E.n:
        raise ValueError("count matrix has weight outside the diagonal blocks")
    return tuple(mu), parts


def glue_orbit(mu: tuple[int, ...], parts: list[CountMatrix], spec: AlgebraSpec) -> CountMatrix:
    offs = spec.offsets()
    d = spec.embed_dim
    arr = np.zeros((d, d), dtype=int)
    for j, (dj, part) in enumerate(zip(spec.block_dims, parts)):
        if part.n != mu[j]:
            raise ValueError("per-block weights disagree with the multiplicity vector")
        for a in range(dj):
            for b in range(dj):
                arr[offs[j] + a, offs[j] + b] = part.get(a, b)
    return CountMatrix.from_array(arr)


@dataclass(frozen=True)
class FlagProfile:
    """Label of one fine block: copies per summand plus one shape each."""

    mu: tuple[int, ...]
    shapes: tuple[Partition, ...]
    m: int           # block dimension, product of per-summand SSYT counts
    f: int           # product of per-summand Specht dimensions
    copies: int      # multinomial embedding multiplicity of the sector

    @property
    def weight(self) -> int:
        """Trace multiplicity of the block in the physical embedding."""
        return self.f * self.copies


def flag_profiles(spec: AlgebraSpec) -> list[FlagProfile]:
    """All fine-block labels, ordered lexicographically by multiplicity
    vector, then by the per-summand shape lists."""
    n = spec.copies
    ell = spec.num_blocks
    out = []
    for mu in _compositions(n, ell):
        per_block = [partitions(dj, k) for dj, k in zip(spec.block_dims, mu)]
        copies = factorial(n)
        for k in mu:
            copies //= factorial(k)
        for shapes in product(*per_block):
            m = prod(ssyt_count(lam, dj) for lam, dj in zip(shapes, spec.block_dims))
            f = prod(syt_count(lam) for lam in shapes)
            out.append(FlagProfile(tuple(mu), tuple(shapes), m, f, copies))
    return out


class AlgebraChangeOfBasis:
    """Block diagonalization for an algebra tensor power.

    The image of an orbit lands in the sector singled out by its
    multiplicity vector, as the tensor product of the per-summand images.
    Only the product-preserving gauge is provided; its inverse weighs each
    block by the Specht dimension times the sector copy count, matching the
    physical-embedding trace.
    """

    def __init__(self, spec: AlgebraSpec, basis: Optional[OrbitBasis] = None,
                 block_cobs: Optional[dict[tuple[int, int], ChangeOfBasis]] = None):
        self.spec = spec
        self.basis = basis if basis is not None else algebra_orbits(spec)
        self.block_cobs = dict(block_cobs) if block_cobs else {}
        self.profiles = flag_profiles(spec)
        self._profile_index = {
            (p.mu, p.shapes): i for i, p in enumerate(self.profiles)
        }
        self._build_maps()

    def _cob(self, dj: int, k: int) -> ChangeOfBasis:
        key = (dj, k)
        if key not in self.block_cobs:
            self.block_cobs[key] = ChangeOfBasis(dj, k)
        return self.block_cobs[key]

    def _build_maps(self):
        m_orb = len(self.basis.orbits)
        builders = [([], [], []) for _ in self.profiles]
        for r, E in enumerate(self.basis.orbits):
            mu, parts = split_orbit(E, self.spec)
            per_block_imgs = []
            for j, (dj, Ej) in enumerate(zip(self.spec.block_dims, parts)):
                cob = self._cob(dj, mu[j])
                rj = cob.basis.index_of(Ej)
                per_block_imgs.append(
                    [cob.orbit_image(rj, li, ORTHO) for li in range(len(cob.partitions))]
                )
            shape_lists = [
                range(len(self._cob(dj, mu[j]).partitions))
                for j, dj in enumerate(self.spec.block_dims)
            ]
            for combo in product(*shape_lists):
                shapes = tuple(
                    self._cob(dj, mu[j]).partitions[c]
                    for (j, dj), c in zip(enumerate(self.spec.block_dims), combo)
                )
                p_idx = self._profile_index[(mu, shapes)]
                img = np.array([[1.0]])
                for j, c in enumerate(combo):
                    img = np.kron(img, per_block_imgs[j][c])
                rows, cols, vals = builders[p_idx]
                flat = img.reshape(-1)
                nz = np.nonzero(flat)[0]
                rows.extend(int(i) for i in nz)
                cols.extend([r] * len(nz))
                vals.extend(float(flat[i]) for i in nz)
        self.maps: list[sp.csr_matrix] = []
        for p, (rows, cols, vals) in zip(self.profiles, builders):
            self.maps.append(
                sp.csr_matrix((vals, (rows, cols)), shape=(p.m * p.m, m_orb))
            )

    # -- forward / inverse --------------------------------------------------

    def _wrap(self, blocks, d_ref: int) -> BlockRep:
        return BlockRep(
            d=self.spec.embed_dim,
            n=self.spec.copies,
            d_ref=d_ref,
            labels=tuple(self.profiles),
            weights=tuple(p.weight for p in self.profiles),
            dims=tuple(p.m for p in self.profiles),
            blocks=blocks,
            gauge=ORTHO,
        )

    def blockrep(self, blocks, d_ref: int) -> BlockRep:
        """Wrap raw block arrays with this map's label/weight structure."""
        return self._wrap(blocks, d_ref)

    def psi_tilde(self, x: Union[OrbitCoefficients, RefCoefficients]) -> BlockRep:
        if isinstance(x, RefCoefficients):
            values, d_ref = x.values, x.d_ref
        else:
            values, d_ref = x.to_dense_vector().reshape(1, 1, -1), 1
        if values.shape[-1] != len(self.basis.orbits):
            raise GaugeError("coefficients not on this algebra basis")
        flat = values.reshape(d_ref * d_ref, -1)
        blocks = []
        for p, mat in zip(self.profiles, self.maps):
            sub = np.asarray((mat @ flat.T).T)
            m = p.m
            B = np.zeros((d_ref * m, d_ref * m), dtype=complex)
            for k in range(d_ref):
                for l in range(d_ref):
                    B[k * m:(k + 1) * m, l * m:(l + 1) * m] = sub[k * d_ref + l].reshape(m, m)
            blocks.append(B)
        return self._wrap(blocks, d_ref)

    def psi_tilde_inv(self, b: BlockRep) -> Union[OrbitCoefficients, RefCoefficients]:
        if b.gauge != ORTHO:
            raise GaugeError("inverse is defined on the ortho gauge only")
        d_ref = b.d_ref
        m_orb = len(self.basis.orbits)
        acc = np.zeros((d_ref * d_ref, m_orb), dtype=complex)
        for p, mat, B in zip(self.profiles, self.maps, b.blocks):
            m = p.m
            vecs = np.empty((d_ref * d_ref, m * m), dtype=complex)
            for k in range(d_ref):
                for l in range(d_ref):
                    vecs[k * d_ref + l] = B[k * m:(k + 1) * m, l * m:(l + 1) * m].reshape(-1)
            acc += p.weight * np.asarray((mat.T @ vecs.T).T)
        sizes = np.array([float(s) for s in self.basis.sizes()])
        acc /= sizes[None, :]
        if d_ref == 1:
            vals = {r: acc[0, r] for r in range(m_orb) if acc[0, r] != 0}
            return OrbitCoefficients(self.basis, vals)
        return RefCoefficients(self.basis, d_ref, acc.reshape(d_ref, d_ref, m_orb))

    def identity_blocks(self, d_ref: int = 1) -> BlockRep:
        return self._wrap(
            [np.eye(d_ref * p.m, dtype=complex) for p in self.profiles], d_ref
        )


def algebra_marginal_data(
    d_a: int,
    spec_b: AlgebraSpec,
    channel_support=None,
    basis_b: Optional[OrbitBasis] = None,
) -> MarginalData:
    """Marginal bookkeeping for a joint system (full matrix algebra on the
    input side) x (block-diagonal algebra on the output side).

    The joint orbit basis is restricted to positions compatible with the
    output algebra, further intersected with a channel support when given;
    B-marginals are indexed in the algebra orbit basis.
    """
    n = spec_b.copies
    d_b = spec_b.embed_dim
    b_support = spec_b.support()
    joint_support = set()
    for aA in range(d_a):
        for bA in range(d_a):
            for (aB, bB) in b_support:
                joint_support.add((aA * d_b + aB, bA * d_b + bB))
    if channel_support is not None:
        joint_support &= set(channel_support)
    joint = OrbitBasis(SystemSpec((d_a, d_b), n), frozenset(joint_support))
    if basis_b is None:
        basis_b = algebra_orbits(spec_b)
    return marginal_data(joint, None, basis_b)


def algebra_link(channel, other, md: MarginalData, side: str = "decoder"):
    """Serial concatenation where the symmetric output side carries a
    block-diagonal algebra.

    The weights are the same multinomials as in the full-matrix case, taken
    on orbits restricted to the algebra (built by algebra_marginal_data);
    side chooses whether the partner is applied after the channel (decoder,
    contracting the algebra side) or before it (encoder, contracting the
    input side).
    """
    from .linkprod import compose_after_encoder, compose_before_decoder

    if side == "decoder":
        return compose_before_decoder(channel, other, md)
    if side == "encoder":
        return compose_after_encoder(channel, other, md)
    raise ValueError("side must be 'decoder' or 'encoder'")


def kappa_block_decomposition(E: CountMatrix, d_a: int, spec_b: AlgebraSpec) -> int:
    """Partial-trace weight of a joint orbit computed through the per-sector
    pieces instead of directly: split the joint count matrix over the output
    summands, combine per-sector weights with the multinomial of sector
    sizes and the orbit-size ratio of the glued input marginal.

    Must agree exactly with the direct multinomial; exercised by the
    validation suite.
    """
    n = E.n
    d_b = spec_b.embed_dim
    offs = spec_b.offsets()
    from .orbits import _kappa, _marginal_counts

    mu = []
    kappas = []
    r_parts = []
    for j, dj in enumerate(spec_b.block_dims):
        sub = np.zeros((d_a * dj, d_a * dj), dtype=int)
        for aA in range(d_a):
            for bA in range(d_a):
                for aB in range(dj):
                    for bB in range(dj):
                        sub[aA * dj + aB, bA * dj + bB] = E.get(
                            aA * d_b + offs[j] + aB, bA * d_b + offs[j] + bB
                        )
        Ej = CountMatrix.from_array(sub)
        mu.append(Ej.n)
        EA_j, _ = _marginal_counts(Ej, (d_a, dj))
        kappas.append(_kappa(Ej, EA_j, (d_a, dj), "B"))
        r_parts.append(EA_j)
    total = np.zeros((d_a, d_a), dtype=int)
    for EA_j in r_parts:
        total += EA_j.to_array()
    E_r = CountMatrix.from_array(total)
    res = factorial(n)
    for k in mu:
        res //= factorial(k)
    res = res * prod(orbit_size(EA_j) for EA_j in r_parts)
    num = res * prod(kappas)
    den = orbit_size(E_r)
    q, rem = divmod(num, den)
    if rem:
        raise ArithmeticError("per-sector weight decomposition is not exact")
    return q
