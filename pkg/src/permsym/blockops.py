"""Linear algebra on block representations: traces, inner products, the two
Choi normalization constraints, and the block-basis partial transpose."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .blockmap import ORTHO, BlockRep, ChangeOfBasis
from .errors import GaugeError


def _require_ortho(b: BlockRep, what: str):
    if b.gauge != ORTHO:
        raise GaugeError(f"{what} requires the ortho gauge (product-preserving map)")


def block_trace(b: BlockRep) -> complex:
    """Trace of the represented operator: multiplicity-weighted block traces."""
    _require_ortho(b, "block_trace")
    return complex(sum(w * np.trace(B) for w, B in zip(b.weights, b.blocks)))


def block_hs(a: BlockRep, b: BlockRep) -> complex:
    """Hilbert-Schmidt inner product Tr[A^dag B] in the block basis."""
    _require_ortho(a, "block_hs")
    _require_ortho(b, "block_hs")
    if a.labels != b.labels or a.d_ref != b.d_ref:
        raise GaugeError("operands have different block structure")
    return complex(
        sum(
            w * np.trace(A.conj().T @ B)
            for w, A, B in zip(a.weights, a.blocks, b.blocks)
        )
    )


def trace_out_symmetric(b: BlockRep) -> np.ndarray:
    """Partial trace over the symmetric side: a d_ref x d_ref matrix
    aggregating multiplicity-weighted block traces."""
    _require_ortho(b, "trace_out_symmetric")
    d_ref = b.d_ref
    T = np.zeros((d_ref, d_ref), dtype=complex)
    for w, m, B in zip(b.weights, b.dims, b.blocks):
        T += w * np.trace(B.reshape(d_ref, m, d_ref, m), axis1=1, axis2=3)
    return T


def trace_out_reference(b: BlockRep) -> list[np.ndarray]:
    """Per-block partial trace over the reference factor."""
    out = []
    for m, B in zip(b.dims, b.blocks):
        out.append(np.trace(B.reshape(b.d_ref, m, b.d_ref, m), axis1=0, axis2=2))
    return out


def psd_sqrt_pinv(H: np.ndarray, cutoff: float = 1e-12) -> np.ndarray:
    """Inverse square root of a PSD matrix, pseudoinverted below the cutoff
    (relative to the largest eigenvalue)."""
    H = 0.5 * (H + H.conj().T)
    ev, U = np.linalg.eigh(H)
    top = max(float(ev.max()), 0.0)
    inv = np.where(ev > cutoff * max(top, 1e-300), 1.0 / np.sqrt(np.abs(ev)), 0.0)
    return U @ np.diag(inv) @ U.conj().T


def check_cpu(b: BlockRep) -> np.ndarray:
    """Per-block residual of the unitality constraint: the reference-traced
    block must be the identity."""
    _require_ortho(b, "check_cpu")
    res = []
    for M, m in zip(trace_out_reference(b), b.dims):
        res.append(float(np.max(np.abs(M - np.eye(m)))))
    return np.array(res)


def enforce_cpu(b: BlockRep) -> BlockRep:
    """Sandwich each block with the inverse-sqrt of its reference trace;
    idempotent once the constraint holds."""
    _require_ortho(b, "enforce_cpu")
    out = b.copy()
    for i, (M, m) in enumerate(zip(trace_out_reference(b), b.dims)):
        S = np.kron(np.eye(b.d_ref), psd_sqrt_pinv(M))
        out.blocks[i] = S @ b.blocks[i] @ S.conj().T
    return out


def check_cptp(b: BlockRep) -> float:
    """Residual of the trace-preservation constraint, which couples all
    blocks into one d_ref x d_ref equation."""
    _require_ortho(b, "check_cptp")
    T = trace_out_symmetric(b)
    return float(np.max(np.abs(T - np.eye(b.d_ref))))


def enforce_cptp(b: BlockRep) -> BlockRep:
    """Sandwich every block with the aggregated inverse-sqrt on the
    reference factor."""
    _require_ortho(b, "enforce_cptp")
    T = trace_out_symmetric(b)
    S = psd_sqrt_pinv(T)
    out = b.copy()
    for i, m in enumerate(b.dims):
        Sm = np.kron(S, np.eye(m))
        out.blocks[i] = Sm @ b.blocks[i] @ Sm.conj().T
    return out


class BlockPartialTranspose:
    """Partial transpose of a bipartite system, conjugated into the block
    basis: the composite (forward map) o (coefficient reshuffle) o (inverse)
    is precomputed once as a single matrix on the stacked block entries."""

    def __init__(self, cob: ChangeOfBasis, dims: tuple[int, int], side: str = "B"):
        if dims[0] * dims[1] != cob.d:
            raise ValueError("dims do not factor the single-copy dimension")
        self.cob = cob
        self.dims = dims
        self.side = side
        basis = cob.basis
        m_orb = len(basis.orbits)
        # orbit permutation of the partial transpose
        from .orbits import _partial_transpose_count
        perm = np.empty(m_orb, dtype=np.int64)
        for r, E in enumerate(basis.orbits):
            perm[r] = basis.index_of(_partial_transpose_count(E, dims, side))
        sizes = np.array([float(s) for s in basis.sizes()])
        fwd = np.vstack([mat for mat in cob.ortho_maps])  # (L, m_orb)
        inv = np.vstack([f * mat for f, mat in zip(cob.specht, cob.ortho_maps)]).T
        inv = inv / sizes[:, None]  # (m_orb, L)
        P = np.zeros((m_orb, m_orb))
        P[perm, np.arange(m_orb)] = 1.0
        self.matrix = fwd @ P @ inv  # (L, L) acting on stacked block vecs

    def __call__(self, b: BlockRep) -> BlockRep:
        _require_ortho(b, "block partial transpose")
        if b.d_ref != 1:
            raise ValueError("block partial transpose acts on reference-free blocks")
        vec = np.concatenate([B.reshape(-1) for B in b.blocks])
        out_vec = self.matrix @ vec
        out = b.copy()
        offset = 0
        for i, m in enumerate(b.dims):
            out.blocks[i] = out_vec[offset:offset + m * m].reshape(m, m)
            offset += m * m
        return out


def block_partial_transpose(b: BlockRep, cob: ChangeOfBasis, dims: tuple[int, int], side: str = "B") -> BlockRep:
    """One-shot partial transpose in the block basis, for callers that do not
    want to keep the precomputed map around."""
    return BlockPartialTranspose(cob, dims, side)(b)
