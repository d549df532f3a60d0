"""Block diagonalization of permutation-invariant operators.

A ChangeOfBasis object holds, for one (d, n) pair, the images of every
orbit basis matrix inside each irreducible block, the Gram matrices of the
Young-symmetrized vectors, and the inverse-Cholesky factors that upgrade the
positivity-preserving map to a product-preserving one.  Blocks are indexed
by partitions of n with at most d parts; block r of the raw map applied to a
coefficient vector x is sum_r x_r * image(r), optionally tensored with a
reference factor that the group does not touch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.sparse as sp

from .errors import GaugeError, SingularGramError
from .linkprod import RefCoefficients
from .orbits import CountMatrix, OrbitBasis, OrbitCoefficients, SystemSpec
from .polynomials import encoding_poly_m2, eval_at_identity
from .tableaux import Partition, partitions, ssyt_enumerate, syt_count, weight

RAW = "raw"
ORTHO = "ortho"

_GRAM_CONDITION_LIMIT = 1e12


@dataclass
class BlockRep:
    """Direct sum of dense blocks, one per label (partition or flag profile).

    weights carry the trace multiplicity of each block: the Specht dimension,
    times the embedding copy factor in the flagged case.  gauge records
    whether the blocks are images of the positivity-preserving map (raw) or
    of the product-preserving one (ortho).
    """

    d: int
    n: int
    d_ref: int
    labels: tuple
    weights: tuple[int, ...]
    dims: tuple[int, ...]
    blocks: list[np.ndarray]
    gauge: str

    def copy(self) -> "BlockRep":
        return BlockRep(
            self.d, self.n, self.d_ref, self.labels, self.weights, self.dims,
            [b.copy() for b in self.blocks], self.gauge,
        )

    def sub(self, i: int, k: int, l: int) -> np.ndarray:
        """Reference sub-block (k, l) of block i."""
        m = self.dims[i]
        return self.blocks[i][k * m:(k + 1) * m, l * m:(l + 1) * m]


class ChangeOfBasis:
    """Orbit-to-block conversion data for one (d, n) pair.

    For every partition the SSYT list, Specht dimension, Gram matrix and its
    inverse-sqrt factor are precomputed, together with a sparse matrix per
    block whose column r is the flattened image of orbit r.  Construction
    cost is polynomial in n; the object is immutable afterwards.
    """

    def __init__(self, d: int, n: int):
        self.d = d
        self.n = n
        self.basis = OrbitBasis(SystemSpec((d,), max(n, 1))) if n >= 1 else None
        if n == 0:
            # single empty orbit; one empty partition with trivial block
            self.basis = OrbitBasis.__new__(OrbitBasis)
            self.basis.spec = None  # type: ignore[assignment]
            self.basis.orbits = [CountMatrix((0,) * (d * d), d)]
            self.basis.index = {(0,) * (d * d): 0}
            self.basis._sizes = [1]
            self.basis._traces = [1]
            self.basis.support = None
            self.basis.budget = 0
        self.partitions: list[Partition] = partitions(d, n)
        self.tableaux = [ssyt_enumerate(lam, d) for lam in self.partitions]
        self.block_dims = tuple(len(t) for t in self.tableaux)
        self.specht = tuple(syt_count(lam) for lam in self.partitions)
        self._build_images()
        self._build_gram()

    # -- construction -----------------------------------------------------

    def _build_images(self):
        m_orb = len(self.basis.orbits)
        self.raw_maps: list[sp.csr_matrix] = []
        self._gram: list[np.ndarray] = []
        for lam, tabs in zip(self.partitions, self.tableaux):
            m = len(tabs)
            rows, cols, vals = [], [], []
            G = np.zeros((m, m))
            for i in range(m):
                for j in range(i, m):
                    poly = encoding_poly_m2(tabs[i], tabs[j], self.d)
                    G[i, j] = G[j, i] = float(eval_at_identity(poly, self.d))
                    for ekey, c in poly.items():
                        r = self.basis.index.get(ekey)
                        if r is None:
                            continue
                        rows.append(i * m + j)
                        cols.append(r)
                        vals.append(float(c))
                        if i != j:
                            # <u_j|C_E|u_i> = <u_i|C_{E^T}|u_j>
                            rt = self.basis.index[CountMatrix(ekey, self.d).transpose().entries]
                            rows.append(j * m + i)
                            cols.append(rt)
                            vals.append(float(c))
            self.raw_maps.append(
                sp.csr_matrix((vals, (rows, cols)), shape=(m * m, m_orb))
            )
            self._gram.append(G)

    def _build_gram(self):
        self.gram: list[np.ndarray] = self._gram
        self.gram_factor: list[np.ndarray] = []
        self.ortho_maps: list[np.ndarray] = []
        for lam, tabs, G, S in zip(
            self.partitions, self.tableaux, self.gram, self.raw_maps
        ):
            m = len(tabs)
            R = np.zeros((m, m))
            # the Gram matrix is block diagonal over tableau weights
            by_weight: dict[tuple, list[int]] = {}
            for i, t in enumerate(tabs):
                by_weight.setdefault(weight(t, self.d), []).append(i)
            for idxs in by_weight.values():
                sub = G[np.ix_(idxs, idxs)]
                ev, V = np.linalg.eigh(sub)
                if ev.min() <= 0 or ev.max() / ev.min() > _GRAM_CONDITION_LIMIT:
                    raise SingularGramError(
                        f"Gram block for shape {lam} is numerically singular "
                        f"(eigenvalues {ev.min():.3e}..{ev.max():.3e})"
                    )
                Rsub = V @ np.diag(1.0 / np.sqrt(ev)) @ V.T
                R[np.ix_(idxs, idxs)] = Rsub
            self.gram_factor.append(R)
            # row-major vec: vec(R^T M R) = kron(R^T, R^T) vec(M)
            K = np.kron(R.T, R.T)
            self.ortho_maps.append(np.asarray(K @ S.toarray()))

    # -- forward maps ------------------------------------------------------

    def _maps(self, gauge: str):
        return self.raw_maps if gauge == RAW else self.ortho_maps

    def _forward(self, values: np.ndarray, d_ref: int, gauge: str) -> list[np.ndarray]:
        flat = values.reshape(d_ref * d_ref, -1)
        blocks = []
        for m, mat in zip(self.block_dims, self._maps(gauge)):
            if sp.issparse(mat):
                sub = np.asarray((mat @ flat.T).T)
            else:
                sub = flat @ mat.T
            B = np.zeros((d_ref * m, d_ref * m), dtype=complex)
            for k in range(d_ref):
                for l in range(d_ref):
                    B[k * m:(k + 1) * m, l * m:(l + 1) * m] = sub[k * d_ref + l].reshape(m, m)
            blocks.append(B)
        return blocks

    def _wrap(self, blocks, d_ref: int, gauge: str) -> BlockRep:
        return BlockRep(
            d=self.d,
            n=self.n,
            d_ref=d_ref,
            labels=tuple(self.partitions),
            weights=self.specht,
            dims=self.block_dims,
            blocks=blocks,
            gauge=gauge,
        )

    def blockrep(self, blocks, d_ref: int, gauge: str = ORTHO) -> BlockRep:
        """Wrap raw block arrays with this map's label/weight structure."""
        return self._wrap(blocks, d_ref, gauge)

    def psi(self, x: Union[OrbitCoefficients, RefCoefficients]) -> BlockRep:
        """Positivity-preserving map: block r-image sums, raw gauge."""
        values, d_ref = _as_values(x, self)
        return self._wrap(self._forward(values, d_ref, RAW), d_ref, RAW)

    def psi_tilde(self, x: Union[OrbitCoefficients, RefCoefficients]) -> BlockRep:
        """Product-preserving map (Gram-corrected), ortho gauge."""
        values, d_ref = _as_values(x, self)
        return self._wrap(self._forward(values, d_ref, ORTHO), d_ref, ORTHO)

    def psi_tilde_inv(self, b: BlockRep) -> Union[OrbitCoefficients, RefCoefficients]:
        """Invert the ortho-gauge map back to orbit coefficients."""
        if b.gauge != ORTHO:
            raise GaugeError("inverse is defined on the ortho gauge only")
        d_ref = b.d_ref
        m_orb = len(self.basis.orbits)
        acc = np.zeros((d_ref * d_ref, m_orb), dtype=complex)
        for f, m, mat, B in zip(self.specht, self.block_dims, self.ortho_maps, b.blocks):
            vecs = np.empty((d_ref * d_ref, m * m), dtype=complex)
            for k in range(d_ref):
                for l in range(d_ref):
                    vecs[k * d_ref + l] = B[k * m:(k + 1) * m, l * m:(l + 1) * m].reshape(-1)
            acc += f * (vecs @ mat)
        sizes = np.array([float(s) for s in self.basis.sizes()])
        acc /= sizes[None, :]
        if d_ref == 1:
            vals = {r: acc[0, r] for r in range(m_orb) if acc[0, r] != 0}
            return OrbitCoefficients(self.basis, vals)
        return RefCoefficients(self.basis, d_ref, acc.reshape(d_ref, d_ref, m_orb))

    def identity_blocks(self, d_ref: int = 1) -> BlockRep:
        blocks = [
            np.eye(d_ref * m, dtype=complex) for m in self.block_dims
        ]
        return self._wrap(blocks, d_ref, ORTHO)

    def orbit_image(self, r: int, lam_index: int, gauge: str = ORTHO) -> np.ndarray:
        """Dense image of a single orbit inside one block."""
        m = self.block_dims[lam_index]
        mat = self._maps(gauge)[lam_index]
        col = mat[:, r].todense() if sp.issparse(mat) else mat[:, r]
        return np.asarray(col).reshape(m, m)


def _as_values(x, cob: ChangeOfBasis):
    if isinstance(x, RefCoefficients):
        _check_basis(x.basis, cob)
        return x.values, x.d_ref
    if isinstance(x, OrbitCoefficients):
        _check_basis(x.basis, cob)
        return x.to_dense_vector().reshape(1, 1, -1), 1
    raise TypeError("expected OrbitCoefficients or RefCoefficients")


def _check_basis(basis: OrbitBasis, cob: ChangeOfBasis):
    if len(basis.orbits) != len(cob.basis.orbits) or basis.index != cob.basis.index:
        raise GaugeError("coefficients were built on a different basis than this map")


def gram(lam: Partition, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Gram matrix of the Young-symmetrized vectors of one shape, and the
    factor R with R R^T equal to its inverse.

    Entries come from evaluating the encoding polynomials at the identity
    grid; the matrix is block diagonal over tableau weights and each weight
    block is inverted by its own eigendecomposition.  A condition number
    beyond 1e12 raises instead of clamping, since the matrix is positive
    definite by construction.
    """
    tabs = ssyt_enumerate(lam, d)
    m = len(tabs)
    G = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            val = float(eval_at_identity(encoding_poly_m2(tabs[i], tabs[j], d), d))
            G[i, j] = G[j, i] = val
    R = np.zeros((m, m))
    by_weight: dict[tuple, list[int]] = {}
    for i, t in enumerate(tabs):
        by_weight.setdefault(weight(t, d), []).append(i)
    for idxs in by_weight.values():
        sub = G[np.ix_(idxs, idxs)]
        ev, V = np.linalg.eigh(sub)
        if ev.min() <= 0 or ev.max() / ev.min() > _GRAM_CONDITION_LIMIT:
            raise SingularGramError(
                f"Gram block for shape {lam} is numerically singular"
            )
        R[np.ix_(idxs, idxs)] = V @ np.diag(1.0 / np.sqrt(ev)) @ V.T
    return G, R


# -- serialization ---------------------------------------------------------

CACHE_FORMAT_VERSION = 1


def save_change_of_basis(cob: ChangeOfBasis, path) -> None:
    """Versioned binary container: header (version, d, n, orbit count), then
    per-partition parts, Specht dimension, Gram matrix, factor, and the
    sparse triplets (row position, orbit column, value) of the raw images."""
    payload = {
        "header": np.array([CACHE_FORMAT_VERSION, cob.d, cob.n, len(cob.basis.orbits)]),
        "num_blocks": np.array([len(cob.partitions)]),
    }
    for i, (lam, G, R, S) in enumerate(
        zip(cob.partitions, cob.gram, cob.gram_factor, cob.raw_maps)
    ):
        coo = S.tocoo()
        payload[f"lam{i}_parts"] = np.array(lam, dtype=np.int64)
        payload[f"lam{i}_gram"] = G
        payload[f"lam{i}_factor"] = R
        payload[f"lam{i}_rows"] = coo.row
        payload[f"lam{i}_cols"] = coo.col
        payload[f"lam{i}_vals"] = coo.data
    np.savez_compressed(path, **payload)


def load_change_of_basis(path) -> ChangeOfBasis:
    with np.load(path) as data:
        version, d, n, m_orb = (int(v) for v in data["header"])
        if version != CACHE_FORMAT_VERSION:
            raise ValueError(f"unsupported cache format version {version}")
        cob = ChangeOfBasis.__new__(ChangeOfBasis)
        cob.d = d
        cob.n = n
        cob.basis = OrbitBasis(SystemSpec((d,), n))
        if len(cob.basis.orbits) != m_orb:
            raise ValueError("cache file is inconsistent with its own header")
        nb = int(data["num_blocks"][0])
        cob.partitions = [tuple(int(p) for p in data[f"lam{i}_parts"]) for i in range(nb)]
        cob.tableaux = [ssyt_enumerate(lam, d) for lam in cob.partitions]
        cob.block_dims = tuple(len(t) for t in cob.tableaux)
        cob.specht = tuple(syt_count(lam) for lam in cob.partitions)
        cob.gram = [data[f"lam{i}_gram"] for i in range(nb)]
        cob.gram_factor = [data[f"lam{i}_factor"] for i in range(nb)]
        cob.raw_maps = []
        cob.ortho_maps = []
        for i, m in enumerate(cob.block_dims):
            S = sp.csr_matrix(
                (data[f"lam{i}_vals"], (data[f"lam{i}_rows"], data[f"lam{i}_cols"])),
                shape=(m * m, m_orb),
            )
            cob.raw_maps.append(S)
            R = cob.gram_factor[i]
            K = np.kron(R.T, R.T)
            cob.ortho_maps.append(np.asarray(K @ S.todense()))
        return cob
