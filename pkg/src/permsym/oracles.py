"""Dense reference implementations used by the validation suite and tests.

Everything here builds exponentially large matrices on purpose: these are
the independent oracles that the coefficient-space and block-space code is
checked against at small (d, n).  None of it is on any production path.
"""

from __future__ import annotations

from itertools import permutations, product

import numpy as np

from .orbits import CountMatrix, OrbitCoefficients, count_of_pair


def multi_indices(d: int, n: int):
    """All length-n multi-indices over 0..d-1, row-major order."""
    return list(product(range(d), repeat=n))


def dense_orbit_matrix(E: CountMatrix, d: int, n: int) -> np.ndarray:
    """The 0/1 incidence matrix of an orbit, shape (d^n, d^n)."""
    idx = multi_indices(d, n)
    M = np.zeros((d**n, d**n))
    for p, i in enumerate(idx):
        for q, j in enumerate(idx):
            if count_of_pair(i, j, d).entries == E.entries:
                M[p, q] = 1.0
    return M


def dense_orbit_matrices_all(basis) -> dict[int, np.ndarray]:
    """All incidence matrices of a basis in one pass over index pairs."""
    d = basis.spec.dim
    n = basis.spec.copies
    idx = multi_indices(d, n)
    out = {r: np.zeros((d**n, d**n)) for r in range(len(basis.orbits))}
    for p, i in enumerate(idx):
        for q, j in enumerate(idx):
            r = basis.index.get(count_of_pair(i, j, d).entries)
            if r is not None:
                out[r][p, q] = 1.0
    return out


def dense_reconstruct(x: OrbitCoefficients) -> np.ndarray:
    """Sum of coefficient * incidence matrix over the sparse support."""
    d = x.basis.spec.dim
    n = x.basis.spec.copies
    M = np.zeros((d**n, d**n), dtype=complex)
    for r, v in x.values.items():
        M += v * dense_orbit_matrix(x.basis.orbits[r], d, n)
    return M


def symmetrize(M: np.ndarray, d: int, n: int) -> np.ndarray:
    """Average of P(pi) M P(pi)^T over the full symmetric group."""
    idx = multi_indices(d, n)
    pos = {i: p for p, i in enumerate(idx)}
    out = np.zeros(np.asarray(M).shape, dtype=complex)
    count = 0
    for pi in permutations(range(n)):
        perm = np.array([pos[tuple(i[pi[k]] for k in range(n))] for i in idx])
        out += M[np.ix_(perm, perm)]
        count += 1
    return out / count


def _group_factors(M: np.ndarray, dims: tuple[int, int], n: int) -> np.ndarray:
    """Reshape (dA dB)^n square matrix to shape (dA^n, dB^n, dA^n, dB^n)."""
    dA, dB = dims
    T = M.reshape((dA, dB) * (2 * n))
    row_a = [2 * k for k in range(n)]
    row_b = [2 * k + 1 for k in range(n)]
    col_a = [2 * n + a for a in row_a]
    col_b = [2 * n + b for b in row_b]
    T = T.transpose(row_a + row_b + col_a + col_b)
    return T.reshape(dA**n, dB**n, dA**n, dB**n)


def dense_partial_trace(M: np.ndarray, dims: tuple[int, int], n: int, traced: str = "B") -> np.ndarray:
    """Partial trace over all n copies of one factor of (A tensor B)^n.

    The composite index of a single copy is a_A * d_B + a_B; copies are
    row-major.  The result lives on the n-fold power of the kept factor.
    """
    T4 = _group_factors(np.asarray(M), dims, n)
    if traced == "B":
        return np.einsum("ibjb->ij", T4)
    if traced == "A":
        return np.einsum("aiaj->ij", T4)
    raise ValueError("traced must be 'A' or 'B'")


def dense_partial_transpose(M: np.ndarray, dims: tuple[int, int], n: int, side: str = "B") -> np.ndarray:
    """Partial transpose on all n copies of one factor."""
    dA, dB = dims
    T = M.reshape((dA, dB) * n * 2)
    half = 2 * n
    for k in range(n):
        if side == "B":
            ax = 2 * k + 1
        else:
            ax = 2 * k
        T = np.swapaxes(T, ax, ax + half)
    d = dA * dB
    return T.reshape(d**n, d**n)


def dense_link_product(gamma_n: np.ndarray, gamma_d: np.ndarray, d_mid: int, d_left: int, d_right: int) -> np.ndarray:
    """Choi matrix of a serial concatenation, Tr_B[(G_N)^{T_B} (1 x G_D)].

    gamma_n lives on left x mid, gamma_d on mid x right; the result lives on
    left x right.
    """
    GN = gamma_n.reshape(d_left, d_mid, d_left, d_mid)
    GD = gamma_d.reshape(d_mid, d_right, d_mid, d_right)
    # Tr_mid[(GN)^{T_mid} (GD)] couples row-mid to row-mid and col-mid to
    # col-mid once the partial transpose is absorbed into the contraction:
    # out[l, r, l', r'] = sum_{m, q} GN[l,m,l',q] GD[m,r,q,r']
    out = np.einsum("lmpq,mrqs->lrps", GN, GD)
    return out.reshape(d_left * d_right, d_left * d_right)


def dense_choi_of_channel_action(kraus, d_in: int, d_out: int) -> np.ndarray:
    """Unnormalized Choi matrix from Kraus operators."""
    G = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            Eij = np.zeros((d_in, d_in), dtype=complex)
            Eij[i, j] = 1.0
            out = sum(K @ Eij @ K.conj().T for K in kraus)
            G[i * d_out:(i + 1) * d_out, j * d_out:(j + 1) * d_out] = out
    return G


def random_cptp_choi(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    """Unnormalized Choi matrix of a Haar-ish random CPTP map (Ginibre)."""
    k = d_in * d_out
    G = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    W = G @ G.conj().T
    # enforce Tr_out = 1_in by sandwiching with (Tr_out W)^{-1/2} on the in factor
    Wr = W.reshape(d_in, d_out, d_in, d_out)
    T = np.trace(Wr, axis1=1, axis2=3)
    ev, U = np.linalg.eigh(T)
    T_isqrt = U @ np.diag(1.0 / np.sqrt(ev)) @ U.conj().T
    S = np.kron(T_isqrt, np.eye(d_out))
    return S @ W @ S.conj().T


def dense_power_fd(gamma_m: np.ndarray, d: int, d_b: int, rng: np.random.Generator,
                   restarts: int = 20, iters: int = 2000, tol: float = 1e-12) -> float:
    """Dense channel power iteration for the maximal fidelity of recovery.

    gamma_m is the unnormalized Choi of M: R' -> B on R x B with d_R = d.
    Sandwich with the Choi, renormalize the B marginal to the identity, and
    track (1/d^2) Tr[G_D* G_M]; best value over random restarts.
    """
    best = 0.0
    for _ in range(restarts):
        D = random_cptp_choi(d_b, d, rng)  # Choi of D: B -> R', on B x R'
        # adjoint Choi on R x B: transpose then exchange factors
        Dstar = D.T.reshape(d_b, d, d_b, d).transpose(1, 0, 3, 2).reshape(d * d_b, d * d_b)
        prev = -1.0
        for _ in range(iters):
            X = gamma_m @ Dstar @ gamma_m
            X = 0.5 * (X + X.conj().T)
            Xb = np.trace(X.reshape(d, d_b, d, d_b), axis1=0, axis2=2)
            ev, U = np.linalg.eigh(Xb)
            inv = np.where(ev > 1e-14 * max(ev.max(), 1e-300), 1.0 / np.sqrt(np.abs(ev)), 0.0)
            S = np.kron(np.eye(d), U @ np.diag(inv) @ U.conj().T)
            Dstar = S @ X @ S.conj().T
            fid = float(np.real(np.trace(Dstar @ gamma_m))) / d**2
            done = abs(fid - prev) < tol
            prev = fid
            if done:
                break
        best = max(best, prev)
    return best
