"""Single-copy Choi constructors, normalization conventions, entanglement
fidelity, and closed-form benchmark fidelities.

Internally everything composes with unnormalized Choi matrices (trace equal
to the input dimension); the normalized convention divides by the input
dimension and is offered at the API boundary.  The composite index of a
Choi matrix is (input, output) row-major.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import sqrt
from typing import Optional

import numpy as np

GAMMA = "gamma"   # unnormalized, trace d_in
PHI = "phi"       # normalized, trace 1

_PSD_TOL = 1e-10


@dataclass(frozen=True)
class FlagBlock:
    prob: float
    gamma: np.ndarray  # unnormalized Choi of the branch channel


@dataclass
class ChoiMatrix:
    """Dense single-copy Choi matrix with declared dimensions and convention.

    When `flags` is present the channel output carries a classical label:
    the full matrix is block diagonal over flag sectors, sector i holding
    prob_i times the branch Choi.
    """

    d_in: int
    d_out: int
    matrix: np.ndarray
    normalization: str = GAMMA
    flags: Optional[tuple[FlagBlock, ...]] = None

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        k = self.d_in * self.total_out
        if self.matrix.shape != (k, k):
            raise ValueError(f"Choi matrix must be {k}x{k}")
        if self.normalization not in (GAMMA, PHI):
            raise ValueError("normalization must be 'gamma' or 'phi'")
        self._validate()

    @property
    def num_flags(self) -> int:
        return len(self.flags) if self.flags else 1

    @property
    def total_out(self) -> int:
        """Output dimension including the flag label."""
        return self.d_out * self.num_flags

    def _validate(self):
        H = 0.5 * (self.matrix + self.matrix.conj().T)
        if np.max(np.abs(H - self.matrix)) > 1e-9:
            raise ValueError("Choi matrix must be Hermitian")
        ev = np.linalg.eigvalsh(H)
        if ev.min() < -_PSD_TOL * max(1.0, ev.max()):
            raise ValueError(f"Choi matrix is not PSD (min eigenvalue {ev.min():.3e})")
        scale = 1.0 if self.normalization == PHI else float(self.d_in)
        tr_out = np.trace(
            self.matrix.reshape(self.d_in, self.total_out, self.d_in, self.total_out),
            axis1=1, axis2=3,
        )
        target = (scale / self.d_in) * np.eye(self.d_in)
        if np.max(np.abs(tr_out - target)) > 1e-8:
            raise ValueError("Choi matrix violates the trace constraint")

    def gamma(self) -> np.ndarray:
        """Unnormalized convention (trace d_in)."""
        if self.normalization == GAMMA:
            return self.matrix
        return self.matrix * self.d_in

    def phi(self) -> np.ndarray:
        """Normalized convention (trace 1)."""
        if self.normalization == PHI:
            return self.matrix
        return self.matrix / self.d_in


def identity_channel(d: int) -> ChoiMatrix:
    g = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            g[i * d + i, j * d + j] = 1.0
    return ChoiMatrix(d, d, g)


def replacement(d_in: int, sigma: Optional[np.ndarray] = None, d_out: Optional[int] = None) -> ChoiMatrix:
    """Channel discarding its input and preparing a fixed state."""
    if sigma is None:
        d_out = d_out or d_in
        sigma = np.eye(d_out) / d_out
    sigma = np.asarray(sigma, dtype=complex)
    d_out = sigma.shape[0]
    g = np.kron(np.eye(d_in), sigma)
    return ChoiMatrix(d_in, d_out, g)


def adc(gamma_p: float) -> ChoiMatrix:
    """Qubit amplitude damping with decay probability gamma_p."""
    if not 0.0 <= gamma_p <= 1.0:
        raise ValueError("damping probability must lie in [0, 1]")
    s = sqrt(1.0 - gamma_p)
    g = np.array(
        [
            [1, 0, 0, s],
            [0, 0, 0, 0],
            [0, 0, gamma_p, 0],
            [s, 0, 0, 1 - gamma_p],
        ],
        dtype=complex,
    )
    return ChoiMatrix(2, 2, g)


def depolarizing(p: float) -> ChoiMatrix:
    """Qubit channel keeping the input with probability 1-p and replacing it
    by the maximally mixed state with probability p; uncoded entanglement
    fidelity 1 - 3p/4."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("depolarizing probability must lie in [0, 1]")
    g = (1 - p) * identity_channel(2).matrix + p * 0.5 * np.eye(4)
    return ChoiMatrix(2, 2, g)


def flagged(channels: list[ChoiMatrix], probs: list[float]) -> ChoiMatrix:
    """Classical-flagged mixture: block-diagonal Choi with blocks p_i Gamma_i."""
    if len(channels) != len(probs):
        raise ValueError("need one probability per channel")
    if abs(sum(probs) - 1.0) > 1e-12:
        raise ValueError("probabilities must sum to one")
    d_in = channels[0].d_in
    d_out = channels[0].d_out
    for c in channels:
        if c.d_in != d_in or c.d_out != d_out or c.flags:
            raise ValueError("flag branches must be unflagged channels of equal dims")
    ell = len(channels)
    big = np.zeros((d_in * d_out * ell, d_in * d_out * ell), dtype=complex)
    blocks = []
    for i, (c, p) in enumerate(zip(channels, probs)):
        g = c.gamma()
        blocks.append(FlagBlock(float(p), g))
        for a in range(d_in):
            for b in range(d_in):
                sub = g[a * d_out:(a + 1) * d_out, b * d_out:(b + 1) * d_out]
                ra = a * (d_out * ell) + i * d_out
                rb = b * (d_out * ell) + i * d_out
                big[ra:ra + d_out, rb:rb + d_out] = p * sub
    return ChoiMatrix(d_in, d_out, big, flags=tuple(blocks))


def entanglement_fidelity(m, d: Optional[int] = None) -> float:
    """Overlap of the Choi state with the maximally entangled state.

    For a flagged channel the overlap is evaluated sector by sector (measure
    the flag, then compare with the maximally entangled state), which by
    linearity equals the probability-weighted branch fidelities.  Besides
    dense single-copy Choi matrices, single-copy coefficient sets and block
    representations are accepted: the overlap is then the 1/d^2-weighted
    multiplicity trace against the unnormalized maximally entangled operator,
    the same pairing the seesaw objective uses.  Copy numbers above one have
    no canonical entangled target and need the paired objective instead.
    """
    if isinstance(m, ChoiMatrix):
        if m.flags:
            return float(
                sum(
                    f.prob * _fid_dense(f.gamma, m.d_in, m.d_out)
                    for f in m.flags
                )
            )
        return _fid_dense(m.gamma(), m.d_in, m.d_out)
    from .blockmap import ORTHO, BlockRep
    from .linkprod import RefCoefficients, ref_hs_inner

    if isinstance(m, RefCoefficients):
        n = m.basis.spec.copies
        d_s = m.basis.spec.dim
        if n != 1 or d is None or d_s != d or m.d_ref != d:
            raise ValueError("coefficient-path fidelity needs one copy and matching dims")
        mes = RefCoefficients.zeros(m.basis, d)
        for k in range(d):
            for l in range(d):
                idx = m.basis.index[tuple(
                    1 if (a, b) == (k, l) else 0 for a in range(d) for b in range(d)
                )]
                mes.values[k, l, idx] = 1.0
        return float(np.real(ref_hs_inner(mes, m))) / d**2
    if isinstance(m, BlockRep):
        if m.gauge != ORTHO or m.n != 1 or d is None or m.d != d or m.d_ref != d:
            raise ValueError("block-path fidelity needs one copy and matching dims")
        gamma_mes = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            for j in range(d):
                gamma_mes[i * d + i, j * d + j] = 1.0
        total = sum(
            w * np.real(np.trace(gamma_mes @ B)) for w, B in zip(m.weights, m.blocks)
        )
        return float(total) / d**2
    raise TypeError("unsupported operand for entanglement_fidelity")


def _fid_dense(gamma_mat: np.ndarray, d_in: int, d_out: int) -> float:
    if d_in != d_out:
        raise ValueError("entanglement fidelity needs equal input and output dims")
    d = d_in
    total = 0.0
    for i in range(d):
        for j in range(d):
            total += np.real(gamma_mat[i * d + i, j * d + j])
    return float(total) / d**2


def reference_curves(kind: str, param: float) -> float:
    """Closed-form benchmark fidelities for the two studied channels."""
    if kind == "leung4":
        g = param
        root = sqrt(1.0 + (g - 1.0) ** 4) / (2.0 * sqrt(2.0))
        return 0.5 + root + g - root * g - 15.0 / 4.0 * g**2 + 3.5 * g**3 - g**4
    if kind == "fivequbit":
        p = param
        return 1.0 - 45.0 / 8.0 * p**2 + 75.0 / 8.0 * p**3 - 45.0 / 8.0 * p**4 + 9.0 / 8.0 * p**5
    if kind == "uncoded_adc":
        return ((1.0 + sqrt(1.0 - param)) / 2.0) ** 2
    if kind == "uncoded_depolarizing":
        return 1.0 - 0.75 * param
    raise ValueError(f"unknown reference curve {kind!r}")


# -- JSON channel files -----------------------------------------------------

def _entries_to_matrix(entries, k: int) -> np.ndarray:
    m = np.zeros((k, k), dtype=complex)
    for idx, e in enumerate(entries):
        try:
            row, col = int(e["row"]), int(e["col"])
            val = complex(float(e.get("re", 0.0)), float(e.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"bad entry at position {idx}: {e!r}") from exc
        if not (0 <= row < k and 0 <= col < k):
            raise ValueError(f"bad entry at position {idx}: index out of range")
        m[row, col] = val
    return m


def choi_from_json(text: str) -> ChoiMatrix:
    """Parse the channel file format: dimensions, sparse entries of the
    composite (in x out, row-major) matrix, normalization, optional flags."""
    data = json.loads(text)
    d_in = int(data["d_in"])
    d_out = int(data["d_out"])
    norm = data.get("normalization", GAMMA)
    if "flags" in data and data["flags"]:
        branches = []
        probs = []
        for i, f in enumerate(data["flags"]):
            try:
                probs.append(float(f["prob"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"bad flag {i}: missing prob") from exc
            m = _entries_to_matrix(f["entries"], d_in * d_out)
            if norm == PHI:
                m = m * d_in
            branches.append(ChoiMatrix(d_in, d_out, m))
        return flagged(branches, probs)
    m = _entries_to_matrix(data["entries"], d_in * d_out)
    return ChoiMatrix(d_in, d_out, m, normalization=norm)


def choi_to_json(c: ChoiMatrix) -> str:
    def entries_of(mat):
        out = []
        for row in range(mat.shape[0]):
            for col in range(mat.shape[1]):
                v = mat[row, col]
                if v != 0:
                    out.append(
                        {"row": row, "col": col, "re": float(v.real), "im": float(v.imag)}
                    )
        return out

    data = {"d_in": c.d_in, "d_out": c.d_out, "normalization": GAMMA}
    if c.flags:
        data["flags"] = [
            {"prob": f.prob, "entries": entries_of(f.gamma)} for f in c.flags
        ]
    else:
        data["entries"] = entries_of(c.gamma())
    return json.dumps(data, indent=2, sort_keys=True)
