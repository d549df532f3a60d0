"""Named invariant suites driven by the command line.

Each check rebuilds its own small tables, compares the coefficient- and
block-space code against explicitly constructed dense matrices, and reports
one (name, passed, detail) row.  The quick level keeps every dense object at
two copies or fewer; full extends to the sizes used in the acceptance tests.
"""

from __future__ import annotations

from math import comb

import numpy as np

from . import oracles
from .algebras import AlgebraSpec, algebra_marginal_data, algebra_orbits, kappa_block_decomposition
from .blockmap import ChangeOfBasis
from .blockops import block_hs, block_trace
from .channels import adc, identity_channel, replacement
from .linkprod import compose_after_encoder
from .orbits import (
    OrbitCoefficients,
    SystemSpec,
    enumerate_orbits,
    hs_inner,
    marginal_data,
    partial_trace_coeffs,
    partial_transpose_coeffs,
    tensor_coefficients,
    trace_coeffs,
    transpose_coeffs,
)
from .polynomials import encoding_poly_m1, encoding_poly_m2
from .seesaw import SeesawConfig, seesaw_run
from .tableaux import partitions, ssyt_count, ssyt_enumerate, syt_count


class Check:
    def __init__(self, name, fn):
        self.name = name
        self.fn = fn

    def run(self):
        try:
            detail = self.fn()
            return self.name, True, detail or "ok"
        except AssertionError as exc:
            return self.name, False, str(exc) or "assertion failed"
        except Exception as exc:  # diagnostics still name the invariant
            return self.name, False, f"{type(exc).__name__}: {exc}"


def _random_coeffs(basis, rng):
    vals = {
        r: complex(rng.standard_normal(), rng.standard_normal())
        for r in range(len(basis))
    }
    return OrbitCoefficients(basis, vals)


def _check_dense_orbit_ops(n):
    rng = np.random.default_rng(100 + n)
    basis = enumerate_orbits(SystemSpec((2, 2), n))
    md = marginal_data(basis)
    x = _random_coeffs(basis, rng)
    dense = oracles.dense_reconstruct(x)
    assert abs(trace_coeffs(x) - np.trace(dense)) < 1e-12, "trace mismatch"
    assert abs(hs_inner(x, x) - np.trace(dense.conj().T @ dense)) < 1e-10, "HS mismatch"
    dt = oracles.dense_reconstruct(transpose_coeffs(x))
    assert np.max(np.abs(dt - dense.T)) < 1e-12, "transpose mismatch"
    dpt = oracles.dense_reconstruct(partial_transpose_coeffs(x, "B"))
    assert np.max(np.abs(dpt - oracles.dense_partial_transpose(dense, (2, 2), n, "B"))) < 1e-12, \
        "partial transpose mismatch"
    dtr = oracles.dense_reconstruct(partial_trace_coeffs(x, md, "B"))
    assert np.max(np.abs(dtr - oracles.dense_partial_trace(dense, (2, 2), n, "B"))) < 1e-12, \
        "partial trace mismatch"
    return f"n={n} trace/HS/transpose/partial ops match dense"


def _check_partial_trace_kappa(n):
    # single-orbit probes so that a corrupted weight cannot hide in sums
    basis = enumerate_orbits(SystemSpec((2, 2), n))
    md = marginal_data(basis)
    for s, E in enumerate(basis.orbits):
        x = OrbitCoefficients(basis, {s: 1.0})
        got = oracles.dense_reconstruct(partial_trace_coeffs(x, md, "B"))
        want = oracles.dense_partial_trace(
            oracles.dense_orbit_matrix(E, 4, n), (2, 2), n, "B"
        )
        assert np.max(np.abs(got - want)) < 1e-12, f"kappa weight wrong at orbit {s}"
    return f"n={n}: every single-orbit partial trace matches dense"


def _check_link_dense(n):
    rng = np.random.default_rng(200 + n)
    basis = enumerate_orbits(SystemSpec((2, 2), n))
    md = marginal_data(basis)
    gamma = adc(0.3).gamma()
    chan = tensor_coefficients(gamma, n, basis)
    # random symmetric encoder built in the block basis
    from .seesaw import random_symmetric_seed

    cob = ChangeOfBasis(2, n)
    enc = cob.psi_tilde_inv(random_symmetric_seed(cob, 2, "encoder", rng))
    out = compose_after_encoder(chan, enc, md)
    # oracle: dense link product of densified encoder with the grouped power
    dense_enc = _ref_dense(enc)
    g_pow = gamma
    for _ in range(n - 1):
        g_pow = np.kron(g_pow, gamma)
    g_sides = oracles._group_factors(g_pow, (2, 2), n).reshape(4**n, 4**n)
    want = oracles.dense_link_product(dense_enc, g_sides, d_mid=2**n, d_left=2, d_right=2**n)
    got = _ref_dense(out)
    assert np.max(np.abs(got - want)) < 1e-10, "link product mismatch"
    return f"n={n} composition matches dense link product"


def _ref_dense(ref):
    d = ref.basis.spec.dim
    n = ref.basis.spec.copies
    D = d**n
    out = np.zeros((ref.d_ref * D, ref.d_ref * D), dtype=complex)
    for r, E in enumerate(ref.basis.orbits):
        block = np.asarray(ref.values[:, :, r])
        if not np.any(block):
            continue
        out += np.kron(block, oracles.dense_orbit_matrix(E, d, n))
    return out


def _check_dimension_anchors():
    for n, plain, flagged_count in [(2, 136, 36), (3, 816, 120), (4, 3876, 330)]:
        assert len(enumerate_orbits(SystemSpec((4,), n))) == plain, f"plain count n={n}"
        assert len(algebra_orbits(AlgebraSpec((2, 2), n))) == flagged_count, f"flagged count n={n}"
    return "orbit counts 136/816/3876 and 36/120/330 verified"


def _check_methods(n_max, d3=False):
    for n in range(1, n_max + 1):
        for lam in partitions(2, n):
            tabs = ssyt_enumerate(lam, 2)
            for ta in tabs:
                for tb in tabs:
                    assert encoding_poly_m1(ta, tb, 2) == encoding_poly_m2(ta, tb, 2), \
                        f"method disagreement at d=2 shape {lam}"
    if d3:
        rng = np.random.default_rng(1)
        for n in range(1, 5):
            for lam in partitions(3, n):
                tabs = ssyt_enumerate(lam, 3)
                pick = [tabs[int(i)] for i in rng.integers(0, len(tabs), size=min(2, len(tabs)))]
                for ta in pick:
                    for tb in pick:
                        assert encoding_poly_m1(ta, tb, 3) == encoding_poly_m2(ta, tb, 3), \
                            f"method disagreement at d=3 shape {lam}"
    return f"both polynomial constructions agree up to n={n_max}"


def _check_block_iso(n):
    rng = np.random.default_rng(300 + n)
    cob = ChangeOfBasis(2, n)
    X = oracles.symmetrize(
        rng.standard_normal((2**n, 2**n)) + 1j * rng.standard_normal((2**n, 2**n)), 2, n
    )
    Y = oracles.symmetrize(
        rng.standard_normal((2**n, 2**n)) + 1j * rng.standard_normal((2**n, 2**n)), 2, n
    )
    x = _coeffs_from_dense(X, cob.basis)
    y = _coeffs_from_dense(Y, cob.basis)
    bx, by = cob.psi_tilde(x), cob.psi_tilde(y)
    bxy = cob.psi_tilde(_coeffs_from_dense(X @ Y, cob.basis))
    for Bx, By, Bxy in zip(bx.blocks, by.blocks, bxy.blocks):
        assert np.max(np.abs(Bx @ By - Bxy)) < 1e-9, "multiplicativity failed"
    assert abs(block_trace(bx) - trace_coeffs(x)) < 1e-10, "trace identity failed"
    assert abs(block_hs(bx, by) - hs_inner(x, y)) < 1e-9, "HS identity failed"
    ident = cob.psi_tilde(OrbitCoefficients(
        cob.basis, {r: 1.0 for r, E in enumerate(cob.basis.orbits) if E.is_diagonal()}
    ))
    for m, B in zip(cob.block_dims, ident.blocks):
        assert np.max(np.abs(B - np.eye(m))) < 1e-9, "identity not mapped to identity"
    P = rng.standard_normal((2**n, 2**n)) + 1j * rng.standard_normal((2**n, 2**n))
    psd = oracles.symmetrize(P @ P.conj().T, 2, n)
    bp = cob.psi(_coeffs_from_dense(psd, cob.basis))
    for B in bp.blocks:
        assert np.linalg.eigvalsh(0.5 * (B + B.conj().T)).min() > -1e-9, "positivity lost"
    return f"n={n} product/trace/HS/identity/positivity verified"


def _coeffs_from_dense(M, basis):
    vals = {}
    for r, E in enumerate(basis.orbits):
        C = oracles.dense_orbit_matrix(E, basis.spec.dim, basis.spec.copies)
        c = np.sum(C * M) / basis.sizes()[r]
        if c != 0:
            vals[r] = complex(c)
    return OrbitCoefficients(basis, vals)


def _check_schur_weyl_dims(n_max):
    for d in (2, 3):
        for n in range(1, n_max + 1):
            ms = [ssyt_count(lam, d) for lam in partitions(d, n)]
            fs = [syt_count(lam) for lam in partitions(d, n)]
            assert sum(m * m for m in ms) == comb(n + d * d - 1, n), f"d={d} n={n} m^2 sum"
            assert sum(m * f for m, f in zip(ms, fs)) == d**n, f"d={d} n={n} m*f sum"
    return f"dimension identities exact for d in (2,3), n <= {n_max}"


def _check_kappa_decomposition():
    spec_b = AlgebraSpec((2, 2), 3)
    md = algebra_marginal_data(2, spec_b)
    for s, E in enumerate(md.basis_joint.orbits):
        assert kappa_block_decomposition(E, 2, spec_b) == md.kappa_a[s], \
            f"sector decomposition differs at joint orbit {s}"
    return "per-sector weight decomposition matches the direct multinomial"


def _check_fidelity_anchors_quick():
    res = seesaw_run(identity_channel(2), SeesawConfig(n=1, d=2, seeds=1, rng_seed=0))
    assert abs(res.fidelity - 1.0) < 1e-6, "identity channel fidelity"
    res = seesaw_run(replacement(2), SeesawConfig(n=1, d=2, seeds=1, rng_seed=0))
    assert abs(res.fidelity - 0.25) < 1e-8, "replacement channel floor"
    return "identity -> 1 and replacement -> 1/d^2"


def quick_checks() -> list[Check]:
    return [
        Check("orbit-dense-equivalence-n1", lambda: _check_dense_orbit_ops(1)),
        Check("orbit-dense-equivalence-n2", lambda: _check_dense_orbit_ops(2)),
        Check("partial-trace-kappa", lambda: _check_partial_trace_kappa(2)),
        Check("link-product-dense", lambda: _check_link_dense(2)),
        Check("dimension-anchors", _check_dimension_anchors),
        Check("method-cross-validation", lambda: _check_methods(3)),
        Check("block-isomorphism", lambda: _check_block_iso(2)),
        Check("schur-weyl-dimensions", lambda: _check_schur_weyl_dims(5)),
        Check("fidelity-anchors", _check_fidelity_anchors_quick),
    ]


def full_checks() -> list[Check]:
    return quick_checks() + [
        Check("orbit-dense-equivalence-n3", lambda: _check_dense_orbit_ops(3)),
        Check("method-cross-validation-full", lambda: _check_methods(6, d3=True)),
        Check("block-isomorphism-n3", lambda: _check_block_iso(3)),
        Check("schur-weyl-dimensions-n8", lambda: _check_schur_weyl_dims(8)),
        Check("kappa-sector-decomposition", _check_kappa_decomposition),
    ]


def run_level(level: str):
    checks = quick_checks() if level == "quick" else full_checks()
    return [c.run() for c in checks]
