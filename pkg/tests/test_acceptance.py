"""Acceptance suite: every exit criterion as one test, each printing its own
pass line (run with -s to see them inline).  Tolerances are pinned here and
match the module invariants."""

import time
from math import comb

import numpy as np
import pytest

from denseref import ref_from_dense, regroup_copies_to_sides, kron_power, swap_factors, symmetrize_ref
from permsym.algebras import AlgebraSpec, algebra_orbits
from permsym.blockmap import ChangeOfBasis
from permsym.blockops import block_hs, block_trace
from permsym.channels import adc, depolarizing, flagged, identity_channel, replacement
from permsym.linkprod import build_tripartite, compose_after_encoder, compose_covariant
from permsym.oracles import (
    dense_link_product,
    dense_orbit_matrices_all,
    dense_partial_trace,
    dense_partial_transpose,
    dense_power_fd,
    dense_reconstruct,
    random_cptp_choi,
    symmetrize,
)
from permsym.orbits import (
    OrbitCoefficients,
    SystemSpec,
    enumerate_orbits,
    hs_inner,
    marginal_data,
    orbit_size,
    partial_trace_coeffs,
    partial_transpose_coeffs,
    tensor_coefficients,
    trace_coeffs,
    trace_orbit,
    transpose_coeffs,
)
from permsym.polynomials import encoding_poly_m1, encoding_poly_m2
from permsym.seesaw import (
    SeesawConfig,
    power_fd,
    power_fe,
    random_symmetric_seed,
    seesaw_flagged,
    seesaw_run,
)
from permsym.tableaux import partitions, ssyt_count, ssyt_enumerate, syt_count


def report(criterion, detail):
    print(f"ACCEPTANCE {criterion}: PASS ({detail})")


def random_coeffs(basis, rng):
    # normalized to unit Hilbert-Schmidt scale so that absolute float
    # comparisons at 1e-12 are meaningful
    scale = 1.0 / np.sqrt(float(sum(basis.sizes())))
    vals = {
        r: scale * complex(rng.standard_normal(), rng.standard_normal())
        for r in range(len(basis))
    }
    return OrbitCoefficients(basis, vals)


def test_criterion_1_dense_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    for n in (1, 2, 3):
        basis = enumerate_orbits(SystemSpec((2, 2), n))
        md = marginal_data(basis)
        dense_all = dense_orbit_matrices_all(basis)
        # integer outputs exact
        for r, E in enumerate(basis.orbits):
            C = dense_all[r]
            assert orbit_size(E) == int(np.sum(C))
            assert trace_orbit(E) == int(round(np.trace(C)))
        x = random_coeffs(basis, rng)
        dense = sum(v * dense_all[r] for r, v in x.values.items())
        assert abs(trace_coeffs(x) - np.trace(dense)) < 1e-12
        assert abs(hs_inner(x, x) - np.trace(dense.conj().T @ dense)) < 1e-12
        assert np.max(np.abs(dense_reconstruct(transpose_coeffs(x)) - dense.T)) < 1e-12
        assert np.max(np.abs(
            dense_reconstruct(partial_transpose_coeffs(x, "B"))
            - dense_partial_transpose(dense, (2, 2), n, "B"))) < 1e-12
        assert np.max(np.abs(
            dense_reconstruct(partial_trace_coeffs(x, md, "B"))
            - dense_partial_trace(dense, (2, 2), n, "B"))) < 1e-12
        # link product against the dense formula
        gN = adc(0.35).gamma()
        chan = tensor_coefficients(gN, n, basis)
        cob = ChangeOfBasis(2, n)
        enc = cob.psi_tilde_inv(
            random_symmetric_seed(cob, 2, "encoder", np.random.default_rng(n))
        )
        out = compose_after_encoder(chan, enc, md)
        from denseref import ref_to_dense
        gNn = regroup_copies_to_sides(kron_power(gN, n), 2, 2, n)
        want = dense_link_product(ref_to_dense(enc), gNn, d_mid=2**n, d_left=2, d_right=2**n)
        assert np.max(np.abs(ref_to_dense(out) - want)) < 1e-12
        # covariant link against the dense formula
        table = build_tripartite((2, 2, 2), n)
        gO = random_cptp_choi(2, 2, rng)
        oc = tensor_coefficients(gO, n, basis)
        got = compose_covariant(chan, oc, table)
        want_cov = dense_link_product(
            gNn, regroup_copies_to_sides(kron_power(gO, n), 2, 2, n),
            d_mid=2**n, d_left=2**n, d_right=2**n,
        )
        got_dense = regroup_copies_to_sides(dense_reconstruct(got), 2, 2, n)
        assert np.max(np.abs(got_dense - want_cov)) < 1e-12
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    report(1, f"all orbit operations match dense up to n=3 in {elapsed:.1f} s")


def test_criterion_2_dimension_anchors():
    plain = {2: 136, 3: 816, 4: 3876}
    flagged_counts = {2: 36, 3: 120, 4: 330}
    for n, want in plain.items():
        assert len(enumerate_orbits(SystemSpec((4,), n))) == want
    for n, want in flagged_counts.items():
        assert len(algebra_orbits(AlgebraSpec((2, 2), n))) == want
    report(2, "orbit counts 136/816/3876 and 36/120/330 exact")


def test_criterion_3_method_cross_validation():
    total = 0
    for n in range(1, 7):
        for lam in partitions(2, n):
            tabs = ssyt_enumerate(lam, 2)
            for ta in tabs:
                for tb in tabs:
                    assert encoding_poly_m1(ta, tb, 2) == encoding_poly_m2(ta, tb, 2)
                    total += 1
    rng = np.random.default_rng(3)
    for n in range(1, 5):
        for lam in partitions(3, n):
            tabs = ssyt_enumerate(lam, 3)
            pick = [tabs[int(i)] for i in rng.integers(0, len(tabs), size=min(3, len(tabs)))]
            for ta in pick:
                for tb in pick:
                    assert encoding_poly_m1(ta, tb, 3) == encoding_poly_m2(ta, tb, 3)
                    total += 1
    report(3, f"{total} tableau pairs agree coefficientwise, exactly")


def test_criterion_4_star_isomorphism_suite():
    rng = np.random.default_rng(4)
    for n in (2, 3, 4):
        cob = ChangeOfBasis(2, n)
        dense_all = dense_orbit_matrices_all(cob.basis)

        def from_dense(M):
            vals = {}
            for r in range(len(cob.basis.orbits)):
                c = np.sum(dense_all[r] * M) / cob.basis.sizes()[r]
                if c != 0:
                    vals[r] = complex(c)
            return OrbitCoefficients(cob.basis, vals)

        D = 2**n
        X = symmetrize(rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D)), 2, n)
        Y = symmetrize(rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D)), 2, n)
        x, y = from_dense(X), from_dense(Y)
        bx, by = cob.psi_tilde(x), cob.psi_tilde(y)
        bxy = cob.psi_tilde(from_dense(X @ Y))
        for Bx, By, Bxy in zip(bx.blocks, by.blocks, bxy.blocks):
            assert np.max(np.abs(Bx @ By - Bxy)) < 1e-9
        ident = cob.psi_tilde(OrbitCoefficients(
            cob.basis,
            {r: 1.0 for r, E in enumerate(cob.basis.orbits) if E.is_diagonal()},
        ))
        for m, B in zip(cob.block_dims, ident.blocks):
            assert np.max(np.abs(B - np.eye(m))) < 1e-9
        assert abs(block_trace(bx) - trace_coeffs(x)) < 1e-9
        assert abs(block_hs(bx, by) - hs_inner(x, y)) < 1e-9
        P = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
        psd = symmetrize(P @ P.conj().T, 2, n)
        for B in cob.psi(from_dense(psd)).blocks:
            assert np.linalg.eigvalsh(0.5 * (B + B.conj().T)).min() > -1e-9
    report(4, "multiplicativity, identity, trace, HS, positivity at n <= 4")


def test_criterion_5_schur_weyl_dimension_identities():
    for d in (2, 3):
        for n in range(1, 9):
            ms = [ssyt_count(lam, d) for lam in partitions(d, n)]
            fs = [syt_count(lam) for lam in partitions(d, n)]
            assert sum(m * m for m in ms) == comb(n + d * d - 1, n)
            assert sum(m * f for m, f in zip(ms, fs)) == d**n
    report(5, "sum m^2 and sum m*f exact for d in {2,3}, n <= 8")


def test_criterion_6_monotonicity_50_runs():
    rng = np.random.default_rng(6)
    checked_steps = 0
    for run in range(50):
        n = int(rng.integers(1, 5))
        kind = run % 3
        if kind == 0:
            channel = adc(float(rng.uniform(0, 1)))
        elif kind == 1:
            channel = depolarizing(float(rng.uniform(0, 1)))
        else:
            from permsym.channels import ChoiMatrix
            channel = ChoiMatrix(2, 2, random_cptp_choi(2, 2, rng))
        cfg = SeesawConfig(n=n, d=2, seeds=1, rng_seed=int(rng.integers(1 << 30)),
                           max_outer=25)
        res = seesaw_run(channel, cfg)
        values = [v for _, v in res.trajectory]
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
        assert all(0.25 - 1e-9 <= v <= 1 + 1e-9 for v in values)
        for trace in res.power_traces:
            assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))
            checked_steps += len(trace)
    report(6, f"50 runs, {checked_steps} recorded power steps, all non-decreasing")


def test_criterion_7_fidelity_anchors():
    for n in (1, 2, 3):
        res = seesaw_run(identity_channel(2), SeesawConfig(n=n, d=2, seeds=2, rng_seed=7))
        assert abs(res.fidelity - 1.0) < 1e-6
    res = seesaw_run(replacement(2), SeesawConfig(n=1, d=2, seeds=2, rng_seed=7))
    assert abs(res.fidelity - 0.25) < 1e-8
    for g in (0.1, 0.3):
        res = seesaw_run(adc(g), SeesawConfig(n=1, d=2, seeds=3, rng_seed=1))
        assert res.fidelity >= ((1 + np.sqrt(1 - g)) / 2) ** 2 - 1e-6
    # preparation/recovery dimension-ratio identity on a rectangular channel
    rng = np.random.default_rng(5)
    d_a, d_b = 2, 3
    g = random_cptp_choi(d_a, d_b, rng)
    cfg = SeesawConfig(n=1, d=2, delta_power=1e-13, max_power=8000)
    cob_b = ChangeOfBasis(d_b, 1)
    m_blocks = cob_b.psi_tilde(ref_from_dense(g, d_a, cob_b.basis))
    fd = max(
        power_fd(m_blocks, random_symmetric_seed(cob_b, d_a, "decoder",
                                                 np.random.default_rng(30 + s)), cfg)[0]
        for s in range(4)
    )
    cob_a = ChangeOfBasis(d_a, 1)
    ma_blocks = cob_a.psi_tilde(ref_from_dense(swap_factors(g, d_a, d_b).T, d_b, cob_a.basis))
    cfg_e = SeesawConfig(n=1, d=d_b, delta_power=1e-13, max_power=8000)
    fe = max(
        power_fe(ma_blocks, random_symmetric_seed(cob_a, d_b, "encoder",
                                                  np.random.default_rng(40 + s)), cfg_e)[0]
        for s in range(4)
    )
    assert abs(fe - (d_a**2 / d_b**2) * fd) < 1e-6
    report(7, "identity, replacement, uncoded-ADC and dimension-ratio anchors hold")


def test_criterion_8_fd_multiplicativity():
    rng = np.random.default_rng(8)
    for pair in range(3):
        g1 = random_cptp_choi(2, 2, rng)
        g2 = random_cptp_choi(2, 2, rng)
        f1 = dense_power_fd(g1, 2, 2, rng, restarts=8, iters=4000)
        f2 = dense_power_fd(g2, 2, 2, rng, restarts=8, iters=4000)
        # joint channel on the 4-dimensional input: reorder (A1 B1 A2 B2) -> (A1 A2 B1 B2)
        g12 = regroup_copies_to_sides(np.kron(g1, g2), 2, 2, 2)
        f12 = dense_power_fd(g12, 4, 4, rng, restarts=10, iters=4000)
        assert abs(f12 - f1 * f2) / (f1 * f2) < 1e-4
    report(8, "recovery value multiplies over tensor pairs (3 random pairs)")


def test_criterion_9_flagged_additivity():
    rng = np.random.default_rng(9)
    branches = [adc(0.25), depolarizing(0.35)]
    probs = [0.4, 0.6]
    chan = flagged(branches, probs)
    # branch values via the block-basis power iteration at n = 1
    cfg = SeesawConfig(n=1, d=2, delta_power=1e-13, max_power=6000)
    cob = ChangeOfBasis(2, 1)
    branch_vals = []
    for c in branches:
        m_blocks = cob.psi_tilde(ref_from_dense(c.gamma(), 2, cob.basis))
        branch_vals.append(max(
            power_fd(m_blocks, random_symmetric_seed(cob, 2, "decoder",
                                                     np.random.default_rng(50 + s)), cfg)[0]
            for s in range(3)
        ))
    # flagged value via the algebra-blocked power iteration
    from permsym.algebras import AlgebraChangeOfBasis, algebra_marginal_data
    spec_b = AlgebraSpec((2, 2), 1)
    acob = AlgebraChangeOfBasis(spec_b)
    # at n=1 the channel Choi on R x B_alg is directly the orbit expansion
    from permsym.linkprod import RefCoefficients
    vals = np.zeros((2, 2, len(acob.basis)), dtype=complex)
    for r, E in enumerate(acob.basis.orbits):
        a, b = E.nonzero_positions()[0]
        for k in range(2):
            for l in range(2):
                vals[k, l, r] = chan.matrix[k * 4 + a, l * 4 + b]
    m_blocks = acob.psi_tilde(RefCoefficients(acob.basis, 2, vals))
    flag_val = max(
        power_fd(m_blocks, random_symmetric_seed(acob, 2, "decoder",
                                                 np.random.default_rng(60 + s)), cfg)[0]
        for s in range(3)
    )
    want = probs[0] * branch_vals[0] + probs[1] * branch_vals[1]
    assert abs(flag_val - want) < 1e-6
    report(9, f"flagged recovery value {flag_val:.8f} equals branch mixture {want:.8f}")


@pytest.mark.slow
def test_criterion_10_scale_demonstration():
    t0 = time.perf_counter()
    res1 = seesaw_run(adc(0.1), SeesawConfig(n=1, d=2, seeds=3, rng_seed=42))
    res10 = seesaw_run(adc(0.1), SeesawConfig(n=10, d=2, seeds=3, rng_seed=42))
    elapsed = time.perf_counter() - t0
    assert res10.fidelity > res1.fidelity
    assert elapsed < 1800.0
    report(10, f"n=10 fidelity {res10.fidelity:.6f} > n=1 {res1.fidelity:.6f} "
               f"in {elapsed:.0f} s")
