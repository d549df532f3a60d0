import numpy as np
import pytest

from permsym.channels import (
    ChoiMatrix,
    adc,
    choi_from_json,
    choi_to_json,
    depolarizing,
    entanglement_fidelity,
    flagged,
    identity_channel,
    reference_curves,
    replacement,
)


class TestADC:
    def test_gamma_zero_is_identity(self):
        assert np.allclose(adc(0.0).matrix, identity_channel(2).matrix)

    def test_gamma_one_fidelity(self):
        assert entanglement_fidelity(adc(1.0)) == pytest.approx(0.25)

    def test_support_size_and_invariants(self):
        c = adc(0.3)
        assert np.count_nonzero(c.matrix) == 5
        ev = np.linalg.eigvalsh(c.matrix)
        assert ev.min() > -1e-10

    def test_uncoded_fidelity_formula(self):
        for g in (0.0, 0.19, 1.0):
            want = ((1 + np.sqrt(1 - g)) / 2) ** 2
            assert entanglement_fidelity(adc(g)) == pytest.approx(want)

    def test_range_check(self):
        with pytest.raises(ValueError):
            adc(1.5)


class TestDepolarizing:
    def test_p0_identity(self):
        assert np.allclose(depolarizing(0.0).matrix, identity_channel(2).matrix)

    def test_uncoded_fidelity(self):
        for p in (0.1, 0.2):
            assert entanglement_fidelity(depolarizing(p)) == pytest.approx(1 - 0.75 * p)

    def test_p1_replacement(self):
        c = depolarizing(1.0)
        assert np.allclose(c.matrix, replacement(2).matrix)
        assert entanglement_fidelity(c) == pytest.approx(0.25)

    def test_range_check(self):
        with pytest.raises(ValueError):
            depolarizing(-0.1)


class TestFlagged:
    def test_single_flag_is_channel_itself(self):
        c = flagged([adc(0.3)], [1.0])
        assert entanglement_fidelity(c) == pytest.approx(entanglement_fidelity(adc(0.3)))

    def test_two_identical_flags(self):
        base = depolarizing(0.2)
        c = flagged([base, base], [0.5, 0.5])
        assert entanglement_fidelity(c) == pytest.approx(entanglement_fidelity(base))

    def test_linearity(self):
        a, b = adc(0.1), depolarizing(0.4)
        c = flagged([a, b], [0.3, 0.7])
        want = 0.3 * entanglement_fidelity(a) + 0.7 * entanglement_fidelity(b)
        assert entanglement_fidelity(c) == pytest.approx(want)

    def test_bad_probabilities(self):
        with pytest.raises(ValueError):
            flagged([adc(0.1), adc(0.2)], [0.5, 0.6])

    def test_block_structure_is_psd_and_trace_correct(self):
        c = flagged([adc(0.1), depolarizing(0.2)], [0.25, 0.75])
        assert c.total_out == 4
        ev = np.linalg.eigvalsh(c.matrix)
        assert ev.min() > -1e-10
        tr_out = np.trace(c.matrix.reshape(2, 4, 2, 4), axis1=1, axis2=3)
        assert np.allclose(tr_out, np.eye(2))


class TestEntanglementFidelity:
    def test_identity(self):
        for d in (2, 3):
            assert entanglement_fidelity(identity_channel(d)) == pytest.approx(1.0)

    def test_replacement_lower_bound(self):
        for d in (2, 3):
            assert entanglement_fidelity(replacement(d)) == pytest.approx(1 / d**2)


class TestReferenceCurves:
    def test_leung4_at_zero(self):
        assert reference_curves("leung4", 0.0) == pytest.approx(1.0)

    def test_fivequbit_at_zero(self):
        assert reference_curves("fivequbit", 0.0) == pytest.approx(1.0)

    def test_fivequbit_crossover_behavior(self):
        # better than no coding only for small error parameter
        assert reference_curves("fivequbit", 0.05) > 1 - 0.75 * 0.05
        assert reference_curves("fivequbit", 0.5) < 1 - 0.75 * 0.5

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            reference_curves("nope", 0.1)


class TestJson:
    def test_round_trip_plain(self):
        c = adc(0.3)
        c2 = choi_from_json(choi_to_json(c))
        assert np.max(np.abs(c2.matrix - c.matrix)) < 1e-12

    def test_round_trip_flagged(self):
        c = flagged([adc(0.1), depolarizing(0.3)], [0.4, 0.6])
        c2 = choi_from_json(choi_to_json(c))
        assert c2.flags is not None and len(c2.flags) == 2
        assert np.max(np.abs(c2.matrix - c.matrix)) < 1e-12

    def test_bad_entry_reports_position(self):
        text = '{"d_in": 2, "d_out": 2, "entries": [{"row": 0, "col": 0, "re": 1.0}, {"row": 99, "col": 0, "re": 1.0}]}'
        with pytest.raises(ValueError, match="position 1"):
            choi_from_json(text)


class TestFidelityBlockPaths:
    def test_dense_ref_and_block_paths_agree_n1(self):
        import numpy as np

        from permsym.blockmap import ChangeOfBasis
        from permsym.linkprod import RefCoefficients

        c = adc(0.19)
        cob = ChangeOfBasis(2, 1)
        vals = np.zeros((2, 2, 4), dtype=complex)
        for r, E in enumerate(cob.basis.orbits):
            a, b = E.nonzero_positions()[0]
            for k in range(2):
                for l in range(2):
                    vals[k, l, r] = c.gamma()[k * 2 + a, l * 2 + b]
        ref = RefCoefficients(cob.basis, 2, vals)
        f_dense = entanglement_fidelity(c)
        assert entanglement_fidelity(ref, 2) == pytest.approx(f_dense, abs=1e-10)
        assert entanglement_fidelity(cob.psi_tilde(ref), 2) == pytest.approx(
            f_dense, abs=1e-10
        )

    def test_multi_copy_block_input_rejected(self):
        import numpy as np

        from permsym.blockmap import ChangeOfBasis
        from permsym.orbits import identity_coefficients

        cob = ChangeOfBasis(2, 2)
        b = cob.psi_tilde(identity_coefficients(cob.basis))
        with pytest.raises(ValueError):
            entanglement_fidelity(b, 2)


class TestGramStandalone:
    def test_shape_21_and_factor(self):
        import numpy as np

        from permsym.blockmap import gram

        G, R = gram((2, 1), 2)
        assert np.allclose(G, 2 * np.eye(2))
        assert np.allclose(R @ R.T, np.linalg.inv(G))


class TestKrausOracle:
    def test_adc_choi_matches_kraus_construction(self):
        import numpy as np

        from permsym.oracles import dense_choi_of_channel_action

        g = 0.3
        k1 = np.array([[1, 0], [0, np.sqrt(1 - g)]], dtype=complex)
        k2 = np.array([[0, np.sqrt(g)], [0, 0]], dtype=complex)
        want = dense_choi_of_channel_action([k1, k2], 2, 2)
        assert np.max(np.abs(adc(g).matrix - want)) < 1e-12
