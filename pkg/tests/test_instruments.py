import numpy as np
import pytest

from procmat import (
    Instrument,
    born_probability,
    channel_process,
    check_instrument,
    cj_from_kraus,
    classical_instrument,
    cq_instrument,
    identity_process,
    measure_reprepare,
    probability_table,
    random_process,
)

from conftest import EYE2, SIGMA_X, SIGMA_Y, SIGMA_Z, random_cptp_instrument

E = np.eye(2, dtype=complex)


class TestCjFromKraus:
    def test_rank_one_measure_reprepare_form(self):
        phi1 = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
        phi2 = np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2)
        cj = cj_from_kraus([np.outer(phi2, phi1.conj())], 2, 2).cj
        expected = np.kron(np.outer(phi1, phi1.conj()), np.outer(phi2, phi2.conj()).T)
        assert np.allclose(cj, expected, atol=1e-14)

    def test_identity_channel_is_complete(self):
        instr = Instrument((cj_from_kraus([E], 2, 2),))
        report = check_instrument(instr)
        assert report.overall
        assert report.completeness_residual < 1e-12

    def test_depolarizing_kraus_set(self):
        kraus = [0.5 * EYE2, 0.5 * SIGMA_X, 0.5 * SIGMA_Y, 0.5 * SIGMA_Z]
        cj = cj_from_kraus(kraus, 2, 2).cj
        assert np.allclose(cj, np.eye(4) / 2.0, atol=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            cj_from_kraus([np.ones((3, 2))], 2, 2)


class TestMeasureReprepare:
    def test_ground_state_projector(self):
        cj = measure_reprepare(E[:, 0], E[:, 0]).cj
        expected = np.zeros((4, 4))
        expected[0, 0] = 1.0
        assert np.allclose(cj, expected)

    def test_complex_repreparation_transposed(self):
        phi2 = np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2)
        cj = measure_reprepare(E[:, 0], phi2).cj
        output_block = cj[:2, :2]
        assert np.allclose(output_block, np.outer(phi2, phi2.conj()).T)

    def test_equals_kraus_route_exactly(self):
        phi1 = np.array([1.0, 2.0j], dtype=complex) / np.sqrt(5)
        phi2 = np.array([2.0, -1.0], dtype=complex) / np.sqrt(5)
        direct = measure_reprepare(phi1, phi2).cj
        via_kraus = cj_from_kraus([np.outer(phi2, phi1.conj())], 2, 2).cj
        assert np.array_equal(direct, via_kraus)

    def test_orthogonal_completion_is_complete(self):
        phi1 = np.array([np.cos(0.3), np.sin(0.3)], dtype=complex)
        phi1_perp = np.array([-np.sin(0.3), np.cos(0.3)], dtype=complex)
        instr = Instrument((
            measure_reprepare(phi1, E[:, 0]),
            measure_reprepare(phi1_perp, E[:, 1]),
        ))
        assert check_instrument(instr).overall

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError, match="unit"):
            measure_reprepare(np.array([1.0, 1.0]), E[:, 0])


class TestClassicalInstrument:
    def test_identity_relay(self):
        p = np.zeros((1, 2, 2))
        p[0, 0, 0] = p[0, 1, 1] = 1.0
        instr = classical_instrument(p, np.eye(2), np.eye(2))
        relay = np.zeros((4, 4), dtype=complex)
        relay[0, 0] = relay[3, 3] = 1.0
        assert np.allclose(instr.outcomes[0].cj, relay)
        assert check_instrument(instr).overall

    def test_uniform_noise_gives_identity_cj(self):
        n_out, d_out, d_in = 2, 2, 2
        p = np.full((n_out, d_out, d_in), 1.0 / (n_out * d_out))
        instr = classical_instrument(p, np.eye(2), np.eye(2))
        for outcome in instr.outcomes:
            assert np.allclose(outcome.cj, np.eye(4) / 4.0)
        assert check_instrument(instr).overall

    def test_random_stochastic_table(self, rng):
        raw = rng.uniform(0.05, 1.0, size=(3, 2, 2))
        p = raw / raw.sum(axis=(0, 1))
        instr = classical_instrument(p, np.eye(2), np.eye(2))
        assert check_instrument(instr).overall

    def test_non_stochastic_rejected(self):
        p = np.full((2, 2, 2), 0.5)
        with pytest.raises(ValueError, match="sum to 1"):
            classical_instrument(p, np.eye(2), np.eye(2))


class TestCqInstrument:
    def test_delta_table_matches_classical_relay(self):
        p = np.eye(2)
        states = [np.outer(E[:, i], E[:, i].conj()) for i in range(2)]
        instr = cq_instrument(np.eye(2), p, states)
        table = np.zeros((1, 2, 2))
        table[0, 0, 0] = table[0, 1, 1] = 1.0
        relay = classical_instrument(table, np.eye(2), np.eye(2))
        total_cq = sum(m.cj for m in instr.outcomes)
        total_relay = sum(m.cj for m in relay.outcomes)
        assert np.allclose(total_cq, total_relay)

    def test_single_outcome_tensor_structure(self, rng):
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        instr = cq_instrument(np.eye(2), np.ones((1, 2)), [rho])
        assert np.allclose(instr.outcomes[0].cj, np.kron(np.eye(2), rho))
        assert check_instrument(instr).overall

    def test_random_cq_instrument_valid(self, rng):
        raw = rng.uniform(0.1, 1.0, size=(3, 2))
        p = raw / raw.sum(axis=0)
        states = []
        for _ in range(3):
            g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            rho = g @ g.conj().T
            states.append(rho / np.trace(rho).real)
        report = check_instrument(cq_instrument(np.eye(2), p, states))
        assert report.overall

    def test_bad_state_rejected(self):
        with pytest.raises(ValueError, match="unit trace"):
            cq_instrument(np.eye(2), np.ones((1, 2)), [np.eye(2)])


class TestCqKrausConsistency:
    """The fixed-basis form stores repreparations as given, while the Kraus
    route transposes the output block; the two conventions agree on real
    states and match exactly once the transpose is applied."""

    def _kraus_route(self, p, rho):
        evals, vecs = np.linalg.eigh(rho)
        kraus = []
        for n in range(2):
            for k in range(2):
                if evals[k] <= 0:
                    continue
                weight = np.sqrt(p[0, n] * evals[k])
                kraus.append(weight * np.outer(vecs[:, k], E[:, n].conj()))
        return cj_from_kraus(kraus, 2, 2)

    def test_real_state_agrees(self, rng):
        p = np.ones((1, 2))
        rho = np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex)
        direct = cq_instrument(np.eye(2), p, [rho]).outcomes[0]
        via_kraus = self._kraus_route(p, rho)
        assert np.allclose(direct.cj, via_kraus.cj, atol=1e-12)

    def test_complex_state_needs_transpose(self, rng):
        p = np.ones((1, 2))
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        via_kraus = self._kraus_route(p, rho)
        adjusted = cq_instrument(np.eye(2), p, [rho.T]).outcomes[0]
        assert np.allclose(adjusted.cj, via_kraus.cj, atol=1e-12)
        # and the Born rule then agrees on every process
        w = random_process(77)
        probe = measure_reprepare(E[:, 0], E[:, 0])
        assert born_probability(w, adjusted, probe) == pytest.approx(
            born_probability(w, via_kraus, probe), abs=1e-12
        )


class TestCheckInstrument:
    def test_single_unitary_kraus_complete(self, rng):
        from conftest import random_hermitian

        _, u = np.linalg.eigh(random_hermitian(rng, 2))
        report = check_instrument(Instrument((cj_from_kraus([u], 2, 2),)))
        assert report.completeness_residual < 1e-12

    def test_two_outcome_z_measurement_passes(self):
        instr = Instrument(tuple(measure_reprepare(E[:, x], E[:, 0]) for x in range(2)))
        assert check_instrument(instr).overall

    def test_missing_outcome_reports_residual(self):
        instr = Instrument((measure_reprepare(E[:, 0], E[:, 0]),))
        report = check_instrument(instr)
        assert not report.complete
        assert report.completeness_residual == pytest.approx(1.0)

    def test_random_kraus_instruments_pass(self, rng):
        for _ in range(3):
            instr = random_cptp_instrument(rng, 2, 2, 3)
            assert check_instrument(instr, tol=1e-10).overall


class TestBornProbability:
    def test_maximally_mixed_process(self):
        w = identity_process()
        m_a = measure_reprepare(E[:, 0], E[:, 1])
        m_b = measure_reprepare(E[:, 1], E[:, 0])
        assert born_probability(w, m_a, m_b) == pytest.approx(0.25)

    def test_identity_channel_transmits_basis_states(self):
        w = channel_process()
        for sent in range(2):
            for read in range(2):
                total = sum(
                    born_probability(
                        w,
                        measure_reprepare(E[:, x], E[:, sent]),
                        measure_reprepare(E[:, read], E[:, 0]),
                    )
                    for x in range(2)
                )
                assert total == pytest.approx(1.0 if read == sent else 0.0, abs=1e-12)

    def test_linearity_in_process(self):
        w1 = random_process(1)
        w2 = random_process(2)
        from procmat import ProcessMatrix

        mix = ProcessMatrix(w1.layout, 0.3 * w1.matrix + 0.7 * w2.matrix)
        m_a = measure_reprepare(E[:, 0], E[:, 0])
        m_b = measure_reprepare(E[:, 1], E[:, 1])
        mixed = born_probability(mix, m_a, m_b)
        parts = 0.3 * born_probability(w1, m_a, m_b) + 0.7 * born_probability(w2, m_a, m_b)
        assert abs(mixed - parts) < 1e-10

    def test_dimension_mismatch(self):
        w = identity_process()
        wrong = cj_from_kraus([np.ones((3, 3)) / np.sqrt(3)], 3, 3)
        with pytest.raises(ValueError, match="dimensions"):
            born_probability(w, wrong, measure_reprepare(E[:, 0], E[:, 0]))


class TestProbabilityTable:
    def test_identity_process_uniform(self):
        w = identity_process()
        instr = Instrument(tuple(measure_reprepare(E[:, x], E[:, 0]) for x in range(2)))
        table = probability_table(w, instr, instr)
        assert np.allclose(table.entries, 0.25)
        assert table.total == pytest.approx(1.0)

    def test_normalization_for_valid_processes(self, rng):
        for seed in range(3):
            w = random_process(200 + seed)
            instr_a = random_cptp_instrument(rng, 2, 2, 2)
            instr_b = random_cptp_instrument(rng, 2, 2, 3)
            table = probability_table(w, instr_a, instr_b)
            assert abs(table.total - 1.0) < 1e-9
            assert table.entries.min() > -1e-10
