import numpy as np
import pytest

from procmat import (
    A1,
    A2,
    B1,
    B2,
    ProcessMatrix,
    SystemLayout,
    allowed_term_mask,
    channel_process,
    identity_process,
    measure_reprepare,
    probability_table,
    project_to_valid_span,
    random_process,
    tensor_product,
    validate_process,
)
from procmat.games import ocb_process

from conftest import EYE2, SIGMA_X, SIGMA_Z, random_cptp_instrument, random_hermitian

QUBIT = SystemLayout.qubit()


class TestLayout:
    def test_derived_dimensions(self):
        lay = SystemLayout(3, 2, 3, 2)
        assert lay.d == 9
        assert lay.d_total == 36
        assert lay.d_prime == lay.d_total
        assert lay.target_trace == 4

    def test_positive_dims_required(self):
        with pytest.raises(ValueError):
            SystemLayout(2, 0, 2, 2)


class TestTermMask:
    def test_general_allows_channel_pattern(self):
        assert allowed_term_mask("general").allows({A2, B1})

    def test_general_rejects_lone_output(self):
        assert not allowed_term_mask("general").allows({A2})
        assert not allowed_term_mask("general").allows({B2})

    def test_ordered_mask_examples(self):
        assert not allowed_term_mask("a_before_b").allows({A1, B1, B2})
        assert allowed_term_mask("b_before_a").allows({A1, B1, B2})

    def test_union_and_intersection(self):
        general = allowed_term_mask("general").allowed
        ab = allowed_term_mask("a_before_b").allowed
        ba = allowed_term_mask("b_before_a").allowed
        assert ab | ba == general
        assert ab & ba == {
            frozenset(), frozenset({A1}), frozenset({B1}), frozenset({A1, B1})
        }

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            allowed_term_mask("sideways")


class TestLoneOutputTermBreaksNormalization:
    """Probability mass leaks for terms the mask forbids, so the mask is
    exactly the operational normalization requirement."""

    def test_a2_only_term_makes_totals_depend_on_alice(self):
        bad = ProcessMatrix(
            QUBIT,
            (np.eye(16) + tensor_product([EYE2, SIGMA_Z, EYE2, EYE2])) / 4.0,
        )
        e = np.eye(2, dtype=complex)
        from procmat import Instrument

        bob = Instrument(tuple(measure_reprepare(e[:, m], e[:, 0]) for m in range(2)))
        alice_zero = Instrument(tuple(measure_reprepare(e[:, x], e[:, 0]) for x in range(2)))
        alice_one = Instrument(tuple(measure_reprepare(e[:, x], e[:, 1]) for x in range(2)))
        total_zero = probability_table(bad, alice_zero, bob).total
        total_one = probability_table(bad, alice_one, bob).total
        assert abs(total_zero - total_one) > 0.5

    def test_output_output_term_breaks_total(self):
        bad = ProcessMatrix(
            QUBIT,
            (np.eye(16) + tensor_product([EYE2, SIGMA_Z, EYE2, SIGMA_Z])) / 4.0,
        )
        e = np.eye(2, dtype=complex)
        from procmat import Instrument

        reprep_zero = lambda: Instrument(
            tuple(measure_reprepare(e[:, k], e[:, 0]) for k in range(2))
        )
        total = probability_table(bad, reprep_zero(), reprep_zero()).total
        assert abs(total - 1.0) > 0.5


class TestValidateProcess:
    def test_identity_process_valid(self):
        report = validate_process(identity_process())
        assert report.overall
        assert report.trace_value == pytest.approx(4.0)

    def test_ocb_valid_with_zero_min_eigenvalue(self):
        report = validate_process(ocb_process())
        assert report.overall
        assert abs(report.min_eigenvalue) < 1e-9

    def test_forbidden_pattern_reported(self):
        w = ProcessMatrix(
            QUBIT,
            (np.eye(16) + tensor_product([EYE2, SIGMA_Z, EYE2, SIGMA_Z])) / 4.0,
        )
        report = validate_process(w)
        assert not report.mask_ok
        assert not report.overall
        patterns = [p for p, _ in report.offending_terms]
        assert ("A2", "B2") in patterns

    def test_wrong_trace_flagged(self):
        report = validate_process(ProcessMatrix(QUBIT, np.eye(16) / 2.0))
        assert not report.trace_ok
        assert report.is_psd


class TestProjectToValidSpan:
    def test_idempotent_on_valid(self):
        w = ocb_process()
        assert np.allclose(project_to_valid_span(w.matrix, QUBIT), w.matrix, atol=1e-12)

    def test_forbidden_only_matrix_projects_to_zero(self):
        m = tensor_product([EYE2, SIGMA_Z, EYE2, EYE2])
        assert np.max(np.abs(project_to_valid_span(m, QUBIT))) < 1e-12

    def test_matches_coefficient_zeroing_oracle(self):
        rng = np.random.default_rng(21)
        from procmat import hs_decompose

        mask = allowed_term_mask("general")
        m = random_hermitian(rng, 16)
        projected = project_to_valid_span(m, QUBIT)
        dec_in = hs_decompose(m, QUBIT.dims)
        dec_out = hs_decompose(projected, QUBIT.dims)
        for idx in np.ndindex(dec_in.coefficients.shape):
            pattern = {f for f, t in enumerate(idx) if t != 0}
            expected = dec_in.coefficients[idx] if mask.allows(pattern) else 0.0
            assert abs(dec_out.coefficients[idx] - expected) < 1e-12
        # Orthogonal projection: no other mask-satisfying matrix is closer.
        base = np.linalg.norm(projected - m)
        for probe_seed in range(3):
            probe = project_to_valid_span(
                random_hermitian(np.random.default_rng(probe_seed), 16), QUBIT
            )
            assert np.linalg.norm(probe - m) >= base - 1e-12

    def test_idempotence_random(self):
        rng = np.random.default_rng(22)
        m = random_hermitian(rng, 16)
        once = project_to_valid_span(m, QUBIT)
        twice = project_to_valid_span(once, QUBIT)
        assert np.linalg.norm(once - twice) < 1e-12

    def test_normalize_pins_trace(self):
        rng = np.random.default_rng(23)
        m = random_hermitian(rng, 16)
        out = project_to_valid_span(m, QUBIT, normalize=True)
        assert abs(np.trace(out).real - QUBIT.target_trace) < 1e-10


class TestRandomProcess:
    @pytest.mark.parametrize("seed", range(5))
    def test_always_valid(self, seed):
        assert validate_process(random_process(seed)).overall

    def test_qutrit_inputs_valid(self):
        layout = SystemLayout(3, 2, 3, 2)
        assert validate_process(random_process(7, layout)).overall

    def test_small_strength_is_near_identity(self):
        w = random_process(0, strength=1e-6)
        assert np.linalg.norm(w.matrix - np.eye(16) / 4.0) < 1e-5

    def test_deterministic_in_seed(self):
        assert np.array_equal(random_process(42).matrix, random_process(42).matrix)
        assert not np.array_equal(random_process(42).matrix, random_process(43).matrix)

    def test_strength_range_enforced(self):
        with pytest.raises(ValueError):
            random_process(0, strength=1.5)

    @pytest.mark.parametrize("seed", range(3))
    def test_probability_tables_normalize(self, seed):
        rng = np.random.default_rng(100 + seed)
        w = random_process(seed)
        instr_a = random_cptp_instrument(rng, 2, 2, 3)
        instr_b = random_cptp_instrument(rng, 2, 2, 2)
        table = probability_table(w, instr_a, instr_b)
        assert abs(table.total - 1.0) < 1e-9
        assert table.entries.min() > -1e-10


class TestFixtureProcesses:
    def test_identity_process(self):
        w = identity_process()
        assert np.allclose(w.matrix, np.eye(16) / 4.0)

    def test_channel_process_valid(self):
        assert validate_process(channel_process()).overall

    def test_channel_needs_matching_dims(self):
        with pytest.raises(ValueError):
            channel_process(SystemLayout(2, 3, 2, 2))

    def test_hermiticity_enforced(self):
        m = np.eye(16, dtype=complex)
        m[0, 1] = 1.0
        with pytest.raises(ValueError):
            ProcessMatrix(QUBIT, m)
