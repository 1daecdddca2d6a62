import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsqc import states
from dsqc.quantum import ATOL, draw_for_outcome, fidelity, StateVector
from dsqc.states import Variant
from dsqc.teleportation import (
    TWO_PARTICLE_ROWS,
    FIVE_PARTICLE_PRINTED_ROWS,
    FIVE_PARTICLE_ROWS,
    FIVE_PARTICLE_STATE_ROWS,
    NotPauliCorrectable,
    PauliProduct,
    Scheme,
    UnknownOutcome,
    compare_tables,
    correction_lookup,
    correction_table,
    derive_correction_table,
    derive_for,
    g_decomposition,
    printed_table,
    printed_state_column,
    random_coefficients,
    resolve_primary_signs,
    teleport,
)

# Every correcting product per outcome, from an independent brute-force search
# written against raw kron products (not this package).  Same for both variants.
ORACLE_CANDIDATES_2 = {
    "00": {"I I", "X X"},
    "01": {"iY iY", "Z Z"},
    "10": {"I X", "X I"},
    "11": {"iY Z", "Z iY"},
}
ORACLE_CANDIDATES_3 = {
    "0000": {"I I I", "X iY iY"},
    "0001": {"iY X iY", "Z Z I"},
    "0010": {"I Z Z", "X X X"},
    "0011": {"iY iY X", "Z I Z"},
    "0100": {"iY iY Z", "Z I X"},
    "0101": {"I Z X", "X X Z"},
    "0110": {"iY X I", "Z Z iY"},
    "0111": {"I I iY", "X iY I"},
    "1000": {"I X X", "X Z Z"},
    "1001": {"iY I Z", "Z iY X"},
    "1010": {"I iY iY", "X I I"},
    "1011": {"iY Z I", "Z X iY"},
    "1100": {"iY Z iY", "Z X I"},
    "1101": {"I iY I", "X I iY"},
    "1110": {"iY I X", "Z iY Z"},
    "1111": {"I X Z", "X Z X"},
}


def as_strings(table):
    return {bits: {" ".join(p.factors) for p in ps} for bits, ps in table.candidates.items()}


@pytest.fixture(scope="module")
def derived():
    return {(s, v): derive_for(s, v) for s in Scheme for v in Variant}


class TestPauliProduct:
    def test_parse_and_str(self):
        p = PauliProduct.parse("Z x iY")
        assert p.factors == ("Z", "iY")
        assert str(p) == "Z x iY"
        assert PauliProduct.parse("Z iY") == p

    def test_unknown_factor(self):
        with pytest.raises(ValueError):
            PauliProduct.parse("Y I")

    def test_weight_then_factor_order(self):
        ps = [PauliProduct.parse(t) for t in ("X I", "I Z", "Z Z", "I I")]
        assert [str(p) for p in sorted(ps, key=PauliProduct.sort_key)] == ["I x I", "I x Z", "X x I", "Z x Z"]

    def test_iy_is_real(self):
        np.testing.assert_allclose(PauliProduct.parse("iY").matrix(), [[0, 1], [-1, 0]])

    def test_apply_matches_matrix(self):
        rng = np.random.default_rng(3)
        s = StateVector.from_unnormalized(rng.normal(size=8) + 1j * rng.normal(size=8), (4, 5, 8))
        p = PauliProduct.parse("X iY Z")
        np.testing.assert_allclose(p.apply(s, (4, 5, 8)).amplitudes, p.matrix() @ s.amplitudes, atol=ATOL)


class TestCorrectionTables:
    @pytest.mark.parametrize("variant", list(Variant))
    def test_two_particle_candidates_match_oracle(self, derived, variant):
        assert as_strings(derived[Scheme.TWO_PARTICLE, variant]) == ORACLE_CANDIDATES_2

    @pytest.mark.parametrize("variant", list(Variant))
    def test_five_particle_candidates_match_oracle(self, derived, variant):
        assert as_strings(derived[Scheme.THREE_PARTICLE, variant]) == ORACLE_CANDIDATES_3

    @pytest.mark.parametrize("variant", list(Variant))
    def test_printed_two_particle_table_reproduced(self, derived, variant):
        diff = compare_tables(derived[Scheme.TWO_PARTICLE, variant], printed_table(Scheme.TWO_PARTICLE))
        assert diff.ok and diff.total == 4

    @pytest.mark.parametrize("scheme", list(Scheme))
    @pytest.mark.parametrize("variant", list(Variant))
    def test_operational_tables_are_derived_minimum(self, derived, scheme, variant):
        table = derived[scheme, variant]
        ops = correction_table(scheme, variant)
        assert {b: str(p) for b, p in table.entries.items()} == {b: str(p) for b, p in ops.entries.items()}

    def test_operational_table_is_lowest_weight_candidate(self):
        for bits, text in FIVE_PARTICLE_ROWS.items():
            weights = {PauliProduct.parse(c).weight for c in ORACLE_CANDIDATES_3[bits]}
            assert PauliProduct.parse(text).weight == min(weights)

    def test_printed_five_particle_corrections_restore_only_two_rows(self, derived):
        # The printed correction column only restores the message for 0000 and 0001.
        diff = compare_tables(derived[Scheme.THREE_PARTICLE, Variant.PRIMARY], printed_table(Scheme.THREE_PARTICLE))
        assert diff.matched == ("0000", "0001")
        ok = {b for b, text in FIVE_PARTICLE_PRINTED_ROWS.items() if text in ORACLE_CANDIDATES_3[b]}
        assert ok == {"0000", "0001"}

    def test_printed_state_column_matches_simulation(self):
        rng = np.random.default_rng(11)
        scheme = Scheme.THREE_PARTICLE
        for k, bits in enumerate(FIVE_PARTICLE_STATE_ROWS):
            c = random_coefficients(rng, 4)
            r = teleport(scheme, c, Variant.PRIMARY, (k + 0.5) / 16)
            assert r.outcome_bits == bits
            printed = StateVector(printed_state_column(bits, c), scheme.bob_labels)
            assert fidelity(printed, r.pre_correction) > 1 - ATOL

    def test_g_decomposition_of_g_vector(self):
        comps = g_decomposition(states.ghz_g_vector(1, 0, 1))
        assert abs(comps["101"] - 1) < ATOL
        assert sum(abs(v) ** 2 for v in comps.values()) == pytest.approx(1)

    def test_lookup_unknown_outcome(self):
        with pytest.raises(UnknownOutcome):
            correction_lookup(correction_table(Scheme.TWO_PARTICLE), "2")

    def test_two_particle_rows(self):
        assert TWO_PARTICLE_ROWS == {"00": "I I", "01": "Z Z", "10": "I X", "11": "Z iY"}


class TestSignResolution:
    def test_only_all_plus_signs_teleport_primary_family(self):
        assert resolve_primary_signs() == [(1, 1, 1, 1)]

    @pytest.mark.parametrize("signs", [(-1, -1, -1, -1), (-1, 1, 1, 1), (1, -1, 1, 1)])
    def test_wrong_zeta_signs_not_correctable(self, signs):
        scheme = Scheme.TWO_PARTICLE
        basis = states.basis_2scheme(Variant.PRIMARY, signs=signs)
        with pytest.raises(NotPauliCorrectable):
            derive_correction_table(scheme.channel(Variant.PRIMARY), basis, scheme, Variant.PRIMARY)

    def test_conjugate_basis_on_primary_channel_fails(self):
        scheme = Scheme.THREE_PARTICLE
        with pytest.raises(NotPauliCorrectable):
            derive_correction_table(scheme.channel(Variant.PRIMARY), scheme.basis(Variant.CONJUGATE),
                                    scheme, Variant.PRIMARY)


class TestTeleport:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from(list(Scheme)), st.sampled_from(list(Variant)),
           st.floats(0, 1, exclude_max=True))
    def test_fidelity_one_for_any_draw(self, seed, scheme, variant, draw):
        c = random_coefficients(np.random.default_rng(seed), scheme.n_coefficients)
        r = teleport(scheme, c, variant, draw)
        assert abs(r.fidelity_vs_intended - 1) < ATOL
        assert r.bob_state.labels == scheme.bob_labels

    @pytest.mark.parametrize("scheme", list(Scheme))
    @pytest.mark.parametrize("variant", list(Variant))
    def test_outcomes_uniform(self, scheme, variant):
        n = 2 ** scheme.outcome_size
        c = random_coefficients(np.random.default_rng(5), scheme.n_coefficients)
        r = teleport(scheme, c, variant, 0.0)
        np.testing.assert_allclose(r.probabilities, np.full(n, 1 / n), atol=ATOL)

    @pytest.mark.parametrize("scheme", list(Scheme))
    def test_every_forced_outcome(self, scheme):
        n = 2 ** scheme.outcome_size
        c = random_coefficients(np.random.default_rng(9), scheme.n_coefficients)
        seen = set()
        for variant in Variant:
            for k in range(n):
                r = teleport(scheme, c, variant, draw_for_outcome([1 / n] * n, k))
                seen.add(r.outcome_bits)
                assert r.probability == pytest.approx(1 / n, abs=ATOL)
                assert r.classical_bits == scheme.outcome_size
        assert len(seen) == n

    def test_printed_table_breaks_fidelity(self):
        c = random_coefficients(np.random.default_rng(2), 4)
        r = teleport(Scheme.THREE_PARTICLE, c, Variant.PRIMARY, 4.5 / 16, table=printed_table(Scheme.THREE_PARTICLE))
        assert r.outcome_bits == "0100"
        assert r.fidelity_vs_intended < 0.5
