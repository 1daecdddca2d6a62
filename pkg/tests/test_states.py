import json

import numpy as np
import pytest

from dsqc import states
from dsqc.quantum import ATOL, StateVector, fidelity, outcome_probabilities, permute_qubits, reduced_density, tensor
from dsqc.states import BellKind, Variant

R2 = np.sqrt(2)


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def kron(*vs):
    out = np.ones(1, dtype=complex)
    for v in vs:
        out = np.kron(out, v)
    return out


# Bell naming used throughout: psi = |00>,|11> family, phi = |01>,|10> family.
PSI_P = (ket("00") + ket("11")) / R2
PSI_M = (ket("00") - ket("11")) / R2
PHI_P = (ket("01") + ket("10")) / R2
PHI_M = (ket("01") - ket("10")) / R2


def G(label: str) -> np.ndarray:
    i, j, k = (int(c) for c in label)
    return (ket(f"0{j}{k}") + (-1) ** i * ket(f"1{1 - j}{1 - k}")) / R2


class TestBell:
    @pytest.mark.parametrize("kind, vec", [(BellKind.PSI_PLUS, PSI_P), (BellKind.PSI_MINUS, PSI_M),
                                           (BellKind.PHI_PLUS, PHI_P), (BellKind.PHI_MINUS, PHI_M)])
    def test_naming(self, kind, vec):
        np.testing.assert_allclose(states.bell(kind).amplitudes, vec, atol=ATOL)

    def test_default_labels(self):
        assert states.bell(BellKind.PSI_PLUS).labels == (4, 5)


class TestGhzLike:
    def test_primary(self):
        expected = (kron(ket("0"), PSI_P) + kron(ket("1"), PHI_P)) / R2
        np.testing.assert_allclose(states.ghz_like(Variant.PRIMARY).amplitudes, expected, atol=ATOL)

    def test_conjugate(self):
        expected = (kron(ket("0"), PHI_M) + kron(ket("1"), PSI_M)) / R2
        np.testing.assert_allclose(states.ghz_like(Variant.CONJUGATE).amplitudes, expected, atol=ATOL)

    def test_variants_orthogonal(self):
        assert fidelity(states.ghz_like(Variant.PRIMARY), states.ghz_like(Variant.CONJUGATE)) < ATOL

    def test_home_qubit_maximally_mixed(self):
        for v in Variant:
            np.testing.assert_allclose(reduced_density(states.ghz_like(v), (3,)), np.eye(2) / 2, atol=ATOL)


class TestGhzBasis:
    def test_g_vectors(self):
        for w in range(8):
            label = f"{w:03b}"
            np.testing.assert_allclose(states.ghz_g(label).amplitudes, G(label), atol=ATOL)

    def test_orthonormal(self):
        basis = states.ghz_basis()
        np.testing.assert_allclose(basis.gram(), np.eye(8), atol=ATOL)
        assert basis.is_complete

    def test_message_families(self):
        assert set(states.MESSAGE_G[Variant.PRIMARY]) == {"100", "001", "010", "111"}
        assert set(states.MESSAGE_G[Variant.CONJUGATE]) == {"000", "101", "110", "011"}


def brown_g_expansion(primary: bool) -> np.ndarray:
    """Brown state in (6,7 | 4,5,8) order, built term by term."""
    if primary:
        terms = [(+1, "00", "010"), (-1, "01", "111"), (+1, "10", "001"), (-1, "11", "100")]
    else:
        terms = [(+1, "00", "110"), (-1, "01", "011"), (+1, "10", "101"), (-1, "11", "000")]
    return sum(s * kron(ket(ab), G(g)) for s, ab, g in terms) / 2


class TestBrown:
    def test_direct_form_matches_g_expansion(self):
        standard = permute_qubits(states.brown_standard_form(), (6, 7, 4, 5, 8))
        assert fidelity(standard, StateVector(brown_g_expansion(True), (6, 7, 4, 5, 8))) > 1 - ATOL

    def test_direct_form_by_amplitudes(self):
        # |001>phi- + |010>psi- + |100>phi+ + |111>psi+ over (4,5,6 | 7,8).
        expected = (kron(ket("001"), PHI_M) + kron(ket("010"), PSI_M)
                    + kron(ket("100"), PHI_P) + kron(ket("111"), PSI_P)) / 2
        np.testing.assert_allclose(states.brown_standard_form().amplitudes, expected, atol=ATOL)

    @pytest.mark.parametrize("variant, primary", [(Variant.PRIMARY, True), (Variant.CONJUGATE, False)])
    def test_channel_matches_expansion(self, variant, primary):
        ch = permute_qubits(states.brown(variant), (6, 7, 4, 5, 8))
        np.testing.assert_allclose(ch.amplitudes, brown_g_expansion(primary), atol=ATOL)

    def test_primary_equals_direct_form(self):
        assert fidelity(states.brown(Variant.PRIMARY), states.brown_standard_form()) > 1 - ATOL

    def test_variants_orthogonal(self):
        assert fidelity(states.brown(Variant.PRIMARY), states.brown(Variant.CONJUGATE)) < ATOL

    @pytest.mark.parametrize("keep", [(6, 7), (4, 5), (4,), (8,)])
    def test_two_qubit_and_single_marginals_maximally_mixed(self, keep):
        for v in Variant:
            rho = reduced_density(states.brown(v), keep)
            np.testing.assert_allclose(rho, np.eye(2 ** len(keep)) / 2 ** len(keep), atol=ATOL)

    def test_custom_labels(self):
        ch = states.brown(Variant.PRIMARY, (10, 11, 12, 13, 14))
        assert ch.labels == (10, 11, 12, 13, 14)
        np.testing.assert_allclose(ch.amplitudes, states.brown(Variant.PRIMARY).amplitudes, atol=ATOL)


class TestMessageStates:
    def test_two_bit_primary(self):
        a, b = 0.6, 0.8j
        s = states.message_state_2([a, b], Variant.PRIMARY)
        np.testing.assert_allclose(s.amplitudes, a * PSI_P + b * PHI_P, atol=ATOL)

    def test_two_bit_conjugate(self):
        a, b = 0.6, 0.8
        s = states.message_state_2([a, b], Variant.CONJUGATE)
        np.testing.assert_allclose(s.amplitudes, a * PSI_M + b * PHI_M, atol=ATOL)

    def test_three_bit(self):
        c = np.array([0.5, 0.5j, -0.5, 0.5])
        for v in Variant:
            s = states.message_state_3(c, v)
            expected = sum(ci * G(g) for ci, g in zip(c, states.MESSAGE_G[v]))
            np.testing.assert_allclose(s.amplitudes, expected, atol=ATOL)

    def test_wrong_coefficient_count(self):
        with pytest.raises(ValueError):
            states.message_state_3([1, 0], Variant.PRIMARY)


class TestMeasurementBases:
    @pytest.mark.parametrize("variant", list(Variant))
    def test_two_particle_gram(self, variant):
        b = states.basis_2scheme(variant)
        assert b.vectors.shape == (4, 8)
        np.testing.assert_allclose(b.gram(), np.eye(4), atol=ATOL)

    @pytest.mark.parametrize("variant", list(Variant))
    def test_five_particle_gram(self, variant):
        b = states.basis_5scheme(variant)
        assert b.vectors.shape == (16, 32)
        np.testing.assert_allclose(b.gram(), np.eye(16), atol=ATOL)

    def test_conjugate_zeta_eta_vectors(self):
        # zeta'+- = 1/2[(|001> - |111>) +- (|010> - |100>)], eta'+- likewise on 000/110, 011/101.
        b = states.basis_2scheme(Variant.CONJUGATE)
        zp = ((ket("001") - ket("111")) + (ket("010") - ket("100"))) / 2
        em = ((ket("000") - ket("110")) - (ket("011") - ket("101"))) / 2
        np.testing.assert_allclose(b.vectors[0], zp, atol=ATOL)
        np.testing.assert_allclose(b.vectors[3], em, atol=ATOL)

    def test_two_particle_outcome_labels_distinct(self):
        for v in Variant:
            assert sorted(states.basis_2scheme(v).outcome_bits) == ["00", "01", "10", "11"]

    def test_five_particle_first_vector(self):
        # Phi_1 = 1/2[G010|00> - G111|01> + G001|10> - G100|11>] over (1,2,3 | 6,7).
        b = states.basis_5scheme(Variant.PRIMARY)
        expected = (kron(G("010"), ket("00")) - kron(G("111"), ket("01"))
                    + kron(G("001"), ket("10")) - kron(G("100"), ket("11"))) / 2
        np.testing.assert_allclose(b.vectors[0], expected, atol=ATOL)

    def test_bases_span_the_channel_support(self):
        # The partial bases are complete on every message-times-channel state.
        rng = np.random.default_rng(7)
        for v in Variant:
            c = rng.normal(size=4) + 1j * rng.normal(size=4)
            total = tensor(states.message_state_3(c / np.linalg.norm(c), v), states.brown(v))
            assert abs(outcome_probabilities(total, states.basis_5scheme(v)).sum() - 1) < ATOL
            total = tensor(states.message_state_2(c[:2] / np.linalg.norm(c[:2]), v), states.ghz_like(v))
            assert abs(outcome_probabilities(total, states.basis_2scheme(v)).sum() - 1) < ATOL


class TestFixtures:
    def test_shipped_fixture_matches_code(self):
        sts, bases = states.read_fixtures()
        for name, s in states.named_states().items():
            np.testing.assert_allclose(sts[name].amplitudes, s.amplitudes, atol=ATOL)
            assert sts[name].labels == s.labels
        for name, b in states.named_bases().items():
            np.testing.assert_allclose(bases[name].vectors, b.vectors, atol=ATOL)
            assert bases[name].outcome_bits == b.outcome_bits

    def test_round_trip(self, tmp_path):
        path = tmp_path / "states.json"
        states.write_fixtures(path)
        doc = json.loads(path.read_text())
        assert doc["bit_order"].startswith("first label")
        assert doc["states"]["bell_psi+"]["amplitudes"][0] == pytest.approx([1 / R2, 0.0])
        sts, _ = states.read_fixtures(path)
        assert set(sts) == set(states.named_states())
