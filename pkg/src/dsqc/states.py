"""Named states and measurement bases used by the two teleportation schemes.

Bell naming follows the protocol's own convention, which is swapped
relative to the usual one: psi = (|00> +- |11>)/sqrt2 and
phi = (|01> +- |10>)/sqrt2.
"""

from __future__ import annotations

import enum
import functools
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .quantum import (
    ATOL,
    LabelCollision,
    MeasurementBasis,
    NormalizationError,
    StateVector,
    computational_basis,
    permute_qubits,
)

SQRT2 = np.sqrt(2.0)


class BellKind(enum.Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"


class Variant(enum.Enum):
    """Which of the two orthogonal channels (and matching message family)."""

    PRIMARY = "primary"
    CONJUGATE = "conjugate"


def _ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=np.complex128)
    v[int(bits, 2)] = 1.0
    return v


def _kron(*vs: np.ndarray) -> np.ndarray:
    out = np.ones(1, dtype=np.complex128)
    for v in vs:
        out = np.kron(out, v)
    return out


def _check_labels(labels: Sequence[int], n: int) -> tuple[int, ...]:
    labels = tuple(labels)
    if len(labels) != n:
        raise ValueError(f"expected {n} labels, got {len(labels)}")
    if len(set(labels)) != n:
        raise LabelCollision(f"duplicate labels {labels}")
    return labels


_BELL = {
    BellKind.PSI_PLUS: (_ket("00") + _ket("11")) / SQRT2,
    BellKind.PSI_MINUS: (_ket("00") - _ket("11")) / SQRT2,
    BellKind.PHI_PLUS: (_ket("01") + _ket("10")) / SQRT2,
    BellKind.PHI_MINUS: (_ket("01") - _ket("10")) / SQRT2,
}


def bell_vector(kind: BellKind) -> np.ndarray:
    return _BELL[kind].copy()


def bell(kind: BellKind, labels: Sequence[int] = (4, 5)) -> StateVector:
    return StateVector(_BELL[kind], _check_labels(labels, 2))


def ghz_like(variant: Variant, labels: Sequence[int] = (3, 4, 5)) -> StateVector:
    labels = _check_labels(labels, 3)
    if variant is Variant.PRIMARY:
        amps = _kron(_ket("0"), _BELL[BellKind.PSI_PLUS]) + _kron(_ket("1"), _BELL[BellKind.PHI_PLUS])
    else:
        amps = _kron(_ket("0"), _BELL[BellKind.PHI_MINUS]) + _kron(_ket("1"), _BELL[BellKind.PSI_MINUS])
    return StateVector(amps / SQRT2, labels)


def ghz_g_vector(i: int, j: int, k: int) -> np.ndarray:
    if {i, j, k} - {0, 1}:
        raise ValueError("G labels are bits")
    return (_ket(f"0{j}{k}") + (-1) ** i * _ket(f"1{j ^ 1}{k ^ 1}")) / SQRT2


def ghz_g(label: str | tuple[int, int, int], qubit_labels: Sequence[int] = (1, 2, 3)) -> StateVector:
    """G_ijk = (|0jk> + (-1)^i |1, j+1, k+1>)/sqrt2, label given as "ijk" or a tuple."""
    i, j, k = (int(c) for c in label)
    return StateVector(ghz_g_vector(i, j, k), _check_labels(qubit_labels, 3))


# The four G states spanning each scheme's message space, in the order of the
# coefficients (alpha, beta, gamma, delta).  The conjugate family is obtained by
# G100 -> G000, G001 -> G101, G010 -> G110, G111 -> G011.
MESSAGE_G = {
    Variant.PRIMARY: ("100", "001", "010", "111"),
    Variant.CONJUGATE: ("000", "101", "110", "011"),
}
_REPLACE = dict(zip(MESSAGE_G[Variant.PRIMARY], MESSAGE_G[Variant.CONJUGATE]))


def _g(label: str, variant: Variant) -> np.ndarray:
    if variant is Variant.CONJUGATE:
        label = _REPLACE[label]
    return ghz_g_vector(*(int(c) for c in label))


# Brown channel in (6,7 | 4,5,8) order: the pair (6,7) in state |ab> goes with
# the sign and G state below.
BROWN_TERMS = (("00", +1, "010"), ("01", -1, "111"), ("10", +1, "001"), ("11", -1, "100"))


def brown(variant: Variant, labels: Sequence[int] = (4, 5, 6, 7, 8)) -> StateVector:
    """Five-qubit Brown channel with amplitudes ordered as ``labels`` (4,5,6,7,8 roles)."""
    return _brown(variant, _check_labels(labels, 5))


@functools.lru_cache(maxsize=64)
def _brown(variant: Variant, labels: tuple[int, ...]) -> StateVector:
    amps = sum(s * _kron(_ket(ab), _g(g, variant)) for ab, s, g in BROWN_TERMS) / 2
    q4, q5, q6, q7, q8 = labels
    return permute_qubits(StateVector(amps, (q6, q7, q4, q5, q8)), labels)


def brown_standard_form(labels: Sequence[int] = (4, 5, 6, 7, 8)) -> StateVector:
    """Primary Brown state written directly as |abc>|Bell> over (4,5,6 | 7,8)."""
    b = _BELL
    amps = (
        _kron(_ket("001"), b[BellKind.PHI_MINUS])
        + _kron(_ket("010"), b[BellKind.PSI_MINUS])
        + _kron(_ket("100"), b[BellKind.PHI_PLUS])
        + _kron(_ket("111"), b[BellKind.PSI_PLUS])
    ) / 2
    return StateVector(amps, _check_labels(labels, 5))


def _normalized(coeffs: Sequence[complex], n: int) -> np.ndarray:
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.shape != (n,):
        raise ValueError(f"expected {n} coefficients")
    if not np.all(np.isfinite(c)) or abs(np.sum(np.abs(c) ** 2) - 1.0) > ATOL:
        raise NormalizationError(f"coefficients {coeffs} are not unit-normalized")
    return c


def message_state_2(coeffs: Sequence[complex], variant: Variant, labels: Sequence[int] = (1, 2)) -> StateVector:
    """alpha(|00> +- |11>) + beta(|01> +- |10>), with the 1/sqrt2 that makes it a unit vector."""
    alpha, beta = _normalized(coeffs, 2)
    s = 1 if variant is Variant.PRIMARY else -1
    amps = alpha * (_ket("00") + s * _ket("11")) + beta * (_ket("01") + s * _ket("10"))
    return StateVector(amps / SQRT2, _check_labels(labels, 2))


def message_state_3(coeffs: Sequence[complex], variant: Variant, labels: Sequence[int] = (1, 2, 3)) -> StateVector:
    c = _normalized(coeffs, 4)
    amps = sum(ci * _g(g, variant) for ci, g in zip(c, MESSAGE_G[Variant.PRIMARY]))
    return StateVector(amps, _check_labels(labels, 3))


# --- measurement bases ----------------------------------------------------

# Sign pattern (s1, s2, s3, s4) of the two-particle basis
#   zeta+- = 1/2[(|001> + s1|111>) +- (|010> + s2|100>)]
#   eta+-  = 1/2[(|000> + s3|110>) +- (|011> + s4|101>)]
CONJUGATE_SIGNS = (-1, -1, -1, -1)
# Found by the correctability search in teleportation.resolve_primary_signs;
# the printed zeta+- omits this sign and the printed eta+- carries the
# conjugate's minus signs, neither of which can teleport the primary family.
PRIMARY_SIGNS = (+1, +1, +1, +1)

# Outcome bits per vector (zeta+, zeta-, eta+, eta-).  The conjugate labelling
# follows two-particle correction row order; the primary labelling is chosen so both variants
# share one correction table and Bob never needs to know the channel.
OUTCOME_BITS_2 = {
    Variant.CONJUGATE: ("00", "01", "10", "11"),
    Variant.PRIMARY: ("10", "11", "00", "01"),
}


def two_particle_vectors(signs: Sequence[int]) -> np.ndarray:
    return _two_particle_vectors(tuple(signs))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@functools.lru_cache(maxsize=None)
def _two_particle_vectors(signs: tuple[int, ...]) -> np.ndarray:
    s1, s2, s3, s4 = signs
    zeta = [((_ket("001") + s1 * _ket("111")) + pm * (_ket("010") + s2 * _ket("100"))) / 2 for pm in (1, -1)]
    eta = [((_ket("000") + s3 * _ket("110")) + pm * (_ket("011") + s4 * _ket("101"))) / 2 for pm in (1, -1)]
    return _readonly(np.array(zeta + eta))


def basis_2scheme(variant: Variant, subset: Sequence[int] = (1, 2, 3),
                  signs: Sequence[int] | None = None,
                  outcome_bits: Sequence[str] | None = None) -> MeasurementBasis:
    if signs is None:
        signs = PRIMARY_SIGNS if variant is Variant.PRIMARY else CONJUGATE_SIGNS
    tick = "'" if variant is Variant.CONJUGATE else ""
    return MeasurementBasis(
        tuple(subset),
        two_particle_vectors(signs),
        tuple(outcome_bits or OUTCOME_BITS_2[variant]),
        tuple(f"{n}{tick}{pm}" for n in ("zeta", "eta") for pm in "+-"),
    )


# Phi_{2m-1}, Phi_{2m} = 1/2{ G010|a> + t G111|b> +- G001|c> +-' G100|d> } over
# (1,2,3 | 6,7).  ``t`` is the fixed sign of the second term; the fourth sign
# is pm * t, so rows with t = -1 are the "+- / -+" lines.
_PHI_ROWS = (
    ("00", "01", "10", "11", -1),
    ("00", "01", "10", "11", +1),
    ("01", "00", "11", "10", -1),
    ("01", "00", "11", "10", +1),
    ("10", "11", "00", "01", -1),
    ("10", "11", "00", "01", +1),
    ("11", "10", "01", "00", -1),
    ("11", "10", "01", "00", +1),
)


@functools.lru_cache(maxsize=None)
def five_particle_vectors(variant: Variant) -> np.ndarray:
    g010, g111, g001, g100 = (_g(l, variant) for l in ("010", "111", "001", "100"))
    vecs = []
    for a, b, c, d, t in _PHI_ROWS:
        for pm in (1, -1):
            fourth = pm * t
            vecs.append((_kron(g010, _ket(a)) + t * _kron(g111, _ket(b))
                         + pm * _kron(g001, _ket(c)) + fourth * _kron(g100, _ket(d))) / 2)
    return _readonly(np.array(vecs))


def basis_5scheme(variant: Variant, subset: Sequence[int] = (1, 2, 3, 6, 7)) -> MeasurementBasis:
    tick = "'" if variant is Variant.CONJUGATE else ""
    return MeasurementBasis(
        tuple(subset),
        five_particle_vectors(variant),
        tuple(f"{i:04b}" for i in range(16)),
        tuple(f"Phi{tick}{i + 1}" for i in range(16)),
    )


# Two-bit codebook: 00 -> psi+, 01 -> phi+, 10 -> psi-, 11 -> phi-.
BELL_CODEBOOK = {
    "00": BellKind.PSI_PLUS,
    "01": BellKind.PHI_PLUS,
    "10": BellKind.PSI_MINUS,
    "11": BellKind.PHI_MINUS,
}


def bell_basis(subset: Sequence[int] = (4, 5)) -> MeasurementBasis:
    bits = tuple(BELL_CODEBOOK)
    return MeasurementBasis(
        tuple(subset),
        np.array([_BELL[BELL_CODEBOOK[b]] for b in bits]),
        bits,
        tuple(BELL_CODEBOOK[b].value for b in bits),
    )


def ghz_basis(subset: Sequence[int] = (4, 5, 8)) -> MeasurementBasis:
    """The eight G_ijk states; outcome bits are the word ijk."""
    words = tuple(f"{i:03b}" for i in range(8))
    return MeasurementBasis(
        tuple(subset),
        np.array([ghz_g_vector(*(int(c) for c in w)) for w in words]),
        words,
        tuple(f"G{w}" for w in words),
    )


# --- fixture export -------------------------------------------------------

def _pairs(amps: np.ndarray) -> list[list[float]]:
    return [[float(a.real), float(a.imag)] for a in amps]


def named_states() -> dict[str, StateVector]:
    out: dict[str, StateVector] = {}
    for kind in BellKind:
        out[f"bell_{kind.value}"] = bell(kind)
    for v in Variant:
        out[f"ghz_like_{v.value}"] = ghz_like(v)
        out[f"brown_{v.value}"] = brown(v)
    for w in range(8):
        out[f"G{w:03b}"] = ghz_g(f"{w:03b}")
    return out


def named_bases() -> dict[str, MeasurementBasis]:
    out = {}
    for v in Variant:
        out[f"two_particle_{v.value}"] = basis_2scheme(v)
        out[f"five_particle_{v.value}"] = basis_5scheme(v)
    out["bell"] = bell_basis()
    out["ghz"] = ghz_basis()
    out["computational_1"] = computational_basis((3,))
    return out


def fixture_document() -> dict:
    """Every named state and basis as (re, im) pairs, MSB-first ordering."""
    states = {
        name: {"labels": list(s.labels), "amplitudes": _pairs(s.amplitudes)}
        for name, s in named_states().items()
    }
    bases = {
        name: {
            "subset": list(b.subset),
            "vectors": [
                {"bits": bits, "name": b.names[i] if b.names else bits, "amplitudes": _pairs(vec)}
                for i, (bits, vec) in enumerate(zip(b.outcome_bits, b.vectors))
            ],
        }
        for name, b in named_bases().items()
    }
    return {"bit_order": "first label is most significant", "states": states, "bases": bases}


def write_fixtures(path: str | Path) -> None:
    Path(path).write_text(json.dumps(fixture_document(), indent=1, sort_keys=True) + "\n")


FIXTURE_PATH = Path(__file__).parent / "data" / "states.json"


def read_fixtures(path: str | Path = FIXTURE_PATH) -> tuple[dict[str, StateVector], dict[str, MeasurementBasis]]:
    """Inverse of ``write_fixtures``."""
    doc = json.loads(Path(path).read_text())

    def vec(pairs):
        return np.array([complex(re, im) for re, im in pairs])

    sts = {n: StateVector(vec(d["amplitudes"]), tuple(d["labels"])) for n, d in doc["states"].items()}
    bases = {
        n: MeasurementBasis(
            tuple(d["subset"]),
            np.array([vec(v["amplitudes"]) for v in d["vectors"]]),
            tuple(v["bits"] for v in d["vectors"]),
            tuple(v["name"] for v in d["vectors"]),
        )
        for n, d in doc["bases"].items()
    }
    return sts, bases
