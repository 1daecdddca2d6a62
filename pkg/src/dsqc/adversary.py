"""Eavesdropping attacks on the travel block and their detection statistics."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .protocol import DECOY_EXPECTATION, ChannelRun, ProtocolConfig, run_session
from .quantum import CNOT, QubitPool, StateVector, computational_basis
from .states import Variant
from .teleportation import Scheme, correction_table

ANCILLA_BASE = 100
FRESH_BASE = 200


class AttackKind(enum.Enum):
    NONE = "none"
    MEASURE_RESEND = "measure"
    INTERCEPT_RESEND = "intercept"
    ENTANGLEMENT_CNOT = "cnot"


class MeasureMode(enum.Enum):
    JOINT = "joint"    # Bell (or G_ijk) basis on the whole travel group
    SINGLE = "single"  # computational basis, qubit by qubit
    RANDOM = "random"  # per channel, chosen by Eve's generator


def _draw(rng: np.random.Generator) -> float:
    return float(rng.random())


def attack_measure_resend(pool: QubitPool, travel: Sequence[int], scheme: Scheme,
                          eve_rng: np.random.Generator, mode: MeasureMode = MeasureMode.RANDOM) -> tuple[tuple[int, ...], str]:
    """Eve measures the travel qubits and forwards freshly prepared copies of the result.

    Returns the forwarded labels and the mode used.
    """
    travel = tuple(travel)
    if not travel:
        return travel, "none"
    if mode is MeasureMode.RANDOM:
        mode = MeasureMode.JOINT if eve_rng.random() < 0.5 else MeasureMode.SINGLE
    basis = scheme.codebook_basis(travel) if mode is MeasureMode.JOINT else computational_basis(travel)
    rec = pool.measure(basis, _draw(eve_rng))
    pool.add(basis.vector(rec.outcome_bits))
    return travel, mode.value


def attack_intercept_resend(pool: QubitPool, travel: Sequence[int], scheme: Scheme,
                            eve_rng: np.random.Generator) -> tuple[tuple[int, ...], tuple[int, ...], Variant]:
    """Eve keeps the genuine travel qubits and forwards her own channel's travel share.

    Returns (labels forwarded to Bob, genuine labels Eve keeps, Eve's channel variant).
    """
    travel = tuple(travel)
    if not travel:
        return travel, (), Variant.PRIMARY
    variant = Variant.PRIMARY if eve_rng.random() < 0.5 else Variant.CONJUGATE
    fresh_labels = tuple(FRESH_BASE + l for l in scheme.channel_labels)
    pool.add(scheme.channel(variant, fresh_labels))
    forwarded = tuple(FRESH_BASE + l for l in scheme.travel_labels)
    return forwarded, travel, variant


def attack_entanglement_cnot(pool: QubitPool, travel: Sequence[int]) -> tuple[int, ...]:
    """CNOT each travel qubit onto a fresh |0> ancilla Eve keeps; returns the ancillas."""
    travel = tuple(travel)
    if not travel:
        return ()
    ancillas = tuple(ANCILLA_BASE + l for l in travel)
    pool.add(StateVector.basis_state("0" * len(ancillas), ancillas))
    for control, target in zip(travel, ancillas):
        pool.apply(CNOT, [control, target])
    return ancillas


@dataclass
class AttackModel:
    """Base eavesdropper: sees every travel group and the public announcements."""

    seed: int = 0
    rng: np.random.Generator = field(init=False, repr=False)
    record: list[dict] = field(default_factory=list, repr=False)

    kind = AttackKind.NONE

    def __post_init__(self):
        self.rng = np.random.default_rng(self.seed)

    def intercept(self, run: ChannelRun, scheme: Scheme) -> None:
        pass

    def reconstruct(self, run: ChannelRun, scheme: Scheme, outcome_bits: str) -> str | None:
        """Eve's guess at a unit after Alice announces ``outcome_bits``."""
        if not run.eve:
            return None
        correction_table(scheme).lookup(outcome_bits).apply_in(run.pool, run.eve)
        return run.pool.measure(scheme.codebook_basis(run.eve), _draw(self.rng)).outcome_bits


@dataclass
class MeasureResend(AttackModel):
    mode: MeasureMode = MeasureMode.RANDOM
    kind = AttackKind.MEASURE_RESEND

    def intercept(self, run, scheme):
        _, used = attack_measure_resend(run.pool, run.bob, scheme, self.rng, self.mode)
        self.record.append({"channel": run.entry.index, "mode": used})


@dataclass
class InterceptResend(AttackModel):
    kind = AttackKind.INTERCEPT_RESEND

    def intercept(self, run, scheme):
        forwarded, kept, variant = attack_intercept_resend(run.pool, run.bob, scheme, self.rng)
        run.bob, run.eve = forwarded, kept
        self.record.append({"channel": run.entry.index, "variant": variant.value})


@dataclass
class EntanglementCNOT(AttackModel):
    kind = AttackKind.ENTANGLEMENT_CNOT

    def intercept(self, run, scheme):
        run.eve = attack_entanglement_cnot(run.pool, run.bob)
        self.record.append({"channel": run.entry.index, "ancillas": list(run.eve)})


ATTACKS: dict[AttackKind, type[AttackModel] | None] = {
    AttackKind.NONE: None,
    AttackKind.MEASURE_RESEND: MeasureResend,
    AttackKind.INTERCEPT_RESEND: InterceptResend,
    AttackKind.ENTANGLEMENT_CNOT: EntanglementCNOT,
}


def make_attack(kind: AttackKind | str, seed: int = 0, **kwargs) -> AttackModel | None:
    kind = AttackKind(kind)
    cls = ATTACKS[kind]
    return None if cls is None else cls(seed=seed, **kwargs)


@dataclass(frozen=True)
class DetectionEstimate:
    kind: AttackKind
    trials: int
    detected_fraction: float
    leak_fraction: float
    confidence_halfwidth: float
    undetected: int = 0
    bob_error_fraction: float = 0.0

    def as_dict(self) -> dict:
        return {
            "attack": self.kind.value,
            "trials": self.trials,
            "detected_fraction": self.detected_fraction,
            "leak_fraction": self.leak_fraction,
            "halfwidth": self.confidence_halfwidth,
            "undetected": self.undetected,
            "bob_error_fraction": self.bob_error_fraction,
        }


def trial_seeds(seed: int, trial: int) -> tuple[int, int, int]:
    """Independent (session, eve, message) seeds for one trial."""
    state = np.random.SeedSequence([seed, trial]).generate_state(3, dtype=np.uint32)
    return tuple(int(s) for s in state)


def estimate_detection(attack: AttackKind | str, cfg: ProtocolConfig, trials: int,
                       message: str | None = None, units: int = 1,
                       attack_options: dict | None = None) -> DetectionEstimate:
    """Monte-Carlo detection and leakage rates over independent seeded sessions.

    When ``message`` is None each trial sends a random message of ``units`` words.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    kind = AttackKind(attack)
    scheme = cfg.scheme
    detected = undetected = leaked = bob_errors = 0
    for i in range(trials):
        s_session, s_eve, s_msg = trial_seeds(cfg.rng_seed, i)
        bits = message
        if bits is None:
            mrng = np.random.default_rng(s_msg)
            bits = "".join(str(b) for b in mrng.integers(0, 2, size=units * scheme.word_size))
        trial_cfg = ProtocolConfig(scheme, cfg.decoy_ratio, cfg.abort_threshold, s_session)
        eve = make_attack(kind, s_eve, **(attack_options or {}))
        t = run_session(bits, trial_cfg, eve)
        if t.aborted:
            detected += 1
            continue
        undetected += 1
        if t.eve_reconstruction == bits:
            leaked += 1
        if t.decoded_bits != bits:
            bob_errors += 1
    p = detected / trials
    return DetectionEstimate(
        kind=kind,
        trials=trials,
        detected_fraction=p,
        leak_fraction=leaked / undetected if undetected else 0.0,
        confidence_halfwidth=3 * math.sqrt(p * (1 - p) / trials),
        undetected=undetected,
        bob_error_fraction=bob_errors / undetected if undetected else 0.0,
    )


# --- analytic oracle --------------------------------------------------------
#
# Density matrices over an explicit register, built with plain kron/permutation
# matrices so the check is independent of the sampling path above.

def _ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits))
    v[int(bits, 2)] = 1
    return v


def _embed(op: np.ndarray, positions: Sequence[int], n: int) -> np.ndarray:
    """Operator acting on register positions (MSB-first) as a 2**n matrix."""
    k = len(positions)
    rest = [p for p in range(n) if p not in positions]
    full = np.kron(op, np.eye(2 ** (n - k)))
    perm = list(positions) + rest
    full = full.reshape([2] * (2 * n))
    inv = np.argsort(perm)
    full = full.transpose(list(inv) + [n + i for i in inv])
    return full.reshape(2**n, 2**n)


def _cnot_matrix(control: int, target: int, n: int) -> np.ndarray:
    m = np.zeros((2**n, 2**n))
    for idx in range(2**n):
        bits = [(idx >> (n - 1 - p)) & 1 for p in range(n)]
        if bits[control]:
            bits[target] ^= 1
        m[int("".join(map(str, bits)), 2), idx] = 1
    return m


def _consistency_projector(scheme: Scheme, variant: Variant, n: int) -> np.ndarray:
    """Projector on (home, travel, *rest) onto Alice/Bob outcomes that pass the check."""
    h, tr = len(scheme.home_labels), len(scheme.travel_labels)
    book = scheme.codebook_basis()
    proj = np.zeros((2 ** (h + tr), 2 ** (h + tr)), dtype=complex)
    for a, b in DECOY_EXPECTATION[(scheme, variant)].items():
        v = book.vectors[book.index_of(b)]
        proj += np.kron(np.outer(_ket(a), _ket(a)), np.outer(v, v.conj()))
    return np.kron(proj, np.eye(2 ** (n - h - tr)))


def _channel_rho(scheme: Scheme, variant: Variant) -> np.ndarray:
    """Channel density matrix with qubits ordered home first, then travel."""
    psi = scheme.channel(variant).amplitudes.reshape([2] * len(scheme.channel_labels))
    order = [scheme.channel_labels.index(l) for l in scheme.home_labels + scheme.travel_labels]
    v = psi.transpose(order).reshape(-1)
    return np.outer(v, v.conj())


def decoy_error_probability(kind: AttackKind | str, scheme: Scheme, variant: Variant,
                            mode: MeasureMode = MeasureMode.RANDOM) -> float:
    """Exact probability that one decoy of ``variant`` fails the correlation check."""
    kind = AttackKind(kind)
    h, tr = len(scheme.home_labels), len(scheme.travel_labels)
    rho = _channel_rho(scheme, variant)
    n = h + tr
    travel_pos = list(range(h, n))

    if kind is AttackKind.NONE:
        pass
    elif kind is AttackKind.ENTANGLEMENT_CNOT:
        n = h + 2 * tr
        rho = np.kron(rho, np.outer(_ket("0" * tr), _ket("0" * tr)))
        for i in range(tr):
            u = _cnot_matrix(h + i, h + tr + i, n)
            rho = u @ rho @ u.T
    elif kind is AttackKind.INTERCEPT_RESEND:
        # Alice keeps her home share; Bob receives Eve's travel share of a fresh
        # channel of either variant.
        psi = rho.reshape([2 ** h, 2 ** tr] * 2)
        home = np.einsum("atbt->ab", psi)
        forwarded = sum(
            np.einsum("hahb->ab", _channel_rho(scheme, w).reshape([2 ** h, 2 ** tr] * 2)) / 2
            for w in Variant
        )
        rho = np.kron(home, forwarded)
    elif kind is AttackKind.MEASURE_RESEND:
        if mode is MeasureMode.RANDOM:
            return 0.5 * (decoy_error_probability(kind, scheme, variant, MeasureMode.JOINT)
                          + decoy_error_probability(kind, scheme, variant, MeasureMode.SINGLE))
        if mode is MeasureMode.JOINT:
            vecs = scheme.codebook_basis().vectors
        else:
            vecs = np.eye(2 ** tr)
        out = np.zeros_like(rho)
        for v in vecs:
            p = _embed(np.outer(v, v.conj()), travel_pos, n)
            out += p @ rho @ p.conj().T
        rho = out
    else:  # pragma: no cover
        raise ValueError(kind)

    passed = np.trace(_consistency_projector(scheme, variant, n) @ rho).real
    return float(1.0 - passed)


def mean_decoy_error(kind: AttackKind | str, scheme: Scheme, mode: MeasureMode = MeasureMode.RANDOM) -> float:
    """Per-decoy error probability averaged over the two decoy variants."""
    return sum(decoy_error_probability(kind, scheme, v, mode) for v in Variant) / 2


def session_detection_probability(kind: AttackKind | str, scheme: Scheme, decoys: int,
                                  threshold: float = 0.0, mode: MeasureMode = MeasureMode.RANDOM) -> float:
    """P(error rate > threshold) when each of ``decoys`` checks fails independently."""
    if decoys == 0:
        return 0.0
    q = mean_decoy_error(kind, scheme, mode)
    return sum(
        math.comb(decoys, k) * q**k * (1 - q) ** (decoys - k)
        for k in range(decoys + 1)
        if k / decoys > threshold
    )
