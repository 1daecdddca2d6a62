"""Alice/Bob DSQC sessions: channel preparation, decoy checking, transfer, decoding.

A session prepares one entangled channel per message unit plus decoy
channels, sends the travel qubits (optionally through an eavesdropper),
checks decoy correlations, and then teleports each message unit.  All
randomness comes from the session seed, so a session replays exactly.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .efficiency import ProtocolCosts
from .quantum import QubitPool, StateVector, computational_basis, measure_in_basis
from .states import MESSAGE_G, Variant
from .teleportation import PauliProduct, Scheme, correction_table

if TYPE_CHECKING:
    from .adversary import AttackModel

DEFAULT_SEED = 0xD5C0  # 54720


class MalformedMessage(ValueError):
    pass


class ProtocolViolation(Exception):
    pass


@dataclass(frozen=True)
class MessageBits:
    bits: str
    unit_size: int

    def __post_init__(self):
        if self.unit_size not in (2, 3):
            raise MalformedMessage(f"unit size must be 2 or 3, got {self.unit_size}")
        if set(self.bits) - {"0", "1"}:
            raise MalformedMessage(f"message {self.bits!r} is not a bit string")
        if len(self.bits) % self.unit_size:
            raise MalformedMessage(
                f"message length {len(self.bits)} not divisible by {self.unit_size}"
            )

    @property
    def words(self) -> list[str]:
        n = self.unit_size
        return [self.bits[i:i + n] for i in range(0, len(self.bits), n)]


@dataclass(frozen=True)
class UnitPlan:
    word: str
    coefficients: tuple[complex, ...]
    variant: Variant


def encode(bits: MessageBits | str, scheme: Scheme | None = None) -> list[UnitPlan]:
    """Map each message word to its message-state coefficients and channel.

    Two-bit words use the Bell codebook 00, 01, 10, 11 -> psi+, phi+, psi-,
    phi-; the primary channel carries 00/01 and the conjugate 10/11.  A
    three-bit word ijk is the state G_ijk, sent over the primary channel
    when it belongs to the primary message family and the conjugate one
    otherwise.
    """
    if isinstance(bits, str):
        if scheme is None:
            raise TypeError("scheme required with a plain bit string")
        bits = MessageBits(bits, scheme.word_size)
    plans = []
    for w in bits.words:
        if bits.unit_size == 2:
            variant = Variant.PRIMARY if w[0] == "0" else Variant.CONJUGATE
            coeffs = (1, 0) if w[1] == "0" else (0, 1)
        else:
            variant = Variant.PRIMARY if w in MESSAGE_G[Variant.PRIMARY] else Variant.CONJUGATE
            coeffs = tuple(int(w == g) for g in MESSAGE_G[variant])
        plans.append(UnitPlan(w, coeffs, variant))
    return plans


def decode(bob_state: StateVector, scheme: Scheme, random_draw: float = 0.0) -> str:
    """Read a word from Bob's corrected qubits in the codebook basis."""
    basis = scheme.codebook_basis(bob_state.labels)
    return measure_in_basis(bob_state, basis, random_draw).outcome_bits


# Bob's codebook outcome expected on a decoy channel, given Alice's
# computational-basis outcome on her home qubit(s).
DECOY_EXPECTATION = {
    (Scheme.TWO_PARTICLE, Variant.PRIMARY): {"0": "00", "1": "01"},
    (Scheme.TWO_PARTICLE, Variant.CONJUGATE): {"0": "11", "1": "10"},
    (Scheme.THREE_PARTICLE, Variant.PRIMARY): {"00": "010", "01": "111", "10": "001", "11": "100"},
    (Scheme.THREE_PARTICLE, Variant.CONJUGATE): {"00": "110", "01": "011", "10": "101", "11": "000"},
}


class Role(enum.Enum):
    DECOY = "decoy"
    MESSAGE = "message"


@dataclass(frozen=True)
class ChannelEntry:
    index: int
    variant: Variant
    role: Role
    unit: int | None
    labels: tuple[int, ...]


@dataclass(frozen=True)
class ChannelSequence:
    scheme: Scheme
    entries: tuple[ChannelEntry, ...]

    @property
    def decoy_positions(self) -> tuple[int, ...]:
        return tuple(e.index for e in self.entries if e.role is Role.DECOY)

    @property
    def message_entries(self) -> list[ChannelEntry]:
        return sorted((e for e in self.entries if e.role is Role.MESSAGE), key=lambda e: e.unit)


@dataclass
class ChannelRun:
    """Live quantum bookkeeping for one channel during a session."""

    entry: ChannelEntry
    pool: QubitPool
    home: tuple[int, ...]
    bob: tuple[int, ...]
    eve: tuple[int, ...] = ()


class Direction(enum.Enum):
    ALICE_TO_BOB = "alice->bob"
    BOB_TO_ALICE = "bob->alice"


class MessageKind(enum.Enum):
    RECEIPT_CONFIRM = "receipt_confirm"
    DECOY_POSITIONS = "decoy_positions"
    DECOY_OUTCOME = "decoy_outcome"
    MEASUREMENT_OUTCOME = "measurement_outcome"
    ABORT = "abort"


@dataclass(frozen=True)
class ClassicalMessage:
    kind: MessageKind
    direction: Direction
    payload: str = ""

    def payload_hex(self) -> str:
        if not self.payload:
            return "-"
        return format(int(self.payload, 2), "x").zfill(math.ceil(len(self.payload) / 4))

    def log_line(self, seq: int) -> str:
        return f"{seq:04d} {self.direction.value} {self.kind.value} {len(self.payload)} {self.payload_hex()}"

    def as_dict(self) -> dict:
        return {"direction": self.direction.value, "kind": self.kind.value, "payload": self.payload}


@dataclass(frozen=True)
class DecoyCheck:
    index: int
    variant: Variant
    alice_bits: str
    bob_bits: str
    expected_bits: str

    @property
    def consistent(self) -> bool:
        return self.bob_bits == self.expected_bits

    def as_dict(self) -> dict:
        return {"index": self.index, "variant": self.variant.value, "alice": self.alice_bits,
                "bob": self.bob_bits, "expected": self.expected_bits, "consistent": self.consistent}


@dataclass(frozen=True)
class UnitRecord:
    unit: int
    index: int
    variant: Variant
    word: str
    outcome_bits: str
    correction: PauliProduct
    decoded: str
    eve_guess: str | None = None

    def as_dict(self) -> dict:
        return {"unit": self.unit, "index": self.index, "variant": self.variant.value,
                "word": self.word, "outcome": self.outcome_bits, "correction": str(self.correction),
                "decoded": self.decoded, "eve_guess": self.eve_guess}


@dataclass(frozen=True)
class ProtocolConfig:
    scheme: Scheme = Scheme.TWO_PARTICLE
    decoy_ratio: float = 0.5
    abort_threshold: float = 0.0
    rng_seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not 0.0 <= self.decoy_ratio < 1.0:
            raise ValueError(f"decoy_ratio must lie in [0, 1), got {self.decoy_ratio}")
        if not 0.0 <= self.abort_threshold <= 1.0:
            raise ValueError(f"abort_threshold must lie in [0, 1], got {self.abort_threshold}")

    def decoy_count(self, units: int) -> int:
        """Decoy channels so that decoys make up ``decoy_ratio`` of all channels."""
        exact = self.decoy_ratio * units / (1.0 - self.decoy_ratio)
        return math.ceil(round(exact, 9))


@dataclass
class SessionTranscript:
    scheme: Scheme
    seed: int
    message: str
    config: ProtocolConfig
    sequence: ChannelSequence
    messages: list[ClassicalMessage] = field(default_factory=list)
    decoy_checks: list[DecoyCheck] = field(default_factory=list)
    units: list[UnitRecord] = field(default_factory=list)
    error_rate: float = 0.0
    aborted: bool = False
    decoded_bits: str | None = None
    costs: ProtocolCosts = field(default_factory=lambda: ProtocolCosts(0, 0, 0, 0))
    attack: str | None = None

    @property
    def eve_reconstruction(self) -> str | None:
        if self.aborted or any(u.eve_guess is None for u in self.units):
            return None
        return "".join(u.eve_guess for u in self.units)

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "seed": self.seed,
            "message": self.message,
            "decoy_ratio": self.config.decoy_ratio,
            "abort_threshold": self.config.abort_threshold,
            "attack": self.attack,
            "sequence": [
                {"index": e.index, "role": e.role.value, "variant": e.variant.value, "unit": e.unit}
                for e in self.sequence.entries
            ],
            "events": [m.as_dict() for m in self.messages],
            "decoy_checks": [c.as_dict() for c in self.decoy_checks],
            "units": [u.as_dict() for u in self.units],
            "error_rate": self.error_rate,
            "aborted": self.aborted,
            "decoded": self.decoded_bits,
            "costs": self.costs.as_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def to_log(self) -> str:
        """One event per line: sequence number, direction, kind, payload length, payload hex."""
        return "\n".join(m.log_line(i) for i, m in enumerate(self.messages)) + "\n"


def prepare_sequence(plans: Sequence[UnitPlan], cfg: ProtocolConfig, rng: np.random.Generator) -> ChannelSequence:
    scheme = cfg.scheme
    n_units = len(plans)
    n_decoys = cfg.decoy_count(n_units) if n_units else 0
    total = n_units + n_decoys
    decoy_slots = set(rng.choice(total, size=n_decoys, replace=False).tolist()) if n_decoys else set()
    decoy_variants = iter(rng.integers(0, 2, size=n_decoys).tolist())
    units = iter(enumerate(plans))
    entries = []
    for idx in range(total):
        if idx in decoy_slots:
            v = Variant.PRIMARY if next(decoy_variants) == 0 else Variant.CONJUGATE
            entries.append(ChannelEntry(idx, v, Role.DECOY, None, scheme.channel_labels))
        else:
            u, plan = next(units)
            entries.append(ChannelEntry(idx, plan.variant, Role.MESSAGE, u, scheme.channel_labels))
    return ChannelSequence(scheme, tuple(entries))


def _launch(seq: ChannelSequence) -> list[ChannelRun]:
    scheme = seq.scheme
    return [
        ChannelRun(e, QubitPool([scheme.channel(e.variant, e.labels)]), scheme.home_labels, scheme.travel_labels)
        for e in seq.entries
    ]


def error_check(sequence: ChannelSequence, runs: Sequence[ChannelRun], decoy_positions: Sequence[int],
                rng: np.random.Generator) -> tuple[float, list[DecoyCheck], list[ClassicalMessage]]:
    """Decoy correlation check; returns (error rate, per-decoy checks, classical messages)."""
    if tuple(decoy_positions) != sequence.decoy_positions:
        raise ProtocolViolation(
            f"announced decoys {tuple(decoy_positions)} differ from prepared {sequence.decoy_positions}"
        )
    scheme = sequence.scheme
    if not decoy_positions:
        return 0.0, [], []
    by_index = {r.entry.index: r for r in runs}
    checks = []
    for pos in decoy_positions:
        run = by_index[pos]
        if run.entry.role is not Role.DECOY:
            raise ProtocolViolation(f"channel {pos} is not a decoy")
        alice = run.pool.measure(computational_basis(run.home), rng.random()).outcome_bits
        checks.append((run, alice))
    mask = "".join("1" if i in set(decoy_positions) else "0" for i in range(len(sequence.entries)))
    msgs = [ClassicalMessage(MessageKind.DECOY_POSITIONS, Direction.ALICE_TO_BOB, mask)]
    results = []
    for run, alice in checks:
        bob = run.pool.measure(scheme.codebook_basis(run.bob), rng.random()).outcome_bits
        expected = DECOY_EXPECTATION[(scheme, run.entry.variant)][alice]
        results.append(DecoyCheck(run.entry.index, run.entry.variant, alice, bob, expected))
    msgs.append(ClassicalMessage(MessageKind.DECOY_OUTCOME, Direction.BOB_TO_ALICE,
                                 "".join(c.bob_bits for c in results)))
    rate = sum(not c.consistent for c in results) / len(results)
    return rate, results, msgs


def transfer_unit(run: ChannelRun, plan: UnitPlan, scheme: Scheme, rng: np.random.Generator,
                  adversary: "AttackModel | None" = None) -> UnitRecord:
    """Teleport one message unit over its channel and let Bob decode it."""
    run.pool.add(scheme.message(plan.coefficients, plan.variant))
    rec = run.pool.measure(scheme.basis(plan.variant), rng.random())
    corr = correction_table(scheme).lookup(rec.outcome_bits)
    corr.apply_in(run.pool, run.bob)
    decoded = run.pool.measure(scheme.codebook_basis(run.bob), rng.random()).outcome_bits
    guess = adversary.reconstruct(run, scheme, rec.outcome_bits) if adversary else None
    return UnitRecord(run.entry.unit, run.entry.index, plan.variant, plan.word, rec.outcome_bits,
                      corr, decoded, guess)


def run_session(bits: MessageBits | str, cfg: ProtocolConfig = ProtocolConfig(),
                adversary: "AttackModel | None" = None) -> SessionTranscript:
    scheme = cfg.scheme
    if isinstance(bits, str):
        bits = MessageBits(bits, scheme.word_size)
    if bits.unit_size != scheme.word_size:
        raise MalformedMessage(f"{bits.unit_size}-bit units with the {scheme.value} scheme")
    rng = np.random.default_rng(cfg.rng_seed)
    plans = encode(bits)
    seq = prepare_sequence(plans, cfg, rng)
    runs = _launch(seq)
    t = SessionTranscript(scheme, cfg.rng_seed, bits.bits, cfg, seq,
                          attack=adversary.kind.value if adversary else None)

    if adversary is not None:
        for run in runs:
            adversary.intercept(run, scheme)
    t.messages.append(ClassicalMessage(MessageKind.RECEIPT_CONFIRM, Direction.BOB_TO_ALICE))

    t.error_rate, t.decoy_checks, msgs = error_check(seq, runs, seq.decoy_positions, rng)
    t.messages.extend(msgs)

    size = len(scheme.channel_labels)
    n_units, n_decoys = len(plans), len(seq.decoy_positions)
    if t.error_rate > cfg.abort_threshold:
        t.aborted = True
        t.messages.append(ClassicalMessage(MessageKind.ABORT, Direction.ALICE_TO_BOB))
        t.costs = ProtocolCosts(0, n_units * size, 0, n_decoys * size)  # nothing delivered
        return t

    by_index = {r.entry.index: r for r in runs}
    for entry in seq.message_entries:
        unit = transfer_unit(by_index[entry.index], plans[entry.unit], scheme, rng, adversary)
        t.messages.append(ClassicalMessage(MessageKind.MEASUREMENT_OUTCOME, Direction.ALICE_TO_BOB,
                                           unit.outcome_bits))
        t.units.append(unit)
    t.decoded_bits = "".join(u.decoded for u in t.units)
    b_t = sum(len(m.payload) for m in t.messages if m.kind is MessageKind.MEASUREMENT_OUTCOME)
    t.costs = ProtocolCosts(len(bits.bits), n_units * size, b_t, n_decoys * size)
    return t

