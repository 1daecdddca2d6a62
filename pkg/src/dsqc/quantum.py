"""Dense state-vector primitives over labelled qubits.

Amplitudes are stored most-significant-bit first: the first entry of
``labels`` is the leftmost bit of the basis index, so ``|01>`` on labels
``(1, 2)`` means qubit 1 is 0 and qubit 2 is 1.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ATOL = 1e-9
MAX_QUBITS = 12


class QuantumError(Exception):
    """Base class for state-vector errors."""


class LabelCollision(QuantumError):
    pass


class LabelNotFound(QuantumError):
    pass


class LabelMismatch(QuantumError):
    pass


class ArityMismatch(QuantumError):
    pass


class InvalidPermutation(QuantumError):
    pass


class DegenerateMeasurement(QuantumError):
    pass


class IncompleteBasis(QuantumError):
    """The measured state has weight outside the span of the basis."""


class NormalizationError(QuantumError):
    pass


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    labels: tuple[int, ...]

    def __post_init__(self):
        amps = _frozen(np.asarray(self.amplitudes).reshape(-1))
        labels = tuple(int(l) for l in self.labels)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "labels", labels)
        n = len(labels)
        if n < 1 or n > MAX_QUBITS:
            raise ValueError(f"need 1..{MAX_QUBITS} qubits, got {n}")
        if len(set(labels)) != n:
            raise LabelCollision(f"duplicate labels in {labels}")
        if any(l < 0 for l in labels):
            raise ValueError(f"labels must be nonnegative: {labels}")
        if amps.size != 2**n:
            raise ValueError(f"{amps.size} amplitudes for {n} qubits")
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitude")
        if abs(np.vdot(amps, amps).real - 1.0) > ATOL:
            raise NormalizationError(f"squared norm {np.vdot(amps, amps).real!r} != 1")

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    @classmethod
    def from_unnormalized(cls, amplitudes, labels) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm < 1e-12:
            raise NormalizationError("zero vector")
        return cls(amps / norm, labels)

    @classmethod
    def basis_state(cls, bits: str, labels: Sequence[int]) -> "StateVector":
        amps = np.zeros(2 ** len(bits), dtype=np.complex128)
        amps[int(bits, 2)] = 1.0
        return cls(amps, tuple(labels))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis of size 2 per qubit."""
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def relabel(self, labels: Sequence[int]) -> "StateVector":
        return StateVector(self.amplitudes, tuple(labels))

    def __repr__(self) -> str:
        terms = []
        for idx in np.flatnonzero(np.abs(self.amplitudes) > ATOL):
            a = self.amplitudes[idx]
            terms.append(f"({a.real:+.4f}{a.imag:+.4f}j)|{idx:0{self.num_qubits}b}>")
        return f"StateVector[{','.join(map(str, self.labels))}](" + " ".join(terms) + ")"


@dataclass(frozen=True)
class GateMatrix:
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = _frozen(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.shape not in ((2, 2), (4, 4)):
            raise ValueError(f"gate must be 2x2 or 4x4, got {m.shape}")
        if not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=ATOL):
            raise ValueError(f"gate {self.name or '?'} is not unitary")

    @property
    def arity(self) -> int:
        return 1 if self.matrix.shape[0] == 2 else 2


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal joint-measurement vectors over an ordered qubit subset.

    A basis may span only part of the 2**k dimensional space when the
    states it is applied to are known to lie inside that span; measuring
    a state with weight outside raises :class:`IncompleteBasis`.
    """

    subset: tuple[int, ...]
    vectors: np.ndarray
    outcome_bits: tuple[str, ...]
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        subset = tuple(int(l) for l in self.subset)
        vecs = _frozen(np.atleast_2d(self.vectors))
        object.__setattr__(self, "subset", subset)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "outcome_bits", tuple(self.outcome_bits))
        k = len(subset)
        if len(set(subset)) != k:
            raise LabelCollision(f"duplicate labels in basis subset {subset}")
        if vecs.shape[1] != 2**k or vecs.shape[0] > 2**k or vecs.shape[0] == 0:
            raise ValueError(f"basis shape {vecs.shape} invalid for {k} qubits")
        if len(self.outcome_bits) != vecs.shape[0]:
            raise ValueError("one outcome bit-string per vector required")
        if len(set(self.outcome_bits)) != len(self.outcome_bits):
            raise ValueError("outcome bit-strings must be distinct")
        gram = vecs.conj() @ vecs.T
        if not np.allclose(gram, np.eye(len(vecs)), atol=ATOL):
            raise ValueError("basis vectors are not orthonormal")
        if self.names and len(self.names) != len(vecs):
            raise ValueError("one name per vector required")

    @property
    def is_complete(self) -> bool:
        return self.vectors.shape[0] == 2 ** len(self.subset)

    def gram(self) -> np.ndarray:
        return self.vectors.conj() @ self.vectors.T

    def index_of(self, bits: str) -> int:
        return self.outcome_bits.index(bits)

    def vector(self, bits: str) -> StateVector:
        return StateVector(self.vectors[self.index_of(bits)], self.subset)

    def on(self, labels: Sequence[int]) -> "MeasurementBasis":
        """The same basis applied to a different qubit subset."""
        return MeasurementBasis(tuple(labels), self.vectors, self.outcome_bits, self.names)


@dataclass(frozen=True)
class MeasurementRecord:
    outcome_index: int
    outcome_bits: str
    probability: float
    post_state: StateVector | None
    probabilities: tuple[float, ...] = ()


def tensor(a: StateVector, b: StateVector) -> StateVector:
    clash = set(a.labels) & set(b.labels)
    if clash:
        raise LabelCollision(f"labels {sorted(clash)} present in both states")
    return StateVector(np.kron(a.amplitudes, b.amplitudes), a.labels + b.labels)


def tensor_all(states: Iterable[StateVector]) -> StateVector:
    states = list(states)
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def _axes(state: StateVector, targets: Sequence[int]) -> list[int]:
    try:
        return [state.labels.index(t) for t in targets]
    except ValueError:
        missing = [t for t in targets if t not in state.labels]
        raise LabelNotFound(f"labels {missing} not in state {state.labels}") from None


def apply_gate(state: StateVector, gate: GateMatrix, targets: Sequence[int]) -> StateVector:
    targets = tuple(targets)
    if len(targets) != gate.arity:
        raise ArityMismatch(f"{gate.arity}-qubit gate given {len(targets)} targets")
    if len(set(targets)) != len(targets):
        raise LabelCollision(f"repeated gate targets {targets}")
    axes = _axes(state, targets)
    k = len(axes)
    t = np.moveaxis(state.tensor(), axes, range(k))
    shape = t.shape
    t = (gate.matrix @ t.reshape(2**k, -1)).reshape(shape)
    t = np.moveaxis(t, range(k), axes)
    return StateVector(t.reshape(-1), state.labels)


def permute_qubits(state: StateVector, new_label_order: Sequence[int]) -> StateVector:
    order = tuple(new_label_order)
    if sorted(order) != sorted(state.labels) or len(order) != len(state.labels):
        raise InvalidPermutation(f"{order} is not a permutation of {state.labels}")
    axes = [state.labels.index(l) for l in order]
    return StateVector(np.transpose(state.tensor(), axes).reshape(-1), order)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b> over the same labels; ``b`` is reordered to match ``a`` if needed."""
    if set(a.labels) != set(b.labels):
        raise LabelMismatch(f"{a.labels} vs {b.labels}")
    if a.labels != b.labels:
        b = permute_qubits(b, a.labels)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return float(min(1.0, abs(inner_product(a, b)) ** 2))


def project(state: StateVector, subset: Sequence[int]) -> tuple[np.ndarray, tuple[int, ...]]:
    """Amplitude matrix with the subset as rows and the rest as columns."""
    subset = tuple(subset)
    rest = tuple(l for l in state.labels if l not in subset)
    _axes(state, subset)
    ordered = permute_qubits(state, subset + rest)
    return ordered.amplitudes.reshape(2 ** len(subset), -1), rest


def measure_in_basis(state: StateVector, basis: MeasurementBasis, random_draw: float) -> MeasurementRecord:
    """Projective joint measurement; ``random_draw`` in [0, 1) picks the outcome."""
    if not 0.0 <= random_draw < 1.0:
        raise ValueError(f"random_draw {random_draw} outside [0, 1)")
    mat, rest = project(state, basis.subset)
    branches = basis.vectors.conj() @ mat
    probs = np.sum(np.abs(branches) ** 2, axis=1)
    total = probs.sum()
    if total < 1e-12:
        raise DegenerateMeasurement("every outcome has vanishing probability")
    if abs(total - 1.0) > ATOL:
        raise IncompleteBasis(f"outcome probabilities sum to {total:.12f}")
    cumulative = np.cumsum(probs)
    k = int(np.searchsorted(cumulative, random_draw * total, side="right"))
    k = min(k, len(probs) - 1)
    # Skip zero-probability outcomes that a draw on a bin edge can land on.
    while probs[k] < 1e-15 and k > 0:
        k -= 1
    post = None
    if rest:
        post = StateVector.from_unnormalized(branches[k], rest)
    return MeasurementRecord(
        outcome_index=k,
        outcome_bits=basis.outcome_bits[k],
        probability=float(probs[k]),
        post_state=post,
        probabilities=tuple(float(p) for p in probs),
    )


def outcome_probabilities(state: StateVector, basis: MeasurementBasis) -> np.ndarray:
    mat, _ = project(state, basis.subset)
    return np.sum(np.abs(basis.vectors.conj() @ mat) ** 2, axis=1)


def draw_for_outcome(probabilities: Sequence[float], k: int) -> float:
    """A random draw that makes ``measure_in_basis`` select outcome ``k``."""
    probs = np.asarray(probabilities, dtype=float)
    if probs[k] <= 0:
        raise ValueError(f"outcome {k} has zero probability")
    lo = probs[:k].sum()
    return float((lo + probs[k] / 2) / probs.sum())


def reduced_density(state: StateVector, keep: Sequence[int]) -> np.ndarray:
    mat, _ = project(state, keep)
    return mat @ mat.conj().T


# --- standard gates -------------------------------------------------------

I2 = GateMatrix(np.eye(2), "I")
X = GateMatrix(np.array([[0, 1], [1, 0]]), "X")
Z = GateMatrix(np.array([[1, 0], [0, -1]]), "Z")
IY = GateMatrix(np.array([[0, 1], [-1, 0]]), "iY")
H = GateMatrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2), "H")
CNOT = GateMatrix(
    np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]), "CNOT"
)


def computational_basis(labels: Sequence[int]) -> MeasurementBasis:
    return _computational_basis(tuple(labels))


@functools.lru_cache(maxsize=256)
def _computational_basis(labels: tuple[int, ...]) -> MeasurementBasis:
    k = len(labels)
    return MeasurementBasis(labels, np.eye(2**k), tuple(f"{i:0{k}b}" for i in range(2**k)))


class QubitPool:
    """Mutable holder for the independent states of one protocol channel.

    Each qubit label lives in exactly one group.  Operations spanning
    several groups merge them first; measured qubits leave the pool.
    """

    def __init__(self, states: Iterable[StateVector] = ()):
        self._groups: list[StateVector] = []
        for s in states:
            self.add(s)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(l for g in self._groups for l in g.labels)

    @property
    def groups(self) -> tuple[StateVector, ...]:
        return tuple(self._groups)

    def add(self, state: StateVector) -> None:
        clash = set(state.labels) & set(self.labels)
        if clash:
            raise LabelCollision(f"labels {sorted(clash)} already in pool")
        self._groups.append(state)

    def _gather(self, labels: Sequence[int]) -> StateVector:
        missing = set(labels) - set(self.labels)
        if missing:
            raise LabelNotFound(f"labels {sorted(missing)} not in pool")
        hit = [g for g in self._groups if set(g.labels) & set(labels)]
        self._groups = [g for g in self._groups if all(g is not h for h in hit)]
        merged = tensor_all(hit)
        self._groups.append(merged)
        return merged

    def _replace(self, old: StateVector, new: StateVector | None) -> None:
        self._groups = [g for g in self._groups if g is not old]
        if new is not None:
            self._groups.append(new)

    def apply(self, gate: GateMatrix, targets: Sequence[int]) -> None:
        g = self._gather(targets)
        self._replace(g, apply_gate(g, gate, targets))

    def measure(self, basis: MeasurementBasis, random_draw: float) -> MeasurementRecord:
        g = self._gather(basis.subset)
        rec = measure_in_basis(g, basis, random_draw)
        self._replace(g, rec.post_state)
        return rec

    def state(self, labels: Sequence[int]) -> StateVector:
        """Joint state of the groups touching ``labels`` (not reordered)."""
        return self._gather(labels)
