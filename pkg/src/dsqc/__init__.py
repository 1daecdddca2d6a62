"""State-vector simulation of deterministic secure quantum communication
by teleportation over GHZ-like and five-qubit Brown channels."""

from .efficiency import ProtocolCosts, cabello_efficiency, efficiency_with_decoys
from .protocol import DEFAULT_SEED, MessageBits, ProtocolConfig, SessionTranscript, run_session
from .quantum import MeasurementBasis, QubitPool, StateVector, fidelity
from .states import Variant
from .teleportation import Scheme, teleport

__all__ = [
    "DEFAULT_SEED",
    "MeasurementBasis",
    "MessageBits",
    "ProtocolConfig",
    "ProtocolCosts",
    "QubitPool",
    "Scheme",
    "SessionTranscript",
    "StateVector",
    "Variant",
    "cabello_efficiency",
    "efficiency_with_decoys",
    "fidelity",
    "run_session",
    "teleport",
]
__version__ = "0.1.0"
