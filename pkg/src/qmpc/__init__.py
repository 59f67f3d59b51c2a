"""Simulator for quantum one-time-pad based oblivious linear evaluation and
multiparty private set intersection."""

from .channel import AdversaryModel, DecoyRecord, QuantumMessage
from .errors import ConfigurationError, ModulusMismatchError, ProtocolError, SessionAborted
from .mpsi import MpsiAborted, MpsiPublicParams, MpsiResult, PartyInput, run_mpsi
from .ole import OleFunction, OleSessionConfig, OleTranscript, run_ole
from .qotp import PauliKey, keygen, qotp_decrypt, qotp_encrypt
from .qubit import Basis, QubitState
from .ring import Modulus, Polynomial, ZpElement
from .rng import SeededRng

__version__ = "0.1.0"
