"""Retransmission protocols: XOR coding, state maps, and the trial engine."""

from .coding import CodedPacket, Packet, ReceiverState, try_decode, xor_combine
from .statemap import PacketState, PacketStateMap, select_combination
from .trial import (
    CODED_SCHEMES,
    ML_SCHEMES,
    BroadcastEvent,
    Scheme,
    SchemeConfig,
    TrialTrace,
    run_trial,
    trial_rng,
)

__all__ = [
    "Packet",
    "CodedPacket",
    "xor_combine",
    "ReceiverState",
    "try_decode",
    "PacketState",
    "PacketStateMap",
    "select_combination",
    "Scheme",
    "ML_SCHEMES",
    "CODED_SCHEMES",
    "SchemeConfig",
    "BroadcastEvent",
    "TrialTrace",
    "run_trial",
    "trial_rng",
]
