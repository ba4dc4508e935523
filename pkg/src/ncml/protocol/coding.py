"""XOR packet coding and receiver-side decoding.

A coded packet is the bitwise XOR of its constituents' payloads; receiving
one while missing exactly one constituent recovers that constituent.  Coded
packets that are not yet decodable are buffered and re-examined whenever new
data arrives, so chains of combinations resolve to a fixpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence, Union

__all__ = ["Packet", "CodedPacket", "xor_combine", "ReceiverState", "try_decode"]


@dataclass(frozen=True)
class Packet:
    """A plain data packet; all payloads in a trial share one length."""

    id: int
    payload: bytes

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError("packet id must be non-negative")
        if len(self.payload) == 0:
            raise ValueError("packet payload must be non-empty")


@dataclass(frozen=True)
class CodedPacket:
    """XOR of one or more data packets; a singleton constituent set is a
    plain retransmission."""

    constituents: frozenset[int]
    payload: bytes

    def __post_init__(self) -> None:
        if not self.constituents:
            raise ValueError("coded packet needs at least one constituent")


def _xor_bytes(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def xor_combine(parts: Sequence[Union[Packet, CodedPacket]]) -> CodedPacket:
    """Combine packets: constituent sets by symmetric difference, payloads by
    XOR.  Self-cancelling inputs (empty resulting set) are rejected."""
    if not parts:
        raise ValueError("cannot combine an empty packet list")
    length = len(parts[0].payload)
    constituents: frozenset[int] = frozenset()
    for part in parts:
        if len(part.payload) != length:
            raise ValueError("all payloads must share one length")
        ids = part.constituents if isinstance(part, CodedPacket) else frozenset((part.id,))
        constituents = constituents.symmetric_difference(ids)
    if not constituents:
        raise ValueError("combination cancels itself to the empty set")
    payload = reduce(_xor_bytes, (p.payload for p in parts))
    return CodedPacket(constituents, payload)


@dataclass
class ReceiverState:
    """What one receiver holds: decoded packets and undecodable coded ones.

    A coded packet sits in the buffer only while two or more of its
    constituents are missing.  Knowledge is monotone: nothing is ever
    removed from ``have``.
    """

    have: dict[int, bytes] = field(default_factory=dict)
    buffer: list[CodedPacket] = field(default_factory=list)

    def has_all(self, ids) -> bool:
        return all(i in self.have for i in ids)

    def receive_packet(self, packet: Packet) -> None:
        if packet.id not in self.have:
            self.have[packet.id] = packet.payload
            self._drain_buffer()

    def _drain_buffer(self) -> None:
        progressed = True
        while progressed:
            progressed = False
            keep: list[CodedPacket] = []
            for coded in self.buffer:
                missing = [i for i in coded.constituents if i not in self.have]
                if len(missing) == 1:
                    self.have[missing[0]] = self._peel(coded, missing[0])
                    progressed = True
                elif len(missing) > 1:
                    keep.append(coded)
                # fully known: drop
            self.buffer = keep

    def _peel(self, coded: CodedPacket, target: int) -> bytes:
        payload = coded.payload
        for i in coded.constituents:
            if i != target:
                payload = _xor_bytes(payload, self.have[i])
        return payload


def try_decode(rx: ReceiverState, coded: CodedPacket) -> ReceiverState:
    """Absorb one received coded packet.

    Exactly one missing constituent: peel the known ones off and keep the
    recovered packet, then re-scan the buffer to a fixpoint.  None missing:
    discard.  Two or more missing: buffer for later.
    """
    missing = [i for i in coded.constituents if i not in rx.have]
    if len(missing) == 1:
        rx.have[missing[0]] = rx._peel(coded, missing[0])
        rx._drain_buffer()
    elif len(missing) > 1:
        rx.buffer.append(coded)
    return rx
