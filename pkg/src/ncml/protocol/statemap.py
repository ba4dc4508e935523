"""The transmitter's packet state map and the coded-combination selector."""

from __future__ import annotations

from enum import Enum
from itertools import permutations
from typing import Iterable

__all__ = ["PacketState", "PacketStateMap", "select_combination"]


class PacketState(Enum):
    RECEIVED = "Received"
    LOST = "Lost"
    UNKNOWN = "Unknown"


class PacketStateMap:
    """Belief matrix over (receiver, packet) delivery states.

    RECEIVED is absorbing: once an entry is marked received, no operation
    demotes it.  UNKNOWN arises from erased feedback under the non-learning
    schemes and is treated as LOST wherever a retransmission decision is
    made.
    """

    __slots__ = ("receivers", "packets", "_states")

    def __init__(self, receivers: int, packets: int, fill: PacketState = PacketState.UNKNOWN):
        if receivers < 1 or packets < 1:
            raise ValueError("map needs at least one receiver and one packet")
        self.receivers = receivers
        self.packets = packets
        self._states = [[fill] * packets for _ in range(receivers)]

    @classmethod
    def with_lost(
        cls, receivers: int, packets: int, lost: Iterable[tuple[int, int]]
    ) -> "PacketStateMap":
        """A map that is RECEIVED everywhere except the given (r, m) entries."""
        smap = cls(receivers, packets, fill=PacketState.RECEIVED)
        for r, m in lost:
            smap._states[r][m] = PacketState.LOST
        return smap

    def state(self, receiver: int, packet: int) -> PacketState:
        return self._states[receiver][packet]

    def mark_received(self, receiver: int, packet: int) -> None:
        self._states[receiver][packet] = PacketState.RECEIVED

    def mark_lost(self, receiver: int, packet: int) -> None:
        # RECEIVED is absorbing; demotion attempts are ignored.
        if self._states[receiver][packet] is not PacketState.RECEIVED:
            self._states[receiver][packet] = PacketState.LOST

    def missing(self, receiver: int) -> list[int]:
        """Packets not known received for this receiver (UNKNOWN counts)."""
        row = self._states[receiver]
        return [m for m in range(self.packets) if row[m] is not PacketState.RECEIVED]

    def all_received(self) -> bool:
        return all(
            state is PacketState.RECEIVED for row in self._states for state in row
        )


def _greedy_pass(missing: list[set[int]], order: tuple[int, ...]) -> list[int]:
    """One greedy pass over the receivers in the given order.

    A receiver already missing one of the chosen constituents is covered and
    skipped.  Otherwise the receiver contributes the packet, among those it
    misses, that newly covers the most receivers, but only if every receiver
    served so far holds that packet, so the coded transmission stays
    decodable at every receiver it targets.  Coverage ties prefer the packet
    covering more single-loss receivers (they can only ever be served
    through that packet), then the lowest packet index.
    """
    receivers = range(len(missing))
    chosen: list[int] = []
    for r in order:
        miss_r = missing[r]
        if not miss_r:
            continue
        if any(c in miss_r for c in chosen):
            continue  # already covered by exactly one chosen constituent
        served = [
            t for t in receivers if sum(1 for c in chosen if c in missing[t]) == 1
        ]
        best_packet: int | None = None
        best_score = (0, 0)
        for m in sorted(miss_r):
            if any(m in missing[t] for t in served):
                continue  # would leave a served receiver missing two constituents
            newly_covered = [
                q
                for q in receivers
                if m in missing[q] and not any(c in missing[q] for c in chosen)
            ]
            score = (
                len(newly_covered),
                sum(1 for q in newly_covered if len(missing[q]) == 1),
            )
            if score > best_score:
                best_score = score
                best_packet = m
        if best_packet is not None:
            chosen.append(best_packet)
    return chosen


def _served_count(missing: list[set[int]], chosen: list[int]) -> int:
    return sum(1 for miss in missing if sum(1 for c in chosen if c in miss) == 1)


def select_combination(smap: PacketStateMap) -> tuple[int, ...]:
    """Pick an instantly decodable set of packets to XOR for retransmission.

    Runs the greedy pass restarted over receiver orderings (all of them up
    to five receivers, index order alone beyond that, where the factorial
    blows up) and keeps the restart serving the most receivers; ties keep
    the earliest ordering, so index order remains the baseline behavior.
    UNKNOWN entries count as lost.

    Every receiver the result serves misses exactly one constituent.
    """
    missing = [set(smap.missing(r)) for r in range(smap.receivers)]
    if not any(missing):
        raise ValueError("select_combination requires at least one lost entry")

    if smap.receivers <= 5:
        orders = permutations(range(smap.receivers))
    else:
        orders = iter([tuple(range(smap.receivers))])

    best: list[int] = []
    best_served = -1
    for order in orders:
        chosen = _greedy_pass(missing, order)
        served = _served_count(missing, chosen)
        if served > best_served:
            best_served = served
            best = chosen
    return tuple(sorted(best))
