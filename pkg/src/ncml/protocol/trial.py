"""The four retransmission schemes as a single trial state machine.

ARQ broadcasts each packet until every receiver is believed served, reading
raw feedback decodes (an erased or flipped feedback keeps the packet
pending, which is exactly the duplicate-retransmission pathology).  ARQ-ML
makes the same per-packet decision from the classifier's prediction on the
feedback features instead.  NC splits a phase of M packets into a
transmission pass and a coded retransmission pass driven by the packet
state map; NC-ML fills that map with classifier predictions in both passes.

Belief-driven loops can terminate while a receiver still misses data (a
flipped or misclassified ACK).  Receivers therefore keep announcing missing
packets through the same lossy feedback pipeline, and the transmitter runs
repair rounds until every receiver truly holds all packets.  Feedback
signals are free; only data broadcasts count toward n.

Determinism: every broadcast consumes, per receiver in index order, one
fixed draw block (physical forward: one standard-normal triple plus one
uniform; abstract forward: one uniform; scripted: none) followed by the
feedback block documented in generate_feedback.  Trials replay bit-exactly
from a seed, and two schemes run from the same seed see the identical
channel trace for as long as their broadcast sequences align.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from ..channel import (
    AbstractChannel,
    ChannelMode,
    LinkBudget,
    LinkGeometry,
    LinkModel,
    Modulation,
    PhysicalChannel,
    ScriptedChannel,
    ShadowingDraw,
    terrain_preset,
)
from ..feedback import (
    DEFAULT_FLIP_FRACTION,
    FeedbackEnv,
    FeedbackObservation,
    TransmitterView,
    generate_feedback,
    transmitter_view,
)
from ..learn.dataset import ACK_LABEL
from ..learn.models import ClassifierModel
from ..metrics import TrialRecord
from .coding import CodedPacket, Packet, ReceiverState, try_decode, xor_combine
from .statemap import PacketState, PacketStateMap, select_combination

__all__ = [
    "Scheme",
    "ML_SCHEMES",
    "CODED_SCHEMES",
    "SchemeConfig",
    "BroadcastEvent",
    "TrialTrace",
    "run_trial",
    "trial_rng",
]


class Scheme(Enum):
    ARQ = "ARQ"
    ARQ_ML = "ARQ-ML"
    NC = "NC"
    NC_ML = "NC-ML"


ML_SCHEMES = frozenset((Scheme.ARQ_ML, Scheme.NC_ML))
CODED_SCHEMES = frozenset((Scheme.NC, Scheme.NC_ML))


@dataclass
class SchemeConfig:
    """Which scheme to run and the phase dimensions."""

    scheme: Scheme
    phase_size_m: int = 32
    receivers_k: int = 2
    classifier: ClassifierModel | None = None
    payload_bytes: int = 128
    max_transmissions: int = 10_000

    def __post_init__(self) -> None:
        if self.receivers_k < 1 or self.phase_size_m < 1:
            raise ValueError("need at least one receiver and one packet")
        if self.payload_bytes < 1:
            raise ValueError("payload_bytes must be positive")
        if self.scheme in ML_SCHEMES and self.classifier is None:
            raise ValueError(f"{self.scheme.value} requires a trained classifier")


@dataclass(frozen=True)
class BroadcastEvent:
    """One broadcast as the trace records it."""

    constituents: tuple[int, ...]
    coded: bool
    forward_ok: tuple[bool, ...]
    outcomes: tuple[str, ...]


@dataclass
class TrialTrace:
    broadcasts: list[BroadcastEvent] = field(default_factory=list)


class _Abort(Exception):
    """Raised when the per-trial transmission cap trips."""


def trial_rng(base_seed: int, *indices: int) -> np.random.Generator:
    """The per-trial generator: a pure function of (base_seed, indices)."""
    return np.random.default_rng(np.random.SeedSequence((base_seed, *indices)))


def _default_env(fwd: ChannelMode, rev: ChannelMode) -> FeedbackEnv:
    if isinstance(rev, PhysicalChannel):
        return FeedbackEnv(rev.geometry, rev.terrain, rev.budget)
    if isinstance(fwd, PhysicalChannel):
        b = fwd.budget
        return FeedbackEnv(
            fwd.geometry,
            fwd.terrain,
            LinkBudget(b.tx_power_dbm, b.noise_floor_dbm, b.modulation, 64),
        )
    return FeedbackEnv(
        LinkGeometry(400.0),
        terrain_preset(1),
        LinkBudget(20.0, -103.0, Modulation.BPSK, 64),
    )


class _Trial:
    def __init__(
        self,
        cfg: SchemeConfig,
        forward: Sequence[ChannelMode],
        reverse: Sequence[ChannelMode],
        rng,
        envs: Sequence[FeedbackEnv],
        flip_fraction: float,
        trace: TrialTrace | None,
    ):
        self.cfg = cfg
        self.k = cfg.receivers_k
        self.m = cfg.phase_size_m
        self.forward = list(forward)
        self.reverse = list(reverse)
        self.rng = rng
        self.envs = list(envs)
        self.flip_fraction = flip_fraction
        self.trace = trace
        self.ml = cfg.scheme in ML_SCHEMES
        self.classifier = cfg.classifier

        blob = rng.bytes(self.m * cfg.payload_bytes)
        self.packets = [
            Packet(i, blob[i * cfg.payload_bytes : (i + 1) * cfg.payload_bytes])
            for i in range(self.m)
        ]
        self.receivers = [ReceiverState() for _ in range(self.k)]
        self.fwd_links = [
            LinkModel(mode.terrain, mode.geometry, mode.budget)
            if isinstance(mode, PhysicalChannel)
            else None
            for mode in self.forward
        ]
        self.n = 0
        self.poll_rounds = 0
        self.first_sent: set[int] = set()

    # -- channel plumbing ---------------------------------------------------

    def _broadcast(self, content: Packet | CodedPacket) -> list[FeedbackObservation]:
        if self.n >= self.cfg.max_transmissions:
            raise _Abort
        self.n += 1
        plain = isinstance(content, Packet)
        if plain:
            constituents: tuple[int, ...] = (content.id,)
            first_tx = content.id not in self.first_sent
            if first_tx:
                self.first_sent.add(content.id)
        else:
            constituents = tuple(sorted(content.constituents))
            first_tx = False

        rng = self.rng
        observations: list[FeedbackObservation] = []
        fwd_flags: list[bool] = []
        for r in range(self.k):
            mode = self.forward[r]
            draw: ShadowingDraw | None = None
            if isinstance(mode, PhysicalChannel):
                draw = ShadowingDraw.sample(rng)
                ok = rng.random() >= self.fwd_links[r].error_prob(draw)
            elif isinstance(mode, AbstractChannel):
                ok = rng.random() >= mode.error_p
            elif isinstance(mode, ScriptedChannel):
                ok = mode.succeeds(content.id) if (plain and first_tx) else True
            else:
                raise TypeError(f"unsupported forward channel {type(mode).__name__}")

            receiver = self.receivers[r]
            if ok:
                if plain:
                    receiver.receive_packet(content)
                else:
                    try_decode(receiver, content)
            data_received = receiver.has_all(constituents)

            env = self.envs[r]
            reverse = self.reverse[r]
            observations.append(
                generate_feedback(
                    data_received,
                    reverse,
                    env.geometry,
                    env.terrain,
                    env.budget,
                    rng,
                    flip_fraction=self.flip_fraction,
                    draw=draw if isinstance(reverse, PhysicalChannel) else None,
                    link_success=ok,
                )
            )
            fwd_flags.append(ok)

        if self.trace is not None:
            self.trace.broadcasts.append(
                BroadcastEvent(
                    constituents,
                    not plain,
                    tuple(fwd_flags),
                    tuple(o.decode_outcome.value for o in observations),
                )
            )
        return observations

    def _poll(self, receiver: int) -> FeedbackObservation:
        """An unsolicited NAK for a missing packet; data transmissions are
        not spent, so this does not advance n."""
        env = self.envs[receiver]
        return generate_feedback(
            False,
            self.reverse[receiver],
            env.geometry,
            env.terrain,
            env.budget,
            self.rng,
            flip_fraction=self.flip_fraction,
            link_success=False,
        )

    # -- transmitter decisions ----------------------------------------------

    def _believes_ack(self, obs: FeedbackObservation) -> bool:
        if self.ml:
            return self.classifier.predict_label(obs.features.vector()) == ACK_LABEL
        return transmitter_view(obs) is TransmitterView.SAW_ACK

    # -- scheme bodies --------------------------------------------------------

    def _arq_deliver(self, packet_targets: Sequence[tuple[int, Sequence[int]]]) -> None:
        for m, targets in packet_targets:
            pending = set(targets)
            while pending:
                observations = self._broadcast(self.packets[m])
                for r in sorted(pending):
                    if self._believes_ack(observations[r]):
                        pending.discard(r)

    def _nc_transmission_phase(self) -> PacketStateMap:
        smap = PacketStateMap(self.k, self.m)
        for m in range(self.m):
            observations = self._broadcast(self.packets[m])
            for r in range(self.k):
                if self.ml:
                    if self._believes_ack(observations[r]):
                        smap.mark_received(r, m)
                    else:
                        smap.mark_lost(r, m)
                else:
                    view = transmitter_view(observations[r])
                    if view is TransmitterView.SAW_ACK:
                        smap.mark_received(r, m)
                    elif view is TransmitterView.SAW_NAK:
                        smap.mark_lost(r, m)
                    # SawNothing leaves the entry UNKNOWN (treated lost later)
        return smap

    def _nc_retransmission_phase(self, smap: PacketStateMap) -> None:
        while not smap.all_received():
            constituents = select_combination(smap)
            coded = xor_combine([self.packets[c] for c in constituents])
            observations = self._broadcast(coded)
            for r in range(self.k):
                if self.ml:
                    if self._believes_ack(observations[r]):
                        for c in constituents:
                            smap.mark_received(r, c)
                    else:
                        for c in constituents:
                            smap.mark_lost(r, c)
                else:
                    view = transmitter_view(observations[r])
                    if view is TransmitterView.SAW_ACK:
                        for c in constituents:
                            smap.mark_received(r, c)
                    elif view is TransmitterView.SAW_NAK:
                        for c in constituents:
                            smap.mark_lost(r, c)

    # -- repair ----------------------------------------------------------------

    def _truly_missing(self) -> list[tuple[int, int]]:
        return [
            (r, m)
            for r in range(self.k)
            for m in range(self.m)
            if m not in self.receivers[r].have
        ]

    def _repair_until_complete(self) -> None:
        while True:
            missing = self._truly_missing()
            if not missing:
                return
            self.poll_rounds += 1
            if self.poll_rounds > self.cfg.max_transmissions:
                raise _Abort
            heard: list[tuple[int, int]] = []
            for r, m in missing:
                obs = self._poll(r)
                if self.ml:
                    if not self._believes_ack(obs):
                        heard.append((r, m))
                else:
                    if transmitter_view(obs) is not TransmitterView.SAW_ACK:
                        heard.append((r, m))
            if not heard:
                continue
            if self.cfg.scheme in CODED_SCHEMES:
                smap = PacketStateMap.with_lost(self.k, self.m, heard)
                self._nc_retransmission_phase(smap)
            else:
                by_packet: dict[int, list[int]] = {}
                for r, m in heard:
                    by_packet.setdefault(m, []).append(r)
                self._arq_deliver(sorted(by_packet.items()))

    # -- entry -------------------------------------------------------------------

    def run(self, seed: int, scenario: str) -> TrialRecord:
        aborted = False
        try:
            if self.cfg.scheme in CODED_SCHEMES:
                smap = self._nc_transmission_phase()
                if not smap.all_received():
                    self._nc_retransmission_phase(smap)
            else:
                self._arq_deliver([(m, range(self.k)) for m in range(self.m)])
            self._repair_until_complete()
        except _Abort:
            aborted = True
        if not aborted:
            for receiver in self.receivers:
                for packet in self.packets:
                    if receiver.have.get(packet.id) != packet.payload:
                        raise AssertionError(
                            f"trial ended with a corrupted or missing packet {packet.id}"
                        )
        return TrialRecord(
            scheme=self.cfg.scheme.value,
            seed=seed,
            receivers_k=self.k,
            packets_m=self.m,
            transmissions_n=self.n,
            aborted=aborted,
            scenario=scenario,
        )


def run_trial(
    cfg: SchemeConfig,
    forward: Sequence[ChannelMode],
    reverse: Sequence[ChannelMode],
    rng,
    *,
    feedback_envs: Sequence[FeedbackEnv] | None = None,
    flip_fraction: float = DEFAULT_FLIP_FRACTION,
    seed: int = -1,
    scenario: str = "",
    trace: TrialTrace | None = None,
) -> TrialRecord:
    """Simulate one trial until every receiver holds all M packets.

    ``forward`` and ``reverse`` give one channel mode per receiver.  The
    optional ``feedback_envs`` supply the reverse-link configuration the
    feedback features report; by default they derive from the physical
    channel modes (with a 64-bit feedback budget) or fall back to a nominal
    environment for fully abstract runs.

    A trial whose transmission count reaches ``cfg.max_transmissions`` is
    returned with ``aborted=True``; completed trials have verified every
    delivered payload against the original packets.
    """
    if len(forward) != cfg.receivers_k or len(reverse) != cfg.receivers_k:
        raise ValueError("need one forward and one reverse channel mode per receiver")
    if feedback_envs is None:
        envs = [_default_env(f, b) for f, b in zip(forward, reverse)]
    else:
        if len(feedback_envs) != cfg.receivers_k:
            raise ValueError("need one feedback env per receiver")
        envs = list(feedback_envs)
    trial = _Trial(cfg, forward, reverse, rng, envs, flip_fraction, trace)
    return trial.run(seed, scenario)
