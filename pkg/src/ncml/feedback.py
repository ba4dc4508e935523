"""Reverse-channel model: feedback observations, corruption, and labeling.

Every broadcast data packet triggers one ACK/NAK feedback per receiver.  The
feedback itself crosses a lossy link, so the transmitter sees one of three
decode outcomes: the payload decodes correctly, decodes to the wrong label
(flipped), or fails to decode at all (erased).  The physical-layer features
of the feedback signal (Table-style vector: distance, noise, terrain, snr,
rx, mod) are measured regardless of whether the payload decodes; that is
what makes classifier-driven retransmission possible.

Label harvesting keeps only correctly decoded feedback, so training labels
carry no noise by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, TextIO

from .channel import (
    AbstractChannel,
    ChannelMode,
    LinkBudget,
    LinkGeometry,
    Modulation,
    PhysicalChannel,
    ShadowingDraw,
    TerrainCategory,
    TerrainParams,
    packet_error_prob,
    sample_path_loss,
    snr_db,
)

__all__ = [
    "TrueState",
    "DecodeOutcome",
    "TransmitterView",
    "FEATURE_NAMES",
    "TRAINING_CSV_HEADER",
    "FeedbackFeatures",
    "FeedbackObservation",
    "LabeledExample",
    "FeedbackEnv",
    "generate_feedback",
    "transmitter_view",
    "harvest_labels",
    "example_to_csv_row",
    "example_from_csv_row",
    "write_examples_csv",
    "read_examples_csv",
]

DEFAULT_FLIP_FRACTION = 0.1


class TrueState(Enum):
    ACK = "ACK"
    NAK = "NAK"


class DecodeOutcome(Enum):
    CORRECT = "Correct"
    FLIPPED = "Flipped"
    ERASED = "Erased"


class TransmitterView(Enum):
    SAW_ACK = "SawACK"
    SAW_NAK = "SawNAK"
    SAW_NOTHING = "SawNothing"


# Canonical feature order; also the training CSV column order.
FEATURE_NAMES = ("distance", "noise", "terrain", "snr", "rx", "mod")
TRAINING_CSV_HEADER = "distance,noise,terrain,snr,rx,mod,label"


@dataclass(frozen=True)
class FeedbackFeatures:
    """Feedback-signal measurements available at the transmitter."""

    distance_m: float
    noise_dbm: float
    terrain: TerrainCategory
    snr_db: float
    rx_dbm: float
    modulation: Modulation

    def vector(self) -> tuple[float, ...]:
        """The canonical numeric feature vector (categoricals as small ints)."""
        return (
            self.distance_m,
            self.noise_dbm,
            float(int(self.terrain)),
            self.snr_db,
            self.rx_dbm,
            float(int(self.modulation)),
        )


@dataclass(frozen=True)
class FeedbackObservation:
    """One feedback event.

    ``true_state`` is the receiver's actual receipt status of the data
    packet, independent of whether the feedback payload survived the reverse
    link.  An erased observation still exposes its features.
    """

    features: FeedbackFeatures
    true_state: TrueState
    decode_outcome: DecodeOutcome


@dataclass(frozen=True)
class LabeledExample:
    """A training example; constructed only from correctly decoded feedback."""

    features: FeedbackFeatures
    label: TrueState


@dataclass(frozen=True)
class FeedbackEnv:
    """Reverse-link configuration the feedback features report: shared
    geometry and terrain plus the feedback packet's own link budget."""

    geometry: LinkGeometry
    terrain: TerrainParams
    budget: LinkBudget


def generate_feedback(
    data_received: bool,
    reverse_mode: ChannelMode,
    geometry: LinkGeometry,
    terrain: TerrainParams,
    budget: LinkBudget,
    rng,
    *,
    flip_fraction: float = DEFAULT_FLIP_FRACTION,
    draw: ShadowingDraw | None = None,
    link_success: bool | None = None,
) -> FeedbackObservation:
    """Send one ACK/NAK across the reverse link and observe it.

    The feedback payload fails with the reverse link's packet error
    probability; a failed payload is flipped with ``flip_fraction`` and
    erased otherwise.  Features come from the reverse-link signal: on a
    physical reverse link the snr/rx follow the sampled path loss (pass
    ``draw`` to reuse the forward shadowing, modeling reciprocity within one
    packet exchange); on an abstract link they are synthesized conditioned
    on the forward outcome (``link_success``, defaulting to
    ``data_received``).

    Draw budget: physical consumes one standard-normal triple (skipped when
    ``draw`` is given) plus 2 uniforms; abstract consumes 1 standard normal
    plus 2 uniforms.  The flip uniform is consumed even when unused.
    """
    if not 0.0 <= flip_fraction <= 1.0:
        raise ValueError("flip_fraction must lie in [0, 1]")

    if isinstance(reverse_mode, PhysicalChannel):
        if draw is None:
            draw = ShadowingDraw.sample(rng)
        loss = sample_path_loss(geometry, terrain, draw)
        snr = snr_db(budget, loss)
        rx = budget.tx_power_dbm - loss
        fail_p = packet_error_prob(snr, budget.modulation, budget.payload_bits)
    elif isinstance(reverse_mode, AbstractChannel):
        good = data_received if link_success is None else link_success
        mean = reverse_mode.snr_ack_db - (0.0 if good else reverse_mode.snr_gap_db)
        snr = mean + reverse_mode.snr_sigma_db * float(rng.standard_normal())
        rx = snr + budget.noise_floor_dbm
        fail_p = reverse_mode.error_p
    else:
        raise TypeError(f"unsupported reverse channel {type(reverse_mode).__name__}")

    decoded = rng.random() >= fail_p
    u_flip = rng.random()  # consumed unconditionally to keep the draw count fixed
    if decoded:
        outcome = DecodeOutcome.CORRECT
    elif u_flip < flip_fraction:
        outcome = DecodeOutcome.FLIPPED
    else:
        outcome = DecodeOutcome.ERASED

    features = FeedbackFeatures(
        distance_m=geometry.distance_m,
        noise_dbm=budget.noise_floor_dbm,
        terrain=terrain.category,
        snr_db=snr,
        rx_dbm=rx,
        modulation=budget.modulation,
    )
    state = TrueState.ACK if data_received else TrueState.NAK
    return FeedbackObservation(features, state, outcome)


_FLIP = {TrueState.ACK: TransmitterView.SAW_NAK, TrueState.NAK: TransmitterView.SAW_ACK}
_PASS = {TrueState.ACK: TransmitterView.SAW_ACK, TrueState.NAK: TransmitterView.SAW_NAK}


def transmitter_view(observation: FeedbackObservation) -> TransmitterView:
    """What the transmitter concludes from a raw feedback decode attempt."""
    if observation.decode_outcome is DecodeOutcome.CORRECT:
        return _PASS[observation.true_state]
    if observation.decode_outcome is DecodeOutcome.FLIPPED:
        return _FLIP[observation.true_state]
    return TransmitterView.SAW_NOTHING


def harvest_labels(observations: Iterable[FeedbackObservation]) -> list[LabeledExample]:
    """Keep exactly the correctly decoded observations, preserving order."""
    return [
        LabeledExample(obs.features, obs.true_state)
        for obs in observations
        if obs.decode_outcome is DecodeOutcome.CORRECT
    ]


def example_to_csv_row(example: LabeledExample) -> str:
    f = example.features
    return ",".join(
        (
            repr(f.distance_m),
            repr(f.noise_dbm),
            str(int(f.terrain)),
            repr(f.snr_db),
            repr(f.rx_dbm),
            str(int(f.modulation)),
            example.label.value,
        )
    )


def example_from_csv_row(row: str) -> LabeledExample:
    parts = row.strip().split(",")
    if len(parts) != 7:
        raise ValueError(f"expected 7 columns, got {len(parts)}: {row!r}")
    features = FeedbackFeatures(
        distance_m=float(parts[0]),
        noise_dbm=float(parts[1]),
        terrain=TerrainCategory(int(parts[2])),
        snr_db=float(parts[3]),
        rx_dbm=float(parts[4]),
        modulation=Modulation(int(parts[5])),
    )
    return LabeledExample(features, TrueState(parts[6]))


def write_examples_csv(examples: Sequence[LabeledExample], stream: TextIO) -> None:
    stream.write(TRAINING_CSV_HEADER + "\n")
    for example in examples:
        stream.write(example_to_csv_row(example) + "\n")


def read_examples_csv(stream: TextIO) -> list[LabeledExample]:
    lines = [line for line in (raw.strip() for raw in stream) if line]
    if not lines:
        return []
    if lines[0] != TRAINING_CSV_HEADER:
        raise ValueError(f"bad training CSV header: {lines[0]!r}")
    return [example_from_csv_row(line) for line in lines[1:]]
