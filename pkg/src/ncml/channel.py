"""Link-level models for the broadcast simulator.

Two channel families are supported.  The physical channel uses the Erceg
suburban path-loss model (terrain-dependent exponents plus lognormal
shadowing) together with AWGN bit-error curves to turn geometry, transmit
power and modulation into per-packet loss probabilities.  The abstract
channel replaces all of that with a bare fixed error probability, which is
what parameter sweeps over raw loss rates need.

All randomness flows through an explicit ``numpy.random.Generator``.  Each
operation consumes a fixed, documented number of draws so that simulation
trials replay deterministically from a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Union

__all__ = [
    "TerrainCategory",
    "Modulation",
    "TerrainParams",
    "TERRAIN_PRESETS",
    "terrain_preset",
    "LinkGeometry",
    "ShadowingDraw",
    "LinkBudget",
    "PhysicalChannel",
    "AbstractChannel",
    "ScriptedChannel",
    "ChannelMode",
    "ForwardEvent",
    "free_space_ref_loss",
    "median_path_loss",
    "sample_path_loss",
    "snr_db",
    "bit_error_rate",
    "packet_error_prob",
    "forward_event",
    "forward_success",
    "LinkModel",
]


class TerrainCategory(IntEnum):
    """Erceg suburban terrain categories, ordered from most to least lossy."""

    HILLY_HEAVY_TREES = 1
    HILLY_LIGHT_OR_FLAT_HEAVY = 2
    FLAT_LIGHT_TREES = 3


class Modulation(IntEnum):
    """Supported modulations; the integer value is bits per symbol and also
    serves as the categorical encoding fed to the learners."""

    BPSK = 1
    QPSK = 2
    QAM16 = 4


@dataclass(frozen=True)
class TerrainParams:
    """The six data-derived constants of one terrain category.

    ``a``, ``b_per_m``, ``c_m`` shape the median path-loss exponent
    ``a - b*hb + c/hb``; ``sigma_gamma`` scales the per-location exponent
    variation and ``mu_sigma_db`` / ``sigma_sigma_db`` parameterize the
    lognormal shadowing spread.
    """

    a: float
    b_per_m: float
    c_m: float
    sigma_gamma: float
    mu_sigma_db: float
    sigma_sigma_db: float
    category: TerrainCategory

    def __post_init__(self) -> None:
        for name in ("a", "b_per_m", "c_m", "sigma_gamma", "mu_sigma_db", "sigma_sigma_db"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"terrain parameter {name} must be strictly positive")


TERRAIN_PRESETS: dict[TerrainCategory, TerrainParams] = {
    TerrainCategory.HILLY_HEAVY_TREES: TerrainParams(
        a=4.6, b_per_m=0.0075, c_m=12.6, sigma_gamma=0.57,
        mu_sigma_db=10.6, sigma_sigma_db=2.3,
        category=TerrainCategory.HILLY_HEAVY_TREES,
    ),
    TerrainCategory.HILLY_LIGHT_OR_FLAT_HEAVY: TerrainParams(
        a=4.0, b_per_m=0.0065, c_m=17.1, sigma_gamma=0.75,
        mu_sigma_db=9.6, sigma_sigma_db=3.0,
        category=TerrainCategory.HILLY_LIGHT_OR_FLAT_HEAVY,
    ),
    TerrainCategory.FLAT_LIGHT_TREES: TerrainParams(
        a=3.6, b_per_m=0.005, c_m=20.0, sigma_gamma=0.59,
        mu_sigma_db=8.2, sigma_sigma_db=1.6,
        category=TerrainCategory.FLAT_LIGHT_TREES,
    ),
}


def terrain_preset(category: TerrainCategory | int) -> TerrainParams:
    """Return the built-in constants for a terrain category (1, 2 or 3)."""
    return TERRAIN_PRESETS[TerrainCategory(category)]


@dataclass(frozen=True)
class LinkGeometry:
    """Transmitter/receiver geometry for the suburban path-loss model."""

    distance_m: float
    reference_m: float = 100.0
    wavelength_m: float = 0.1581
    antenna_height_m: float = 30.0

    def __post_init__(self) -> None:
        if self.reference_m <= 0.0:
            raise ValueError("reference distance must be positive")
        if self.distance_m < self.reference_m:
            raise ValueError(
                f"distance {self.distance_m} m below reference {self.reference_m} m; "
                "the model is not valid there"
            )
        if self.wavelength_m <= 0.0:
            raise ValueError("wavelength must be positive")
        if not 10.0 <= self.antenna_height_m <= 80.0:
            raise ValueError("antenna height must lie in [10, 80] m")


@dataclass(frozen=True)
class ShadowingDraw:
    """One triple of independent N(0, 1) variates driving the random part of
    the path loss.  The all-zero draw reduces the sampled loss to its median."""

    x: float
    y: float
    z: float

    @classmethod
    def sample(cls, rng) -> "ShadowingDraw":
        # Consumes one standard_normal(3) call.
        x, y, z = rng.standard_normal(3)
        return cls(float(x), float(y), float(z))


ZERO_SHADOWING = ShadowingDraw(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power, receiver noise floor, modulation and packet size."""

    tx_power_dbm: float
    noise_floor_dbm: float
    modulation: Modulation
    payload_bits: int

    def __post_init__(self) -> None:
        if self.payload_bits < 1:
            raise ValueError("payload_bits must be at least 1")


@dataclass(frozen=True)
class PhysicalChannel:
    """A link governed by the suburban path-loss model."""

    terrain: TerrainParams
    geometry: LinkGeometry
    budget: LinkBudget


@dataclass(frozen=True)
class AbstractChannel:
    """A link with a flat per-packet error probability.

    When an abstract channel plays the reverse (feedback) role, the feedback
    signal strength reported to the transmitter is synthesized from a
    two-component Gaussian: ``snr_ack_db`` when the associated forward
    exchange succeeded, ``snr_ack_db - snr_gap_db`` when it failed, with
    ``snr_sigma_db`` spread.  This stands in for channel reciprocity, so the
    feedback features stay informative about the data packet's fate.
    """

    error_p: float
    snr_ack_db: float = 15.0
    snr_gap_db: float = 12.0
    snr_sigma_db: float = 3.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.error_p < 1.0:
            raise ValueError("abstract error probability must lie in [0, 1)")
        if self.snr_sigma_db <= 0.0:
            raise ValueError("snr_sigma_db must be positive")


@dataclass(frozen=True)
class ScriptedChannel:
    """A forward link that follows a fixed loss script.

    ``first_tx_ok[m]`` decides the fate of the first transmission of data
    packet ``m``; every retransmission and every coded packet succeeds.
    Used for hand-traceable protocol oracles, not for statistics.
    """

    first_tx_ok: tuple[bool, ...]

    def succeeds(self, packet_id: int) -> bool:
        if 0 <= packet_id < len(self.first_tx_ok):
            return self.first_tx_ok[packet_id]
        return True


ChannelMode = Union[PhysicalChannel, AbstractChannel, ScriptedChannel]


def free_space_ref_loss(reference_m: float, wavelength_m: float) -> float:
    """Fixed free-space loss at the reference distance: 20*log10(4*pi*d0/lambda) dB."""
    if reference_m <= 0.0 or wavelength_m <= 0.0:
        raise ValueError("reference distance and wavelength must be positive")
    return 20.0 * math.log10(4.0 * math.pi * reference_m / wavelength_m)


def median_path_loss(geometry: LinkGeometry, terrain: TerrainParams) -> float:
    """Median suburban path loss in dB.

    A + 10*(a - b*hb + c/hb)*log10(d/d0), with A the free-space loss at the
    reference distance.  Strictly increasing in d for every preset terrain.
    """
    hb = geometry.antenna_height_m
    exponent = terrain.a - terrain.b_per_m * hb + terrain.c_m / hb
    ref = free_space_ref_loss(geometry.reference_m, geometry.wavelength_m)
    return ref + 10.0 * exponent * math.log10(geometry.distance_m / geometry.reference_m)


def sample_path_loss(
    geometry: LinkGeometry, terrain: TerrainParams, draw: ShadowingDraw
) -> float:
    """One realization of the path loss: median plus zero-mean variation.

    Adds 10*x*sigma_gamma*log10(d/d0) + y*mu_sigma + y*z*sigma_sigma dB, each
    term zero-mean over the N(0,1) draw triple.
    """
    log_ratio = math.log10(geometry.distance_m / geometry.reference_m)
    return (
        median_path_loss(geometry, terrain)
        + 10.0 * draw.x * terrain.sigma_gamma * log_ratio
        + draw.y * terrain.mu_sigma_db
        + draw.y * draw.z * terrain.sigma_sigma_db
    )


def snr_db(budget: LinkBudget, path_loss_db: float) -> float:
    """Received SNR in dB: (tx - path_loss) - noise_floor."""
    return budget.tx_power_dbm - path_loss_db - budget.noise_floor_dbm


def _q_function(x: float) -> float:
    """Gaussian tail probability Q(x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def bit_error_rate(snr_value_db: float, modulation: Modulation) -> float:
    """Uncoded AWGN bit error rate for the given modulation.

    gamma is the linear SNR per bit: BPSK uses Q(sqrt(2*gamma)), QPSK the
    Gray-mapped per-bit Q(sqrt(gamma)), and 16-QAM the (3/8)*erfc(sqrt(gamma/10))
    approximation.
    """
    gamma = 10.0 ** (snr_value_db / 10.0)
    if modulation is Modulation.BPSK:
        return _q_function(math.sqrt(2.0 * gamma))
    if modulation is Modulation.QPSK:
        return _q_function(math.sqrt(gamma))
    if modulation is Modulation.QAM16:
        return 0.375 * math.erfc(math.sqrt(gamma / 10.0))
    raise ValueError(f"unknown modulation {modulation!r}")


def packet_error_prob(
    snr_value_db: float, modulation: Modulation, payload_bits: int
) -> float:
    """Probability that at least one of ``payload_bits`` independent bits errs.

    1 - (1 - BER)^bits, computed via expm1/log1p for small-BER precision and
    clamped to [0, 1].
    """
    if payload_bits < 1:
        raise ValueError("payload_bits must be at least 1")
    ber = bit_error_rate(snr_value_db, modulation)
    if ber <= 0.0:
        return 0.0
    if ber >= 1.0:
        return 1.0
    per = -math.expm1(payload_bits * math.log1p(-ber))
    return min(1.0, max(0.0, per))


@dataclass(frozen=True)
class ForwardEvent:
    """Outcome of one forward transmission attempt over a link."""

    success: bool
    draw: ShadowingDraw | None


def forward_event(mode: ChannelMode, rng) -> ForwardEvent:
    """Attempt one forward transmission; returns success and, for physical
    links, the shadowing draw so the matching feedback can reuse it.

    Draw budget: abstract consumes 1 uniform; physical consumes one
    standard-normal triple plus 1 uniform.  Scripted channels carry no
    per-attempt randomness and are resolved by the trial loop instead.
    """
    if isinstance(mode, AbstractChannel):
        return ForwardEvent(rng.random() >= mode.error_p, None)
    if isinstance(mode, PhysicalChannel):
        draw = ShadowingDraw.sample(rng)
        loss = sample_path_loss(mode.geometry, mode.terrain, draw)
        per = packet_error_prob(
            snr_db(mode.budget, loss), mode.budget.modulation, mode.budget.payload_bits
        )
        return ForwardEvent(rng.random() >= per, draw)
    raise TypeError(f"forward_event does not support {type(mode).__name__}")


def forward_success(mode: ChannelMode, rng) -> bool:
    """Bernoulli success of one forward transmission (see forward_event)."""
    return forward_event(mode, rng).success


class LinkModel:
    """Precomputed per-link constants for fast repeated sampling.

    Algebraically identical to composing median_path_loss/sample_path_loss,
    snr_db and packet_error_prob; trial loops evaluate it millions of times.
    """

    __slots__ = ("median_db", "x_coeff", "y_coeff", "yz_coeff", "budget")

    def __init__(self, terrain: TerrainParams, geometry: LinkGeometry, budget: LinkBudget):
        log_ratio = math.log10(geometry.distance_m / geometry.reference_m)
        self.median_db = median_path_loss(geometry, terrain)
        self.x_coeff = 10.0 * terrain.sigma_gamma * log_ratio
        self.y_coeff = terrain.mu_sigma_db
        self.yz_coeff = terrain.sigma_sigma_db
        self.budget = budget

    def path_loss(self, draw: ShadowingDraw) -> float:
        return (
            self.median_db
            + self.x_coeff * draw.x
            + self.y_coeff * draw.y
            + self.yz_coeff * draw.y * draw.z
        )

    def snr(self, draw: ShadowingDraw) -> float:
        return snr_db(self.budget, self.path_loss(draw))

    def error_prob(self, draw: ShadowingDraw) -> float:
        return packet_error_prob(
            self.snr(draw), self.budget.modulation, self.budget.payload_bits
        )
