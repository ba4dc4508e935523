"""Scenario configuration: a flat key=value file and builders for the
channel modes, feedback environments and scheme configs it describes."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Sequence

from ..channel import (
    AbstractChannel,
    ChannelMode,
    LinkBudget,
    LinkGeometry,
    Modulation,
    PhysicalChannel,
    ScriptedChannel,
    TerrainCategory,
    terrain_preset,
)
from ..feedback import FeedbackEnv
from ..learn.models import ClassifierModel, ModelFamily
from ..protocol.trial import Scheme, SchemeConfig

__all__ = [
    "ScenarioConfig",
    "ConfigError",
    "parse_config",
    "load_config",
    "dump_config",
    "save_config",
    "build_forward_modes",
    "build_reverse_modes",
    "build_feedback_envs",
    "build_scheme_config",
    "with_updates",
]

CHANNEL_MODES = ("physical", "abstract", "scripted")


class ConfigError(ValueError):
    """A malformed scenario configuration; the message names the field."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one experiment needs, serializable to key=value text."""

    terrain: int = 1
    distances_m: tuple[float, ...] = (400.0, 400.0)
    tx_power_dbm: float = 20.0
    feedback_tx_power_dbm: float = 20.0
    noise_floor_dbm: float = -103.0
    modulation: str = "BPSK"
    receivers_k: int = 2
    packets_m: int = 32
    channel_mode: str = "physical"
    forward_error_p: float = 0.1
    reverse_error_p: float = 0.1
    flip_fraction: float = 0.1
    data_payload_bits: int = 1024
    feedback_payload_bits: int = 64
    reference_d0_m: float = 100.0
    wavelength_m: float = 0.1581
    antenna_height_m: float = 30.0
    snr_ack_db: float = 15.0
    snr_gap_db: float = 12.0
    snr_sigma_db: float = 3.0
    forward_script: str = ""
    base_seed: int = 1
    trials_n: int = 2000
    training_size: int = 4000
    train_fraction: float = 0.8
    families: tuple[str, ...] = tuple(f.value for f in ModelFamily)
    scheme: str = "NC"

    def validate(self) -> None:
        if self.terrain not in (1, 2, 3):
            raise ConfigError("terrain: must be 1, 2 or 3")
        if self.receivers_k < 1:
            raise ConfigError("receivers_k: must be at least 1")
        if len(self.distances_m) != self.receivers_k:
            raise ConfigError(
                f"distances_m: expected {self.receivers_k} values, got {len(self.distances_m)}"
            )
        if self.channel_mode not in CHANNEL_MODES:
            raise ConfigError(f"channel_mode: must be one of {CHANNEL_MODES}")
        if self.reference_d0_m <= 0:
            raise ConfigError("reference_d0_m: must be positive")
        if self.wavelength_m <= 0:
            raise ConfigError("wavelength_m: must be positive")
        if not 10.0 <= self.antenna_height_m <= 80.0:
            raise ConfigError("antenna_height_m: must lie in [10, 80] m")
        if any(d <= 0 for d in self.distances_m):
            raise ConfigError("distances_m: distances must be positive")
        if self.channel_mode == "physical":
            if any(d < self.reference_d0_m for d in self.distances_m):
                raise ConfigError("distances_m: every distance must be >= reference_d0_m")
        if not 0.0 <= self.forward_error_p < 1.0:
            raise ConfigError("forward_error_p: must lie in [0, 1)")
        if not 0.0 <= self.reverse_error_p < 1.0:
            raise ConfigError("reverse_error_p: must lie in [0, 1)")
        if not 0.0 <= self.flip_fraction <= 1.0:
            raise ConfigError("flip_fraction: must lie in [0, 1]")
        if self.data_payload_bits < 1 or self.data_payload_bits % 8:
            raise ConfigError("data_payload_bits: must be a positive multiple of 8")
        if self.feedback_payload_bits < 1:
            raise ConfigError("feedback_payload_bits: must be at least 1")
        if self.packets_m < 1:
            raise ConfigError("packets_m: must be at least 1")
        if self.trials_n < 1:
            raise ConfigError("trials_n: must be at least 1")
        if self.training_size < 0:
            raise ConfigError("training_size: must be non-negative")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction: must lie strictly in (0, 1)")
        if self.snr_sigma_db <= 0:
            raise ConfigError("snr_sigma_db: must be positive")
        try:
            Modulation[self.modulation]
        except KeyError:
            raise ConfigError(
                f"modulation: unknown {self.modulation!r}; expected one of "
                f"{[m.name for m in Modulation]}"
            ) from None
        for name in self.families:
            try:
                ModelFamily(name)
            except ValueError:
                raise ConfigError(f"families: unknown model family {name!r}") from None
        try:
            Scheme(self.scheme)
        except ValueError:
            raise ConfigError(f"scheme: unknown scheme {self.scheme!r}") from None
        if self.channel_mode == "scripted" and self.forward_script:
            rows = self.forward_script.split(";")
            if len(rows) != self.receivers_k:
                raise ConfigError(
                    f"forward_script: expected {self.receivers_k} rows, got {len(rows)}"
                )
            for row in rows:
                if not set(row) <= {"0", "1"}:
                    raise ConfigError("forward_script: rows must contain only 0 and 1")


_TUPLE_FLOAT = "tuple_float"
_TUPLE_STR = "tuple_str"


def _field_kind(field_type: str) -> str:
    if field_type.startswith("tuple[float"):
        return _TUPLE_FLOAT
    if field_type.startswith("tuple[str"):
        return _TUPLE_STR
    return field_type


def _parse_value(name: str, kind: str, raw: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return raw
        if kind == _TUPLE_FLOAT:
            return tuple(float(v) for v in raw.split(",") if v != "")
        if kind == _TUPLE_STR:
            return tuple(v for v in raw.split(",") if v != "")
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {kind}") from None
    raise ConfigError(f"{name}: unsupported field type {kind}")


def _format_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str) -> ScenarioConfig:
    """Parse key=value lines ('#' starts a comment) into a validated config."""
    kinds = {f.name: _field_kind(f.type) for f in fields(ScenarioConfig)}
    values: dict[str, object] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw_line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in kinds:
            raise ConfigError(f"{key}: unknown configuration field (line {lineno})")
        values[key] = _parse_value(key, kinds[key], raw)
    cfg = ScenarioConfig(**values)  # type: ignore[arg-type]
    cfg.validate()
    return cfg


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as stream:
        return parse_config(stream.read())


def dump_config(cfg: ScenarioConfig) -> str:
    lines = [f"{f.name}={_format_value(getattr(cfg, f.name))}" for f in fields(cfg)]
    return "\n".join(lines) + "\n"


def save_config(cfg: ScenarioConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as stream:
        stream.write(dump_config(cfg))


# ---------------------------------------------------------------------------
# Builders


def _geometry(cfg: ScenarioConfig, receiver: int) -> LinkGeometry:
    return LinkGeometry(
        distance_m=cfg.distances_m[receiver],
        reference_m=cfg.reference_d0_m,
        wavelength_m=cfg.wavelength_m,
        antenna_height_m=cfg.antenna_height_m,
    )


def _script_rows(cfg: ScenarioConfig) -> list[tuple[bool, ...]]:
    if not cfg.forward_script:
        return [() for _ in range(cfg.receivers_k)]
    return [
        tuple(ch == "1" for ch in row) for row in cfg.forward_script.split(";")
    ]


def build_forward_modes(cfg: ScenarioConfig) -> list[ChannelMode]:
    cfg.validate()
    mod = Modulation[cfg.modulation]
    if cfg.channel_mode == "physical":
        budget = LinkBudget(cfg.tx_power_dbm, cfg.noise_floor_dbm, mod, cfg.data_payload_bits)
        terrain = terrain_preset(TerrainCategory(cfg.terrain))
        return [
            PhysicalChannel(terrain, _geometry(cfg, r), budget)
            for r in range(cfg.receivers_k)
        ]
    if cfg.channel_mode == "abstract":
        mode = AbstractChannel(
            cfg.forward_error_p, cfg.snr_ack_db, cfg.snr_gap_db, cfg.snr_sigma_db
        )
        return [mode] * cfg.receivers_k
    rows = _script_rows(cfg)
    return [ScriptedChannel(rows[r]) for r in range(cfg.receivers_k)]


def build_reverse_modes(cfg: ScenarioConfig) -> list[ChannelMode]:
    cfg.validate()
    mod = Modulation[cfg.modulation]
    if cfg.channel_mode == "physical":
        budget = LinkBudget(
            cfg.feedback_tx_power_dbm, cfg.noise_floor_dbm, mod, cfg.feedback_payload_bits
        )
        terrain = terrain_preset(TerrainCategory(cfg.terrain))
        return [
            PhysicalChannel(terrain, _geometry(cfg, r), budget)
            for r in range(cfg.receivers_k)
        ]
    mode = AbstractChannel(
        cfg.reverse_error_p, cfg.snr_ack_db, cfg.snr_gap_db, cfg.snr_sigma_db
    )
    return [mode] * cfg.receivers_k


def build_feedback_envs(cfg: ScenarioConfig) -> list[FeedbackEnv]:
    """The per-receiver configuration the feedback features report.  Abstract
    scenarios still carry nominal geometry/terrain so the feature vector is
    fully populated."""
    cfg.validate()
    mod = Modulation[cfg.modulation]
    terrain = terrain_preset(TerrainCategory(cfg.terrain))
    budget = LinkBudget(
        cfg.feedback_tx_power_dbm, cfg.noise_floor_dbm, mod, cfg.feedback_payload_bits
    )
    if cfg.channel_mode == "physical":
        geometries = [_geometry(cfg, r) for r in range(cfg.receivers_k)]
    else:
        reference = min(cfg.reference_d0_m, min(cfg.distances_m))
        geometries = [
            LinkGeometry(
                distance_m=cfg.distances_m[r],
                reference_m=reference,
                wavelength_m=cfg.wavelength_m,
                antenna_height_m=cfg.antenna_height_m,
            )
            for r in range(cfg.receivers_k)
        ]
    return [FeedbackEnv(geometries[r], terrain, budget) for r in range(cfg.receivers_k)]


def build_scheme_config(
    cfg: ScenarioConfig, scheme: Scheme, classifier: ClassifierModel | None = None
) -> SchemeConfig:
    return SchemeConfig(
        scheme=scheme,
        phase_size_m=cfg.packets_m,
        receivers_k=cfg.receivers_k,
        classifier=classifier,
        payload_bytes=cfg.data_payload_bits // 8,
    )


def with_updates(cfg: ScenarioConfig, **updates) -> ScenarioConfig:
    out = replace(cfg, **updates)
    out.validate()
    return out
