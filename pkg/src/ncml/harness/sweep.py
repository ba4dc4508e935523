"""Parameter sweeps: one eta estimate per (sweep value, scheme).

Trials are paired across schemes: trial i of every scheme at a sweep point
runs from the identical per-trial generator, so the schemes see the same
forward-loss and feedback-corruption trace and their differences isolate
the decision policy.  Classifiers for the learning schemes are trained on
data collected under each sweep point's own configuration unless a global
model is requested.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, TextIO

import numpy as np

from ..learn.dataset import SplitSpec
from ..learn.models import ClassifierModel, ModelFamily
from ..learn.selection import train_select
from ..metrics import effective_throughput
from ..protocol.trial import ML_SCHEMES, Scheme, run_trial, trial_rng
from .config import (
    ScenarioConfig,
    build_feedback_envs,
    build_forward_modes,
    build_reverse_modes,
    build_scheme_config,
    with_updates,
)
from .datagen import generate_training_data

__all__ = [
    "SweepAxis",
    "SweepSpec",
    "SummaryRow",
    "DEFAULT_AXIS_VALUES",
    "SUMMARY_CSV_HEADER",
    "apply_axis",
    "run_point",
    "run_sweep",
    "write_summary_csv",
]

ABORT_FLAG_RATE = 0.01


class SweepAxis(Enum):
    DISTANCE = "distance"
    TX_POWER = "txpower"
    FORWARD_ERROR_P = "forward_p"
    TERRAIN = "terrain"
    TRAINING_SIZE = "training_size"
    MODEL_FAMILY = "family"


DEFAULT_AXIS_VALUES: dict[SweepAxis, tuple] = {
    SweepAxis.DISTANCE: tuple(float(d) for d in range(200, 501, 50)),
    SweepAxis.TX_POWER: tuple(float(p) for p in range(14, 27, 2)),
    SweepAxis.FORWARD_ERROR_P: tuple(round(0.02 * i, 2) for i in range(1, 11)),
    SweepAxis.TERRAIN: (1, 2, 3),
    SweepAxis.TRAINING_SIZE: (100, 300, 1000, 3000),
    SweepAxis.MODEL_FAMILY: tuple(f.value for f in ModelFamily),
}

SCHEME_ORDER = (Scheme.ARQ, Scheme.ARQ_ML, Scheme.NC, Scheme.NC_ML)


@dataclass(frozen=True)
class SweepSpec:
    axis: SweepAxis
    values: tuple
    schemes: tuple[Scheme, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("sweep values must be non-empty")
        if not self.schemes:
            raise ValueError("sweep needs at least one scheme")
        numeric = [v for v in self.values if isinstance(v, (int, float))]
        if len(numeric) == len(self.values) and self.axis is not SweepAxis.TERRAIN:
            if any(b <= a for a, b in zip(self.values, self.values[1:])):
                raise ValueError("numeric sweep values must be strictly increasing")


@dataclass(frozen=True)
class SummaryRow:
    axis: str
    value: str
    scheme: str
    eta: float
    stderr: float
    trials: int
    aborted: int
    flagged: bool


SUMMARY_CSV_HEADER = "axis,value,scheme,eta,stderr,trials,aborted,flagged"


def apply_axis(cfg: ScenarioConfig, axis: SweepAxis, value) -> ScenarioConfig:
    """The scenario at one sweep point."""
    if axis is SweepAxis.DISTANCE:
        return with_updates(cfg, distances_m=tuple(float(value) for _ in range(cfg.receivers_k)))
    if axis is SweepAxis.TX_POWER:
        return with_updates(cfg, tx_power_dbm=float(value), feedback_tx_power_dbm=float(value))
    if axis is SweepAxis.FORWARD_ERROR_P:
        return with_updates(cfg, channel_mode="abstract", forward_error_p=float(value))
    if axis is SweepAxis.TERRAIN:
        return with_updates(cfg, terrain=int(value))
    if axis is SweepAxis.TRAINING_SIZE:
        return with_updates(cfg, training_size=int(value))
    if axis is SweepAxis.MODEL_FAMILY:
        return with_updates(cfg, families=(str(value),))
    raise ValueError(f"unknown sweep axis {axis!r}")


def _derived_seed(base_seed: int, *key: int) -> int:
    return int(np.random.SeedSequence((base_seed, *key)).generate_state(1)[0])


def train_point_model(cfg: ScenarioConfig, point_index: int = 0) -> ClassifierModel:
    """Fit the selection-loop winner on data collected under this scenario."""
    data = generate_training_data(
        cfg, cfg.training_size, _derived_seed(cfg.base_seed, 1_000_003, point_index)
    )
    spec = SplitSpec(cfg.train_fraction, _derived_seed(cfg.base_seed, 2_000_003, point_index))
    families = tuple(ModelFamily(name) for name in cfg.families)
    return train_select(data, families, spec)


def run_point(
    cfg: ScenarioConfig,
    schemes: Sequence[Scheme],
    *,
    classifier: ClassifierModel | None = None,
    point_index: int = 0,
) -> dict[Scheme, tuple]:
    """Run N paired trials per scheme at one configuration.

    Returns scheme -> ThroughputResult.  Trial i of every scheme uses the
    generator derived from (base_seed, point_index, i).
    """
    forward = build_forward_modes(cfg)
    reverse = build_reverse_modes(cfg)
    envs = build_feedback_envs(cfg)
    needs_model = any(s in ML_SCHEMES for s in schemes)
    if needs_model and classifier is None:
        classifier = train_point_model(cfg, point_index)

    results: dict[Scheme, tuple] = {}
    for scheme in SCHEME_ORDER:
        if scheme not in schemes:
            continue
        scheme_cfg = build_scheme_config(
            cfg, scheme, classifier if scheme in ML_SCHEMES else None
        )
        records = [
            run_trial(
                scheme_cfg,
                forward,
                reverse,
                trial_rng(cfg.base_seed, point_index, i),
                feedback_envs=envs,
                flip_fraction=cfg.flip_fraction,
                seed=i,
                scenario=f"point{point_index}",
            )
            for i in range(cfg.trials_n)
        ]
        results[scheme] = effective_throughput(records)
    return results


def run_sweep(
    cfg: ScenarioConfig, sweep: SweepSpec, *, global_model: bool = False
) -> list[SummaryRow]:
    """One summary row per (sweep value, scheme), ordered by (value, scheme)."""
    needs_model = any(s in ML_SCHEMES for s in sweep.schemes)
    shared = train_point_model(cfg) if (global_model and needs_model) else None

    rows: list[SummaryRow] = []
    for point_index, value in enumerate(sweep.values):
        point_cfg = apply_axis(cfg, sweep.axis, value)
        results = run_point(
            point_cfg, sweep.schemes, classifier=shared, point_index=point_index
        )
        for scheme in SCHEME_ORDER:
            if scheme not in results:
                continue
            res = results[scheme]
            total = res.trial_count + res.aborted_count
            rows.append(
                SummaryRow(
                    axis=sweep.axis.value,
                    value=str(value),
                    scheme=scheme.value,
                    eta=res.eta,
                    stderr=res.stderr,
                    trials=res.trial_count,
                    aborted=res.aborted_count,
                    flagged=res.aborted_count > ABORT_FLAG_RATE * total,
                )
            )
    return rows


def write_summary_csv(rows: Sequence[SummaryRow], stream: TextIO) -> None:
    stream.write(SUMMARY_CSV_HEADER + "\n")
    for row in rows:
        stream.write(
            ",".join(
                (
                    row.axis,
                    row.value,
                    row.scheme,
                    repr(row.eta),
                    repr(row.stderr),
                    str(row.trials),
                    str(row.aborted),
                    "1" if row.flagged else "0",
                )
            )
            + "\n"
        )
