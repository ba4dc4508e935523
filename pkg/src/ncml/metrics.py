"""Aggregation of trial records into the effective-throughput metric.

Effective throughput is the average number of transmissions per data packet
per receiver: eta = sum(n_i) / (N * M * K) over completed trials.  Lower is
better; the lower bound 1/K is attained on perfect channels.  The infinite-
trial limit is realized as a finite-N estimate with a reported standard
error, and aborted trials are excluded from the mean but surfaced in a
separate count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

__all__ = [
    "TrialRecord",
    "ThroughputResult",
    "effective_throughput",
    "TRIAL_CSV_HEADER",
    "trial_record_to_csv_row",
    "write_trial_csv",
]

TRIAL_CSV_HEADER = "scheme,seed,K,M,n,aborted,scenario"


@dataclass(frozen=True)
class TrialRecord:
    """One simulation trial's transmission count and configuration."""

    scheme: str
    seed: int
    receivers_k: int
    packets_m: int
    transmissions_n: int
    aborted: bool = False
    scenario: str = ""

    def __post_init__(self) -> None:
        if self.receivers_k < 1 or self.packets_m < 1:
            raise ValueError("receivers_k and packets_m must be at least 1")
        if not self.aborted and self.transmissions_n < self.packets_m:
            raise ValueError(
                "a completed trial sends each packet at least once "
                f"(n={self.transmissions_n} < M={self.packets_m})"
            )


@dataclass(frozen=True)
class ThroughputResult:
    eta: float
    trial_count: int
    stderr: float
    aborted_count: int


def effective_throughput(records: Sequence[TrialRecord]) -> ThroughputResult:
    """Aggregate records sharing one configuration into eta and its stderr.

    eta over completed records only; stderr is the sample standard deviation
    of n_i/(M*K) divided by sqrt(N) (zero when N == 1).
    """
    if not records:
        raise ValueError("no trial records to aggregate")
    keys = {(r.scheme, r.packets_m, r.receivers_k, r.scenario) for r in records}
    if len(keys) != 1:
        raise ValueError(f"mixed-configuration records: {sorted(keys)}")

    completed = [r for r in records if not r.aborted]
    aborted_count = len(records) - len(completed)
    if not completed:
        raise ValueError("no completed trials to aggregate")

    m = completed[0].packets_m
    k = completed[0].receivers_k
    values = [r.transmissions_n / (m * k) for r in completed]
    n = len(values)
    eta = sum(values) / n
    if n > 1:
        var = sum((v - eta) ** 2 for v in values) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = 0.0
    return ThroughputResult(eta=eta, trial_count=n, stderr=stderr, aborted_count=aborted_count)


def trial_record_to_csv_row(record: TrialRecord) -> str:
    return ",".join(
        (
            record.scheme,
            str(record.seed),
            str(record.receivers_k),
            str(record.packets_m),
            str(record.transmissions_n),
            "1" if record.aborted else "0",
            record.scenario,
        )
    )


def write_trial_csv(records: Iterable[TrialRecord], stream: TextIO) -> None:
    stream.write(TRIAL_CSV_HEADER + "\n")
    for record in records:
        stream.write(trial_record_to_csv_row(record) + "\n")
