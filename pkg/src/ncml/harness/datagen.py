"""Historical feedback data collection.

Runs plain broadcast exchanges under a scenario's channels, observes every
receiver's feedback, and keeps the correctly decoded observations until the
requested number of clean training examples is reached.  Deterministic per
seed.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from ..channel import forward_event
from ..feedback import DecodeOutcome, FeedbackObservation, LabeledExample, generate_feedback
from ..learn.dataset import Dataset
from .config import ScenarioConfig, build_feedback_envs, build_forward_modes, build_reverse_modes

__all__ = ["generate_observations", "generate_training_data"]


def _observation_stream(cfg: ScenarioConfig, seed: int) -> Iterator[FeedbackObservation]:
    """One independent data-packet exchange per observation, round-robin over
    the receivers; the feedback reuses each exchange's channel state."""
    if cfg.channel_mode == "scripted":
        raise ValueError("data collection needs a physical or abstract channel")
    forward = build_forward_modes(cfg)
    reverse = build_reverse_modes(cfg)
    envs = build_feedback_envs(cfg)
    rng = np.random.default_rng(seed)
    r = 0
    while True:
        event = forward_event(forward[r], rng)
        env = envs[r]
        yield generate_feedback(
            event.success,
            reverse[r],
            env.geometry,
            env.terrain,
            env.budget,
            rng,
            flip_fraction=cfg.flip_fraction,
            draw=event.draw,
            link_success=event.success,
        )
        r = (r + 1) % cfg.receivers_k


def generate_observations(cfg: ScenarioConfig, count: int, seed: int) -> list[FeedbackObservation]:
    """The first ``count`` raw feedback observations for a scenario."""
    stream = _observation_stream(cfg, seed)
    return [next(stream) for _ in range(count)]


def generate_training_data(cfg: ScenarioConfig, size: int, seed: int) -> Dataset:
    """Collect exactly ``size`` clean (correctly decoded) labeled examples."""
    examples: list[LabeledExample] = []
    if size > 0:
        stream = _observation_stream(cfg, seed)
        while len(examples) < size:
            obs = next(stream)
            if obs.decode_outcome is DecodeOutcome.CORRECT:
                examples.append(LabeledExample(obs.features, obs.true_state))
    elif cfg.channel_mode == "scripted":
        raise ValueError("data collection needs a physical or abstract channel")
    return Dataset(examples)
