"""Command-line harness.

Subcommands: gen-data (emit a training CSV), train (fit and save a
classifier, printing its validation accuracy), sweep (run a parameter sweep
and emit the summary CSV), and trial (one verbose trial for debugging).
All outputs are byte-identical across runs with the same config and seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import nullcontext

from ..feedback import write_examples_csv
from ..learn.dataset import Dataset, SplitSpec, load_dataset
from ..learn.models import ModelFamily, save_model
from ..learn.selection import train_select
from ..protocol.trial import ML_SCHEMES, Scheme, TrialTrace, run_trial, trial_rng
from .config import (
    ConfigError,
    ScenarioConfig,
    build_feedback_envs,
    build_forward_modes,
    build_reverse_modes,
    build_scheme_config,
    load_config,
    with_updates,
)
from .datagen import generate_training_data
from .sweep import (
    DEFAULT_AXIS_VALUES,
    SweepAxis,
    SweepSpec,
    run_sweep,
    train_point_model,
    write_summary_csv,
)

__all__ = ["main"]

SEED_ENV_VAR = "NCML_SEED"


def _resolve_config(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    seed = args.seed
    if seed is None and os.environ.get(SEED_ENV_VAR):
        try:
            seed = int(os.environ[SEED_ENV_VAR])
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR}: not an integer") from None
    if seed is not None:
        cfg = with_updates(cfg, base_seed=seed)
    return cfg


def _out_stream(path: str | None):
    if path is None or path == "-":
        return nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8")


def _cmd_gen_data(args) -> int:
    cfg = _resolve_config(args)
    size = args.size if args.size is not None else cfg.training_size
    data = generate_training_data(cfg, size, cfg.base_seed)
    with _out_stream(args.out) as stream:
        write_examples_csv(data.examples, stream)
    return 0


def _cmd_train(args) -> int:
    cfg = _resolve_config(args)
    if args.data:
        data = load_dataset(args.data)
    else:
        size = args.size if args.size is not None else cfg.training_size
        data = generate_training_data(cfg, size, cfg.base_seed)
    families = tuple(ModelFamily(name) for name in cfg.families)
    spec = SplitSpec(cfg.train_fraction, cfg.base_seed)
    model = train_select(data, families, spec)
    if args.out and args.out != "-":
        save_model(model, args.out)
    feature_names = Dataset([]).feature_names
    selected = ",".join(feature_names[i] for i in model.selected_features)
    print(
        f"family={model.family.value} features={selected} "
        f"validation_accuracy={model.validation_accuracy!r}"
    )
    return 0


def _parse_axis_values(axis: SweepAxis, raw: str | None) -> tuple:
    if raw is None:
        return DEFAULT_AXIS_VALUES[axis]
    parts = [p for p in raw.split(",") if p != ""]
    if axis is SweepAxis.MODEL_FAMILY:
        return tuple(parts)
    if axis in (SweepAxis.TERRAIN, SweepAxis.TRAINING_SIZE):
        return tuple(int(p) for p in parts)
    return tuple(float(p) for p in parts)


def _cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    axis = SweepAxis(args.axis)
    scheme_names = [s for s in args.schemes.split(",") if s != ""]
    if not scheme_names:
        print("error: sweep needs at least one scheme", file=sys.stderr)
        return 2
    try:
        schemes = tuple(Scheme(name) for name in scheme_names)
    except ValueError:
        known = ",".join(s.value for s in Scheme)
        print(f"error: unknown scheme in {args.schemes!r}; known: {known}", file=sys.stderr)
        return 2
    spec = SweepSpec(axis, _parse_axis_values(axis, args.values), schemes)
    rows = run_sweep(cfg, spec, global_model=args.global_model)
    with _out_stream(args.out) as stream:
        write_summary_csv(rows, stream)
    return 0


def _cmd_trial(args) -> int:
    cfg = _resolve_config(args)
    scheme = Scheme(args.scheme) if args.scheme else Scheme(cfg.scheme)
    classifier = train_point_model(cfg) if scheme in ML_SCHEMES else None
    trace = TrialTrace()
    record = run_trial(
        build_scheme_config(cfg, scheme, classifier),
        build_forward_modes(cfg),
        build_reverse_modes(cfg),
        trial_rng(cfg.base_seed, 0, 0),
        feedback_envs=build_feedback_envs(cfg),
        flip_fraction=cfg.flip_fraction,
        seed=0,
        scenario="trial",
        trace=trace,
    )
    print(f"scheme={record.scheme} n={record.transmissions_n} aborted={int(record.aborted)}")
    if args.verbose:
        for i, ev in enumerate(trace.broadcasts, start=1):
            kind = "coded" if ev.coded else "data"
            ids = "+".join(str(c) for c in ev.constituents)
            ok = "".join("1" if f else "0" for f in ev.forward_ok)
            outcomes = ",".join(ev.outcomes)
            print(f"tx {i}: {kind} {ids} forward={ok} feedback={outcomes}")
    return 0 if not record.aborted else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncml",
        description="Reliable-broadcast simulator: ARQ/NC schemes with learned feedback classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="scenario config file (key=value)")
        p.add_argument("--seed", type=int, default=None,
                       help=f"base seed override (falls back to ${SEED_ENV_VAR}, then the config)")
        p.add_argument("--out", default=None, help="output path ('-' for stdout)")

    p = sub.add_parser("gen-data", help="emit a training CSV of clean feedback examples")
    common(p)
    p.add_argument("--size", type=int, default=None, help="number of clean examples")
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="fit the selection-loop winner and save it")
    common(p)
    p.add_argument("--size", type=int, default=None, help="training examples to generate")
    p.add_argument("--data", default=None, help="existing training CSV instead of generating")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("sweep", help="run a parameter sweep and emit the summary CSV")
    common(p)
    p.add_argument("--axis", required=True, choices=[a.value for a in SweepAxis])
    p.add_argument("--values", default=None, help="comma-separated sweep values")
    p.add_argument("--schemes", default="ARQ,ARQ-ML,NC,NC-ML",
                   help="comma-separated subset of ARQ,ARQ-ML,NC,NC-ML")
    p.add_argument("--global-model", action="store_true",
                   help="train one classifier on the base scenario instead of per point")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("trial", help="run a single trial and print its transmission count")
    common(p)
    p.add_argument("--scheme", default=None, help="override the config's scheme")
    p.add_argument("--verbose", action="store_true", help="print the broadcast trace")
    p.set_defaults(func=_cmd_trial)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: config: {err}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
