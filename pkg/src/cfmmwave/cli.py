"""Command-line entry point: run a sweep and write results to a directory."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import channel, harness, scenario
from .config import ConfigError, SimConfig, from_dict, preset, to_dict, validate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Monte Carlo rate-versus-power sweep for cell-free and "
                    "user-centric mmWave massive MIMO.")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file of SimConfig fields (see README)")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--trials", type=int, default=None, help="trial count override")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument("--preset", choices=["desk", "paper"], default=None,
                        help="baseline configuration before overrides")
    parser.add_argument("--dump-scenarios", action="store_true",
                        help="write one scenario snapshot JSON per trial")
    parser.add_argument("--dump-channels", action="store_true",
                        help="write one binary channel tensor per trial")
    parser.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args) -> SimConfig:
    fields = {}
    if args.preset:
        cfg = preset(args.preset)
        fields = to_dict(cfg)
    if args.config:
        with open(args.config) as fh:
            file_fields = json.load(fh)
        if not isinstance(file_fields, dict):
            raise ConfigError("config file must contain a JSON object")
        fields.update(file_fields)
    if args.seed is not None:
        fields["master_seed"] = args.seed
    if args.trials is not None:
        fields["trials"] = args.trials
    cfg = from_dict(fields) if fields else SimConfig()
    validate(cfg)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
    except (ConfigError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.dump_scenarios or args.dump_channels:
        scen_dir = out / "scenarios"
        chan_dir = out / "channels"
        for trial in range(cfg.trials):
            rea = scenario.build_realization(cfg, trial)
            if args.dump_scenarios:
                scen_dir.mkdir(exist_ok=True)
                scenario.save_snapshot(rea, scen_dir / f"trial_{trial:04d}.json")
            if args.dump_channels:
                chan_dir.mkdir(exist_ok=True)
                chans = channel.synthesize_channels(cfg, rea)
                channel.write_channel_dump(chan_dir / f"trial_{trial:04d}.bin", chans.h)

    done = []

    def progress(tr):
        done.append(tr.trial)
        print(f"trial {tr.trial + 1}/{cfg.trials} done "
              f"({len(tr.records)} records, {len(tr.failures)} failures)")

    result = harness.sweep(cfg, jobs=max(1, args.jobs), trial_callback=progress)
    paths = harness.emit(result, out)
    print(f"wrote {paths['csv']} and {paths['json']}")
    if result.failures:
        print(f"{len(result.failures)} combination(s) failed; see the JSON failure block",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
