"""Command-line harness.

    zeus run <scenario>                     run every session, write transcripts
    zeus sweep <scenario> --t-min --t-max --trials
    zeus oracle <scenario> [--session] [--mc-trials]
    zeus replay <transcript>

Exit codes: 0 success, 1 a verdict failed (run) or a replay diverged,
2 usage or configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import CodecError, ConfigError, InstanceTooLarge, ReplayMismatch, ZeusError
from .experiment import monte_carlo_acceptance, oracle_acceptance, run_experiment, sweep_thresholds
from .replay import replay_transcript
from .scenario import load_scenario

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
DEFAULT_OUT_DIR = "zeus_out"


def _out_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get("ZEUS_OUT_DIR") or DEFAULT_OUT_DIR)


def cmd_run(args) -> int:
    config = load_scenario(args.scenario)
    report = run_experiment(config, _out_dir(args), base_seed=args.seed)
    sys.stdout.write(report.to_tsv())
    for s in report.sessions:
        if s.error:
            print(f"# {s.session_id}: {s.error}", file=sys.stderr)
    return EXIT_OK if report.all_done else EXIT_FAILED


def cmd_sweep(args) -> int:
    config = load_scenario(args.scenario)
    exp = config.experiment
    t_min = exp.t_min if args.t_min is None else args.t_min
    t_max = exp.t_max if args.t_max is None else args.t_max
    trials = exp.trials if args.trials is None else args.trials
    if t_min < 0 or t_min > t_max or trials < 1:
        print(f"error: need 0 <= t-min <= t-max and trials >= 1", file=sys.stderr)
        return EXIT_USAGE
    table = sweep_thresholds(config, t_min, t_max, trials, base_seed=args.seed)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    (out / "rates.csv").write_text(table.to_csv(), encoding="utf-8")
    sys.stdout.write(table.to_csv())
    return EXIT_OK


def cmd_oracle(args) -> int:
    config = load_scenario(args.scenario)
    try:
        exact = oracle_acceptance(config, args.session)
    except InstanceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"oracle\t{exact}\t{float(exact):.6f}")
    if args.mc_trials:
        est = monte_carlo_acceptance(config, args.mc_trials, args.session, base_seed=args.seed)
        print(f"monte_carlo\t{est}\t{float(est):.6f}")
        print(f"abs_diff\t\t{abs(float(est) - float(exact)):.6f}")
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        result = replay_transcript(args.transcript)
    except ReplayMismatch as exc:
        print(f"MISMATCH\t{exc.round}\t{exc.field}\texpected={exc.expected!r}\tfound={exc.found!r}")
        return EXIT_FAILED
    except CodecError as exc:
        print(f"MALFORMED\t{exc}")
        return EXIT_FAILED
    print(f"VERIFIED\t{result.session_id}\t{result.status.value}\t"
          f"c=({result.c_i},{result.c_j})\trounds={result.rounds}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zeus", description=__doc__.split("\n\n")[0])
    parser.add_argument("--out-dir", help="output directory (default $ZEUS_OUT_DIR or ./zeus_out)")
    parser.add_argument("--seed", type=int, default=None, help="base seed added to every agent seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every session in a scenario")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="FAR/FRR over symmetric thresholds")
    p.add_argument("scenario")
    p.add_argument("--t-min", type=int)
    p.add_argument("--t-max", type=int)
    p.add_argument("--trials", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exact acceptance probability by enumeration")
    p.add_argument("scenario")
    p.add_argument("--session")
    p.add_argument("--mc-trials", type=int, default=0, help="also estimate by Monte Carlo")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("replay", help="verify a transcript file")
    p.add_argument("transcript")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ZeusError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
