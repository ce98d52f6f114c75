import argparse
import json
import logging
import os
import sys
import traceback
from typing import Any, Dict, List, Optional

from ncf.cli import parse_config, run_preset, run_sweep, PRESETS, PRESET_ALIASES
from ncf.config import settings
from ncf.errors import DecodeCorruption, NcfError, ParseError
from ncf.selftest import run_selftest
from ncf.sim import run_experiment

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CORRUPTION = 2


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; usage errors here are configuration errors."""

    def error(self, message: str):
        raise ParseError(message)


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--n", type=int, help="number of sensor nodes")
    parser.add_argument("--m", type=int, help="number of gateways")
    parser.add_argument("--gateways-ratio", dest="gateways_ratio", type=float,
                        help="derive m as this fraction of n (default 0.05)")
    parser.add_argument("--pt", type=float, help="transmission probability")
    parser.add_argument("--mode", choices=["rand", "equal"], type=str.lower, help="connectivity mode")
    parser.add_argument("--w", type=int, help="connectivity factor (equal mode)")
    parser.add_argument("--L", dest="L", type=int, help="payload length in field symbols")
    parser.add_argument("--gf-exp", dest="gf_exp", type=int, help="field exponent k of GF(2^k)")
    parser.add_argument("--sweep", help="swept parameter: n, pt or w")
    parser.add_argument("--sweep-values", dest="sweep_values", help="comma-separated swept values")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", type=int, help=f"trials per scenario (default {settings.TRIALS})")
    parser.add_argument("--seed", type=int, help=f"root seed (default {settings.SEED})")
    parser.add_argument("--output", help="output path")
    parser.add_argument("--workers", type=int, help="worker processes")
    parser.add_argument("--gnuplot-script", dest="gnuplot", action="store_true",
                        help="also write a gnuplot script next to the CSV")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="ncf", description="Network-coding-based forwarding for LoRaWAN gateways")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-trial detail")
    parser.add_argument("-q", "--quiet", action="store_true", help="log errors only")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    simulate = commands.add_parser("simulate", help="run one scenario and print its statistics as JSON")
    _add_scenario_flags(simulate)
    _add_run_flags(simulate)

    sweep = commands.add_parser("sweep", help="run a parameter sweep and write a CSV")
    _add_scenario_flags(sweep)
    _add_run_flags(sweep)

    preset = commands.add_parser("preset", help="run a bundled experiment")
    preset.add_argument("name", choices=sorted(PRESETS) + sorted(PRESET_ALIASES))
    _add_run_flags(preset)

    commands.add_parser("selftest", help="check the worked examples")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    keys = ("n", "m", "gateways_ratio", "pt", "mode", "w", "L", "gf_exp",
            "sweep", "sweep_values", "trials", "seed", "output")
    return {key: getattr(args, key, None) for key in keys}


def simulate(args: argparse.Namespace) -> None:
    spec = parse_config(args.config, _overrides(args))
    if spec.variable is not None:
        raise ParseError("simulate runs a single scenario; use the sweep command for sweep keys")
    config = spec.point(None)
    stats = run_experiment(config, spec.trials, args.workers or settings.WORKERS)

    if spec.output:
        os.makedirs(os.path.dirname(spec.output) or ".", exist_ok=True)
        with open(spec.output, 'w') as f:
            json.dump(stats.model_dump(mode="json"), f, indent=2)
        logging.info(f"Simulation complete: {spec.output}")
    else:
        print(json.dumps(stats.model_dump(mode="json"), indent=2))


def sweep(args: argparse.Namespace) -> None:
    spec = parse_config(args.config, _overrides(args))
    if spec.variable is None:
        raise ParseError("sweep needs a sweep variable and sweep_values")
    spec = spec.model_copy(update={"gnuplot": args.gnuplot, "workers": args.workers or settings.WORKERS})
    path = run_sweep(spec)
    logging.info(f"Sweep complete: {path}")


def preset(args: argparse.Namespace) -> None:
    path = run_preset(args.name, trials=args.trials, seed=args.seed, output=args.output,
                      workers=args.workers, gnuplot=args.gnuplot)
    logging.info(f"Preset {args.name} complete: {path}")


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ParseError as e:
        logging.basicConfig(level=settings.LOG_LEVEL, format='%(message)s')
        logging.error(f"Invalid arguments: {e}")
        return EXIT_INVALID

    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else settings.LOG_LEVEL
    logging.basicConfig(level=level, format='%(message)s')

    try:
        if args.command == "selftest":
            return EXIT_OK if not run_selftest() else EXIT_INVALID
        {"simulate": simulate, "sweep": sweep, "preset": preset}[args.command](args)
    except DecodeCorruption as e:
        logging.error(f"Decoded payload mismatch: {e}")
        traceback.print_exc()
        return EXIT_CORRUPTION
    except (NcfError, ValueError, OSError) as e:
        logging.error(f"Error during {args.command}: {e}")
        return EXIT_INVALID
    except Exception as e:
        logging.error(f"Error during {args.command}: {e}")
        traceback.print_exc()
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
