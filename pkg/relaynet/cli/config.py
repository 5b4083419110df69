"""
Data objects for the user options of the `run` and `summarize` commands, along with
utilities for parsing them from command line flags and an optional JSON file.
"""
import argparse
import json
from pathlib import Path
from typing import NamedTuple, Optional, Union

DEFAULT_SCENARIO = "corridor"
DEFAULT_WINDOW_S = 10.0


class ValidatedRunConfig(NamedTuple):
    scenario: str
    output_directory: Path
    seed: Optional[int]
    duration: Optional[float]
    progress: bool
    dump_routes: bool


class RunConfig(NamedTuple):
    """
    User-supplied options for a simulation run. `seed` and `duration` override the
    scenario file when set.
    """

    output_directory: str = None
    scenario: str = DEFAULT_SCENARIO
    seed: Optional[int] = None
    duration: Optional[float] = None
    no_progress: bool = False
    dump_routes: bool = False


class ValidatedSummarizeConfig(NamedTuple):
    packet_log: Path
    output_directory: Optional[Path]
    window: float


class SummarizeConfig(NamedTuple):
    packet_log: str = None
    output_directory: Optional[str] = None
    window: float = DEFAULT_WINDOW_S


Config = Union[RunConfig, SummarizeConfig]


def validate_config(cfg: Config):
    """
    Args:
        cfg: user-supplied options for one command
    Returns:
        the validated counterpart, with expanded paths
    """
    if isinstance(cfg, RunConfig):
        if cfg.duration is not None and cfg.duration < 0:
            raise RuntimeError(f"--duration must be non-negative, got {cfg.duration}")
        return ValidatedRunConfig(
            scenario=cfg.scenario,
            output_directory=Path(cfg.output_directory).expanduser(),
            seed=cfg.seed,
            duration=cfg.duration,
            progress=not cfg.no_progress,
            dump_routes=bool(cfg.dump_routes),
        )

    packet_log = Path(cfg.packet_log).expanduser()
    if not packet_log.exists():
        raise RuntimeError(f"Packet log not found: {packet_log}")
    if not cfg.window > 0:
        raise RuntimeError(f"--window must be positive, got {cfg.window}")
    return ValidatedSummarizeConfig(
        packet_log=packet_log,
        output_directory=Path(cfg.output_directory).expanduser()
        if cfg.output_directory
        else None,
        window=cfg.window,
    )


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Simulate support robots keeping a multi-hop radio link between "
        "a base station and a roaming agent",
        add_help=True,
    )
    parser.add_argument(
        "--log_level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging verbosity (default: INFO)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a scenario and write its logs")
    run.add_argument(
        "--scenario",
        help="A bundled scenario name (corridor, minimal, relay_freeze) or a path to "
        "a scenario YAML file",
    )
    run.add_argument("--seed", type=int, help="Overrides the scenario seed")
    run.add_argument(
        "-o",
        "--output_directory",
        help="Where trajectory.csv, packets.csv, modes.csv, scenario.yaml and "
        "metrics.json are written",
    )
    run.add_argument(
        "--duration", type=float, help="Overrides the scenario duration, in seconds"
    )
    run.add_argument(
        "--no_progress",
        const=True,
        action="store_const",
        help="Do not show the progress bar",
    )
    run.add_argument(
        "--dump_routes",
        const=True,
        action="store_const",
        help="Log every node's final routing table",
    )

    summarize = sub.add_parser(
        "summarize", help="Packet loss over time from a packets.csv"
    )
    summarize.add_argument("--packet_log", help="Path to a packets.csv")
    summarize.add_argument(
        "-o",
        "--output_directory",
        help="If set, loss.csv is written there; otherwise the series is printed",
    )
    summarize.add_argument(
        "--window",
        type=float,
        help=f"Trailing window for windowed loss, in seconds (default: {DEFAULT_WINDOW_S})",
    )
    return parser


def config_from_args(args=None):
    """
    Parses command line flags and returns (command, Config, log_level).
    """
    # Parser for a configuration file
    json_parser = argparse.ArgumentParser(add_help=False)
    json_parser.add_argument(
        "--config_path",
        type=Path,
        help="Local path to a config JSON file. If specified, its values are used as "
        "defaults for the command line flags.",
    )
    json_args, remaining = json_parser.parse_known_args(args=args)

    parser = _parser()
    parsed_args = parser.parse_args(remaining)

    if json_args.config_path:
        with open(json_args.config_path.expanduser()) as f:
            config_contents = json.load(f)
        for k, v in config_contents.items():
            if getattr(parsed_args, k, None) is None:
                setattr(parsed_args, k, v)

    flags = {k: v for k, v in vars(parsed_args).items() if v is not None}
    command = flags.pop("command")
    log_level = flags.pop("log_level")

    if command == "run":
        required_flags = {"output_directory"}
        config_type = RunConfig
    else:
        required_flags = {"packet_log"}
        config_type = SummarizeConfig
    missing = required_flags - flags.keys()
    if missing:
        raise RuntimeError(f"Missing required flags: {missing}")

    unknown = set(flags) - set(config_type._fields)
    if unknown:
        raise RuntimeError(f"Unknown options for {command}: {sorted(unknown)}")
    return command, config_type(**flags), log_level
