#!/usr/bin/env python3

"""
Command line tool to simulate a relay chain of support robots.

Examples:
      relaynet run --scenario corridor -o ~/relaynet_out/corridor
      relaynet run --scenario my_scenario.yaml --seed 3 --duration 120 -o /tmp/out
      relaynet summarize --packet_log /tmp/out/packets.csv -o /tmp/out
"""
import logging
import sys

from relaynet.cli.config import (
    Config,
    config_from_args,
    RunConfig,
    validate_config,
    ValidatedRunConfig,
    ValidatedSummarizeConfig,
)
from relaynet.cli.run import run, RunIOError
from relaynet.cli.scenario import (
    load_scenario,
    ScenarioParseError,
    ScenarioValidationError,
    with_overrides,
)
from relaynet.cli.summarize import read_packet_log, summarize, write_loss


def run_cfg(cfg: ValidatedRunConfig) -> None:
    scenario = with_overrides(
        load_scenario(cfg.scenario), seed=cfg.seed, duration=cfg.duration
    )
    print(f"Scenario: {cfg.scenario} (seed {scenario.seed}, {scenario.duration} s)")
    print(f"Output Path: {cfg.output_directory}")
    report = run(
        scenario,
        cfg.output_directory,
        progress=cfg.progress,
        dump_routes=cfg.dump_routes,
    )
    m = report.metrics
    print(
        f"Delivered {m.packets_delivered}/{m.packets_sent} packets "
        f"({100 * report.delivery_ratio:.2f}%)"
    )
    if m.completion_time is not None:
        print(f"Agent completed its route at {m.completion_time:.1f} s")
    else:
        print(f"Agent reached {len(m.waypoint_times)} waypoints")


def summarize_cfg(cfg: ValidatedSummarizeConfig) -> None:
    loss = summarize(read_packet_log(cfg.packet_log), window=cfg.window)
    if cfg.output_directory is None:
        print(loss.to_string(index=False))
        return
    cfg.output_directory.mkdir(parents=True, exist_ok=True)
    path = cfg.output_directory / "loss.csv"
    write_loss(loss, path)
    print(f"Loss series: {path}")


def main_cfg(cfg: Config) -> None:
    validated_cfg = validate_config(cfg)
    if isinstance(cfg, RunConfig):
        run_cfg(validated_cfg)
    else:
        summarize_cfg(validated_cfg)


def main(args=None) -> None:
    _, config, log_level = config_from_args(args)
    logging.basicConfig(
        level=getattr(logging, log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        main_cfg(config)
    except (ScenarioParseError, ScenarioValidationError) as e:
        logging.error(f"Invalid scenario: {e}")
        sys.exit(1)
    except RunIOError as e:
        logging.error(str(e))
        sys.exit(1)


if __name__ == "__main__":
    main()
