"""
Runs a scenario to the end and writes its logs.

Outputs, all UTF-8 with LF line endings:

    trajectory.csv  tick,time,id,role,x,y,heading,mode,on_path
    packets.csv     seq,created_tick,time,src,dst,outcome,reason,at,hops,hop_trace
    modes.csv       tick,id,role,state,predecessor,successor,tasks
    scenario.yaml   the resolved scenario
    metrics.json    RunReport
"""
import csv
import logging
import time
from contextlib import ExitStack
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from dataclasses_json import dataclass_json
from relaynet.cli.progressbar import TickProgressBar
from relaynet.cli.scenario import Scenario, scenario_to_dict, scenario_to_yaml
from relaynet.mesh.routing import format_table
from relaynet.mesh.types import Delivered, RelayOutcome
from relaynet.sim.engine import finished, init_state, SimSetup, step, TickRecord
from relaynet.sim.events import count_events, EventLevel, worst_level
from relaynet.sim.metrics import Metrics

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
LOG_SCHEMA_VERSION = 1

TRAJECTORY_HEADER = ["tick", "time", "id", "role", "x", "y", "heading", "mode", "on_path"]
PACKETS_HEADER = [
    "seq",
    "created_tick",
    "time",
    "src",
    "dst",
    "outcome",
    "reason",
    "at",
    "hops",
    "hop_trace",
]
MODES_HEADER = ["tick", "id", "role", "state", "predecessor", "successor", "tasks"]


class RunIOError(OSError):
    pass


@dataclass_json
@dataclass
class Timing:
    setup_s: float = 0.0
    simulate_s: float = 0.0
    write_s: float = 0.0


@dataclass_json
@dataclass
class RunReport:
    metrics: Metrics
    delivery_ratio: float
    simulated_s: float
    timing: Timing = field(default_factory=Timing)
    config: Dict[str, Any] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION
    log_schema_version: int = LOG_SCHEMA_VERSION


def _f(x: float) -> str:
    return "%.6f" % x


def _opt(u: Optional[int]) -> str:
    return "" if u is None else str(u)


def trajectory_rows(rec: TickRecord) -> List[List[str]]:
    return [
        [
            str(rec.tick),
            _f(rec.time),
            str(n.node),
            n.role.value,
            _f(n.pose.position[0]),
            _f(n.pose.position[1]),
            _f(n.pose.heading),
            n.state,
            "1" if n.on_path else "0",
        ]
        for n in rec.nodes
    ]


def mode_rows(rec: TickRecord) -> List[List[str]]:
    return [
        [
            str(rec.tick),
            str(n.node),
            n.role.value,
            n.state,
            _opt(n.predecessor),
            _opt(n.successor),
            "|".join(n.tasks),
        ]
        for n in rec.nodes
    ]


def packet_row(outcome: RelayOutcome, dt: float) -> List[str]:
    pkt = outcome.packet
    delivered = isinstance(outcome, Delivered)
    return [
        str(pkt.seq),
        str(pkt.created_tick),
        _f(pkt.created_tick * dt),
        str(pkt.src),
        str(pkt.dst),
        "delivered" if delivered else "dropped",
        "" if delivered else outcome.reason.value,
        "" if delivered else str(outcome.at),
        str(len(pkt.hop_trace) - 1),
        "|".join(str(u) for u in pkt.hop_trace),
    ]


def _writer(stack: ExitStack, path: Path, header: List[str]):
    f = stack.enter_context(open(path, "w", encoding="utf-8", newline=""))
    w = csv.writer(f, lineterminator="\n")
    w.writerow(header)
    return w


def run(
    scenario: Scenario,
    output_dir: Path,
    progress: bool = True,
    dump_routes: bool = False,
) -> RunReport:
    """
    Steps the scenario until its duration elapses (or, with `stop_on_completion`,
    the agent finishes) and writes the logs into `output_dir`.

    Raises RunIOError when the output cannot be written.
    """
    timing = Timing()
    t0 = time.perf_counter()
    setup = SimSetup.from_scenario(scenario)
    state = init_state(setup)
    timing.setup_s = time.perf_counter() - t0

    output_dir = Path(output_dir)
    bar = TickProgressBar(setup.n_ticks, setup.dt, enabled=progress)
    t_write = 0.0
    t0 = time.perf_counter()
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        with ExitStack() as stack:
            trajectory = _writer(stack, output_dir / "trajectory.csv", TRAJECTORY_HEADER)
            packets = _writer(stack, output_dir / "packets.csv", PACKETS_HEADER)
            modes = _writer(stack, output_dir / "modes.csv", MODES_HEADER)
            while not finished(state, setup):
                state = step(state, setup)
                tw = time.perf_counter()
                rec = state.record
                trajectory.writerows(trajectory_rows(rec))
                modes.writerows(mode_rows(rec))
                packets.writerow(packet_row(rec.packet, setup.dt))
                t_write += time.perf_counter() - tw
                bar.update()
    except OSError as e:
        raise RunIOError(f"Could not write logs to {output_dir}: {e}") from e
    finally:
        bar.close()
    timing.simulate_s = time.perf_counter() - t0 - t_write

    metrics = state.tracker.finish(count_events(state.events))
    level = worst_level(state.events)
    if level is not None and level.value >= EventLevel.WARN.value:
        logger.warning(f"Run finished with fallbacks: {metrics.event_counts}")
    logger.info(
        f"{metrics.packets_sent} packets sent, {metrics.packets_dropped} dropped "
        f"({100 * metrics.delivery_ratio:.2f}% delivered) over {state.time:.1f} s"
    )

    if dump_routes and state.routing is not None:
        names = setup.roster.names()
        for u in setup.roster.nodes:
            logger.info(format_table(state.routing.tables[u], names))

    report = RunReport(
        metrics=metrics,
        delivery_ratio=metrics.delivery_ratio,
        simulated_s=round(state.tick * setup.dt, 6),
        timing=timing,
        config=scenario_to_dict(scenario),
    )
    t0 = time.perf_counter()
    try:
        (output_dir / "scenario.yaml").write_text(
            scenario_to_yaml(scenario), encoding="utf-8"
        )
        timing.write_s = t_write + time.perf_counter() - t0
        (output_dir / "metrics.json").write_text(
            report.to_json(indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    except OSError as e:
        raise RunIOError(f"Could not write results to {output_dir}: {e}") from e
    return report
