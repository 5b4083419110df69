import csv
import json
import time
from pathlib import Path

import pandas as pd
import pytest
from relaynet.behavior.types import seconds_to_ticks
from relaynet.mesh.types import Dropped
from relaynet.sim.engine import finished, init_state, SimSetup, step

from .run import (
    MODES_HEADER,
    PACKETS_HEADER,
    run,
    RunIOError,
    RunReport,
    TRAJECTORY_HEADER,
)
from .scenario import load_scenario, parse_scenario, with_overrides
from .summarize import read_packet_log, summarize

LOGS = ["trajectory.csv", "packets.csv", "modes.csv"]
TESTDATA = Path(__file__).parent / "testdata"


def _rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def test_zero_duration_writes_headers_only(tmp_path):
    s = with_overrides(load_scenario("minimal"), duration=0.0)
    report = run(s, tmp_path, progress=False)
    assert report.metrics.packets_sent == 0
    assert report.delivery_ratio == 1.0
    assert _rows(tmp_path / "trajectory.csv") == [TRAJECTORY_HEADER]
    assert _rows(tmp_path / "packets.csv") == [PACKETS_HEADER]
    assert _rows(tmp_path / "modes.csv") == [MODES_HEADER]
    assert (tmp_path / "scenario.yaml").exists()
    assert (tmp_path / "metrics.json").exists()


def test_minimal_run_logs(tmp_path):
    s = with_overrides(load_scenario("minimal"), duration=5.0)
    report = run(s, tmp_path, progress=False)
    n_ticks = 50

    traj = pd.read_csv(tmp_path / "trajectory.csv")
    assert list(traj.columns) == TRAJECTORY_HEADER
    assert len(traj) == 2 * n_ticks
    assert sorted(traj["tick"].unique()) == list(range(n_ticks))
    assert set(traj["role"]) == {"Base", "Agent"}
    assert set(traj.loc[traj["role"] == "Base", "mode"]) == {"Station"}

    packets = read_packet_log(tmp_path / "packets.csv")
    assert len(packets) == n_ticks
    assert (packets["outcome"] == "delivered").all()
    assert (packets["hop_trace"] == "1|0").all()
    assert (packets["hops"] == 1).all()

    modes = pd.read_csv(tmp_path / "modes.csv", keep_default_na=False)
    assert list(modes.columns) == MODES_HEADER
    agent_tasks = modes.loc[modes["role"] == "Agent", "tasks"]
    assert (agent_tasks == "MoveToGoal").all()

    assert report.metrics.packets_delivered == n_ticks
    assert report.simulated_s == 5.0


def test_lf_line_endings(tmp_path):
    run(with_overrides(load_scenario("minimal"), duration=1.0), tmp_path, progress=False)
    for name in LOGS:
        assert b"\r" not in (tmp_path / name).read_bytes()


def test_metrics_json(tmp_path):
    s = with_overrides(load_scenario("minimal"), duration=2.0)
    report = run(s, tmp_path, progress=False)
    doc = json.loads((tmp_path / "metrics.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["log_schema_version"] == 1
    assert doc["metrics"]["packets_sent"] == 20
    assert doc["config"]["base"] == [0.0, 0.0]
    assert set(doc["timing"]) == {"setup_s", "simulate_s", "write_s"}

    back = RunReport.from_json((tmp_path / "metrics.json").read_text())
    assert back.metrics.packets_sent == report.metrics.packets_sent
    assert parse_scenario((tmp_path / "scenario.yaml").read_text()) == s


def test_minimal_matches_golden_logs(tmp_path):
    """Three ticks of the agent driving straight at v_max, written out by hand."""
    golden = TESTDATA / "minimal_3_ticks"
    run(with_overrides(load_scenario("minimal"), duration=0.3), tmp_path, progress=False)
    for name in LOGS:
        assert (tmp_path / name).read_text(encoding="utf-8") == (golden / name).read_text(
            encoding="utf-8"
        ), name

    doc = json.loads((tmp_path / "metrics.json").read_text())
    expected = json.loads((golden / "metrics.json").read_text())
    got, want = doc.pop("metrics"), expected.pop("metrics")
    for key in ("max_displacement", "max_euclidean_distance", "max_route_distance"):
        assert got.pop(key) == pytest.approx(want.pop(key)), key
    assert got == want
    doc.pop("timing")
    doc.pop("config")
    assert doc == expected


def test_same_seed_byte_identical(tmp_path):
    s = with_overrides(load_scenario("relay_freeze"), duration=60.0)
    run(s, tmp_path / "a", progress=False)
    run(s, tmp_path / "b", progress=False)
    for name in LOGS + ["scenario.yaml"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_corridor_logs_byte_identical(tmp_path):
    s = load_scenario("corridor")
    run(s, tmp_path / "a", progress=False)
    run(s, tmp_path / "b", progress=False)
    for name in LOGS:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(RunIOError):
        run(load_scenario("minimal"), blocker / "out", progress=False)


def test_relay_freeze_summary_matches_metrics(tmp_path):
    s = load_scenario("relay_freeze")
    report = run(s, tmp_path, progress=False)
    m = report.metrics
    assert m.packets_dropped > 0

    loss = summarize(read_packet_log(tmp_path / "packets.csv"))
    assert loss["sent"].sum() == m.packets_sent
    assert loss["dropped"].sum() == m.packets_dropped
    assert loss["cumulative_dropped"].iloc[-1] == m.packets_dropped

    modes = pd.read_csv(tmp_path / "modes.csv", keep_default_na=False)
    agent = modes[modes["role"] == "Agent"].reset_index(drop=True)
    halt = agent.index[agent["state"] == "Halt"][0]
    backtrack = agent.index[agent["state"] == "Backtrack"][0]
    assert backtrack - halt == seconds_to_ticks(s.behavior.t_backtrack, s.dt)


def test_corridor_mission():
    """The bundled corridor: out to the far end and back with little loss."""
    s = load_scenario("corridor")
    setup = SimSetup.from_scenario(s)
    tau = seconds_to_ticks(s.radio.tau_route, s.dt)
    agent = setup.roster.agent

    start = time.perf_counter()
    state = init_state(setup)
    drop_ticks = []
    agent_states = []
    while not finished(state, setup):
        state = step(state, setup)
        rec = state.record
        if isinstance(rec.packet, Dropped):
            drop_ticks.append(rec.tick)
        agent_states.append(rec.nodes[agent].state)
    wall_s = time.perf_counter() - start
    m = state.tracker.finish({})

    assert state.agent_mode.completed
    assert m.max_route_distance >= 90.0
    assert m.delivery_ratio >= 0.95
    assert m.free_to_on_path >= 1
    # the far corner is more than two radio ranges from the base
    assert m.max_euclidean_distance > 2 * s.radio.r_max
    assert m.max_on_path >= 2
    assert 700.0 <= m.completion_time <= 2000.0
    assert m.packets_sent == m.packets_delivered + m.packets_dropped
    assert m.max_displacement <= s.control.v_max * s.dt + 1e-12
    assert m.min_wall_distance >= s.obstacles.d_safe / 2
    for t in drop_ticks:
        assert any(0 <= t - c <= tau + 1 for c in m.topology_change_ticks)

    # the agent is halted (or backtracking) exactly when its route is gone, one tick late
    dropped = set(drop_ticks)
    for t, st in enumerate(agent_states):
        if t - 1 in dropped:
            assert st != "Navigate", t
        if st != "Navigate":
            assert t - 1 in dropped or t in dropped, t
    assert wall_s < 30.0
