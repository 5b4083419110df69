import pandas as pd

from .summarize import LOSS_COLUMNS, read_packet_log, summarize, write_loss

DT = 0.1


def _packets(dropped_ticks, n_ticks=200):
    rows = []
    for t in range(n_ticks):
        dropped = t in dropped_ticks
        rows.append(
            {
                "seq": t,
                "created_tick": t,
                "time": round(t * DT, 6),
                "src": 2,
                "dst": 0,
                "outcome": "dropped" if dropped else "delivered",
                "reason": "NoRoute" if dropped else "",
                "at": 2 if dropped else "",
                "hops": 0 if dropped else 2,
                "hop_trace": "2" if dropped else "2|1|0",
            }
        )
    return pd.DataFrame(rows)


def test_no_drops_is_flat_zero():
    loss = summarize(_packets(set()))
    assert list(loss.columns) == LOSS_COLUMNS
    assert len(loss) == 200
    assert (loss["cumulative_dropped"] == 0).all()
    assert (loss["window_dropped"] == 0).all()
    assert (loss["sent"] == 1).all()


def test_single_burst():
    burst = set(range(50, 80))
    loss = summarize(_packets(burst), window=10.0)
    assert loss["dropped"].sum() == 30
    assert loss["cumulative_dropped"].iloc[-1] == 30
    assert loss["window_dropped"].max() == 30
    # the 100-tick window keeps the last dropped tick, 79, until tick 178
    spike = loss.index[loss["window_dropped"] > 0]
    assert (spike.min(), spike.max()) == (50, 178)
    assert loss.loc[loss["tick"] == 60, "window_dropped"].item() == 11


def test_short_window():
    loss = summarize(_packets({10, 11, 30}), window=0.5)
    assert loss.loc[loss["tick"] == 11, "window_dropped"].item() == 2
    assert loss.loc[loss["tick"] == 16, "window_dropped"].item() == 0
    assert loss.loc[loss["tick"] == 30, "window_dropped"].item() == 1
    assert loss["time"].iloc[30] == 3.0


def test_empty_log():
    loss = summarize(_packets(set(), n_ticks=0))
    assert list(loss.columns) == LOSS_COLUMNS
    assert loss.empty


def test_csv_round_trip(tmp_path):
    _packets({3, 4}, n_ticks=20).to_csv(tmp_path / "packets.csv", index=False)
    loss = summarize(read_packet_log(tmp_path / "packets.csv"))
    assert loss["dropped"].sum() == 2
    write_loss(loss, tmp_path / "loss.csv")
    text = (tmp_path / "loss.csv").read_text()
    assert text.splitlines()[0] == ",".join(LOSS_COLUMNS)
    assert len(text.splitlines()) == 21
