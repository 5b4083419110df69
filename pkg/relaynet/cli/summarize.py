"""
Packet loss over time from a run's packets.csv.
"""
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

LOSS_COLUMNS = [
    "tick",
    "time",
    "sent",
    "delivered",
    "dropped",
    "cumulative_dropped",
    "window_dropped",
]


def _dt(packets: pd.DataFrame) -> float:
    ticks = packets["created_tick"].to_numpy()
    times = packets["time"].to_numpy()
    moved = ticks > 0
    if not moved.any():
        return 1.0
    return float(np.median(times[moved] / ticks[moved]))


def summarize(packets: pd.DataFrame, window: float = 10.0) -> pd.DataFrame:
    """
    One row per tick from the first packet to the last, ticks without packets
    included. `window_dropped` counts drops over the trailing `window` seconds,
    the current tick included.
    """
    if packets.empty:
        return pd.DataFrame({c: pd.Series(dtype=float if c == "time" else int) for c in LOSS_COLUMNS})

    dt = _dt(packets)
    df = pd.DataFrame(
        {
            "tick": packets["created_tick"].astype(int),
            "sent": 1,
            "delivered": (packets["outcome"] == "delivered").astype(int),
            "dropped": (packets["outcome"] == "dropped").astype(int),
        }
    )
    per_tick = df.groupby("tick").sum()
    ticks = np.arange(per_tick.index.min(), per_tick.index.max() + 1)
    per_tick = per_tick.reindex(ticks, fill_value=0)

    window_ticks = max(1, int(round(window / dt)))
    out = pd.DataFrame(
        {
            "tick": ticks,
            "time": np.round(ticks * dt, 6),
            "sent": per_tick["sent"].to_numpy(),
            "delivered": per_tick["delivered"].to_numpy(),
            "dropped": per_tick["dropped"].to_numpy(),
        }
    )
    out["cumulative_dropped"] = out["dropped"].cumsum()
    out["window_dropped"] = (
        out["dropped"].rolling(window=window_ticks, min_periods=1).sum().astype(int)
    )
    return out[LOSS_COLUMNS]


def read_packet_log(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, dtype={"reason": str, "hop_trace": str}, keep_default_na=False)


def write_loss(loss: pd.DataFrame, path: Union[str, Path]) -> None:
    loss.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
