from typing import Optional

import tqdm


class TickProgressBar:
    """
    Progress over simulation ticks, shown in simulated seconds.
    """

    def __init__(self, total_ticks: int, dt: float, enabled: bool = True):
        self.__dt = dt
        self.__tqdm: Optional[tqdm.tqdm] = (
            tqdm.tqdm(total=round(total_ticks * dt, 1), unit="s", unit_scale=False)
            if enabled
            else None
        )

    def update(self, ticks: int = 1) -> None:
        if self.__tqdm is not None:
            self.__tqdm.update(n=round(ticks * self.__dt, 6))

    def close(self) -> None:
        if self.__tqdm is not None:
            self.__tqdm.close()
