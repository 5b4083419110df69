from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional


class EventLevel(Enum):
    INFO = 0
    WARN = 1
    ERROR = 2


@dataclass
class Event:
    level: EventLevel
    tick: int
    node: Optional[int]
    type: str
    description: str


def count_events(events: List[Event]) -> Dict[str, int]:
    """Occurrences per event type, sorted by type."""
    counts = defaultdict(int)
    for e in events:
        counts[e.type] += 1
    return dict(sorted(counts.items()))


def worst_level(events: List[Event]) -> Optional[EventLevel]:
    if not events:
        return None
    return max((e.level for e in events), key=lambda lvl: lvl.value)
