from dataclasses import dataclass, field, replace
from datetime import date, datetime
from typing import Dict, List, Optional

from models.errors import TrajectoryError

STOP = 'STOP'
MOVE = 'MOVE'
MOVEMENTS = (STOP, MOVE)


@dataclass(frozen=True)
class SegmentationParams:
    stop_radius_m: float = 1.0
    min_stop_duration_s: float = 10.0
    max_gap_s: float = 30.0

    def __post_init__(self):
        for name in ('stop_radius_m', 'min_stop_duration_s', 'max_gap_s'):
            if not getattr(self, name) > 0:
                raise TrajectoryError('INVALID_CONFIG', f"{name} must be strictly positive")


@dataclass(frozen=True)
class Segment:
    """A maximal STOP or MOVE interval of one customer's track."""
    customer_id: str
    kind: str
    t_start: datetime
    t_end: datetime
    distance_m: float
    anchor_x: float
    anchor_y: float
    area_key: Optional[int] = None   # None until attributed; unzoned stays None

    @property
    def duration_s(self) -> float:
        return (self.t_end - self.t_start).total_seconds()

    @property
    def mean_speed_m_s(self) -> float:
        duration = self.duration_s
        return self.distance_m / duration if duration > 0 else 0.0

    def with_area(self, area_key: Optional[int]) -> 'Segment':
        return replace(self, area_key=area_key)


@dataclass
class ZoneDwell:
    customer_id: str
    date: date
    area_key: Optional[int]
    dwell_s: float = 0.0
    visit_count: int = 0
    stop_s: float = 0.0


@dataclass
class SegmentationResult:
    """Segments of one customer-day plus the diagnostics gathered while building them."""
    segments: List[Segment] = field(default_factory=list)
    orphan_pings: int = 0
    gap_split_s: float = 0.0
    status_conflicts: int = 0
    span_s: float = 0.0   # last ts - first ts

    @property
    def covered_s(self) -> float:
        return sum(s.duration_s for s in self.segments)

    def counts(self) -> Dict[str, int]:
        return {kind: sum(1 for s in self.segments if s.kind == kind) for kind in MOVEMENTS}
