from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

UNZONED_KEY = 0
UNZONED_NAME = 'UNZONED'


@dataclass(frozen=True)
class Zone:
    """Axis-aligned store zone, half-open on the high edges: [x0, x1) x [y0, y1)."""
    area_key: int
    area_name: str
    x0: float
    y0: float
    x1: float
    y1: float
    sequence_index: int

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def overlap_area(self, other: 'Zone') -> float:
        width = min(self.x1, other.x1) - max(self.x0, other.x0)
        height = min(self.y1, other.y1) - max(self.y0, other.y0)
        if width <= 0 or height <= 0:
            return 0.0
        return width * height

    @property
    def centroid(self) -> Tuple[float, float]:
        return (self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0

    def to_dict(self) -> dict:
        return {
            'area_key': self.area_key,
            'area_name': self.area_name,
            'x0': self.x0,
            'y0': self.y0,
            'x1': self.x1,
            'y1': self.y1,
            'sequence_index': self.sequence_index,
        }


@dataclass(frozen=True)
class Bounds:
    x0: float
    y0: float
    x1: float
    y1: float

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def encloses(self, zone: Zone) -> bool:
        return (self.x0 <= zone.x0 and self.y0 <= zone.y0
                and zone.x1 <= self.x1 and zone.y1 <= self.y1)


@dataclass(frozen=True)
class StoreMap:
    """Immutable floor plan; zones kept in file order."""
    zones: Tuple[Zone, ...] = ()
    bounds: Optional[Bounds] = None
    _by_key: Dict[int, Zone] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self._by_key.update({zone.area_key: zone for zone in self.zones})

    def zone(self, area_key: int) -> Optional[Zone]:
        return self._by_key.get(area_key)

    def area_name(self, area_key: Optional[int]) -> str:
        if area_key is None or area_key == UNZONED_KEY:
            return UNZONED_NAME
        zone = self._by_key.get(area_key)
        return zone.area_name if zone else UNZONED_NAME

    def in_sequence_order(self) -> List[Zone]:
        return sorted(self.zones, key=lambda z: z.sequence_index)

    def __len__(self) -> int:
        return len(self.zones)
