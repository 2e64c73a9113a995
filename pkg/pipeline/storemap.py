"""Store floor plan: zone file parsing, validation and point location."""

import csv
import io
import logging
import math
from typing import List, Optional, Union

from helpers.validation import validate_finite
from models.errors import StoreMapError
from models.zone import Bounds, StoreMap, Zone

logger = logging.getLogger(__name__)

ZONE_HEADER = ['area_name', 'x0', 'y0', 'x1', 'y1', 'sequence_index']
BOUNDS_DIRECTIVE = '# bounds='


def load_map(source: Union[str, bytes]) -> StoreMap:
    """
    Parse a zone-definition CSV document into a validated StoreMap.

    Surrogate keys are assigned 1..N in file order. Lines starting with '#'
    are comments, except an optional '# bounds=x0,y0,x1,y1' directive that
    fixes the enclosing rectangle (default: bounding box of the zones).
    """
    if isinstance(source, bytes):
        try:
            source = source.decode('utf-8-sig')
        except UnicodeDecodeError as e:
            raise StoreMapError('MALFORMED_ROW', f"zone file is not UTF-8: {e}", {'line': None})
    source = source.lstrip('\ufeff')

    zones: List[Zone] = []
    bounds: Optional[Bounds] = None
    header_seen = False
    for line_no, line in enumerate(source.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith('#'):
            if stripped.replace(' ', '').startswith(BOUNDS_DIRECTIVE.replace(' ', '')):
                bounds = _parse_bounds(stripped.split('=', 1)[1], line_no)
            continue
        try:
            fields = next(csv.reader([line]))
        except csv.Error as e:
            raise StoreMapError('MALFORMED_ROW', f"line {line_no}: {e}", {'line': line_no})
        if not header_seen:
            if [f.strip() for f in fields] != ZONE_HEADER:
                raise StoreMapError('MALFORMED_ROW', f"line {line_no}: expected header {','.join(ZONE_HEADER)}", {'line': line_no})
            header_seen = True
            continue
        zones.append(_parse_zone(fields, len(zones) + 1, line_no))

    _check_unique(zones)
    _check_overlaps(zones)
    if bounds is None and zones:
        bounds = Bounds(
            x0=min(z.x0 for z in zones), y0=min(z.y0 for z in zones),
            x1=max(z.x1 for z in zones), y1=max(z.y1 for z in zones),
        )
    if bounds is not None:
        for zone in zones:
            if not bounds.encloses(zone):
                raise StoreMapError('MALFORMED_ROW', f"zone {zone.area_name!r} lies outside the map bounds", {'zone': zone.area_name})
    store_map = StoreMap(zones=tuple(zones), bounds=bounds)
    logger.debug("Loaded store map with %d zones", len(zones))
    return store_map


def load_map_file(path: str) -> StoreMap:
    with open(path, 'rb') as f:
        return load_map(f.read())


def dump_map(store_map: StoreMap) -> str:
    """Serialize a StoreMap back to the zone-file format (file order preserved)."""
    out = io.StringIO()
    if store_map.bounds is not None:
        b = store_map.bounds
        out.write(f"{BOUNDS_DIRECTIVE}{_num(b.x0)},{_num(b.y0)},{_num(b.x1)},{_num(b.y1)}\n")
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(ZONE_HEADER)
    for zone in store_map.zones:
        writer.writerow([zone.area_name, _num(zone.x0), _num(zone.y0), _num(zone.x1), _num(zone.y1), zone.sequence_index])
    return out.getvalue()


def locate(store_map: StoreMap, x: float, y: float) -> Optional[int]:
    """Return the area_key of the zone containing (x, y), or None for unzoned space."""
    if not (math.isfinite(x) and math.isfinite(y)):
        raise StoreMapError('NON_FINITE_COORDINATE', f"cannot locate non-finite point ({x}, {y})")
    for zone in store_map.zones:
        if zone.contains(x, y):
            return zone.area_key
    return None


def _num(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _parse_bounds(text: str, line_no: int) -> Bounds:
    parts = [p.strip() for p in text.split(',')]
    try:
        x0, y0, x1, y1 = (validate_finite(p) for p in parts)
    except ValueError as e:
        raise StoreMapError('MALFORMED_ROW', f"line {line_no}: bad bounds directive: {e}", {'line': line_no})
    if not (x0 < x1 and y0 < y1):
        raise StoreMapError('MALFORMED_ROW', f"line {line_no}: bounds must satisfy x0 < x1 and y0 < y1", {'line': line_no})
    return Bounds(x0, y0, x1, y1)


def _parse_zone(fields: List[str], area_key: int, line_no: int) -> Zone:
    if len(fields) != len(ZONE_HEADER):
        raise StoreMapError('MALFORMED_ROW', f"line {line_no}: expected {len(ZONE_HEADER)} fields, got {len(fields)}", {'line': line_no})
    name = fields[0].strip()
    if not name:
        raise StoreMapError('MALFORMED_ROW', f"line {line_no}: area_name is empty", {'line': line_no})
    try:
        x0, y0, x1, y1 = (validate_finite(f) for f in fields[1:5])
        sequence_text = fields[5].strip()
        if not sequence_text.isdigit():
            raise ValueError(f"sequence_index must be a non-negative integer, got {fields[5]!r}")
        sequence_index = int(sequence_text)
    except ValueError as e:
        raise StoreMapError('MALFORMED_ROW', f"line {line_no}: {e}", {'line': line_no})
    if not (x0 < x1 and y0 < y1):
        raise StoreMapError('MALFORMED_ROW', f"line {line_no}: zone {name!r} must satisfy x0 < x1 and y0 < y1", {'line': line_no})
    return Zone(area_key, name, x0, y0, x1, y1, sequence_index)


def _check_unique(zones: List[Zone]) -> None:
    names = set()
    sequences = set()
    for zone in zones:
        if zone.area_name in names:
            raise StoreMapError('DUPLICATE_NAME', f"zone name {zone.area_name!r} appears more than once", {'zone': zone.area_name})
        if zone.sequence_index in sequences:
            raise StoreMapError('DUPLICATE_SEQUENCE', f"sequence_index {zone.sequence_index} appears more than once", {'zone': zone.area_name})
        names.add(zone.area_name)
        sequences.add(zone.sequence_index)


def _check_overlaps(zones: List[Zone]) -> None:
    for i, first in enumerate(zones):
        for second in zones[i + 1:]:
            if first.overlap_area(second) > 0:
                raise StoreMapError(
                    'OVERLAPPING_ZONES',
                    f"zones {first.area_name!r} and {second.area_name!r} overlap",
                    {'pair': [first.area_name, second.area_name]},
                )
