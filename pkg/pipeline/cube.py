"""Aggregation engine over the published warehouse: rollups, drill-down checks, heatmaps.

Money is summed as integer cents so every fixed-point total is exact; margin is
recomputed from the summed profit and revenue at each grain.
"""

import logging
from dataclasses import dataclass, field
from datetime import date
from decimal import Decimal
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from models.errors import CubeError
from models.star_schema import (
    AREA, DM_CALENDAR, DM_CUSTOMERS, DM_MOVEMENT, DM_PRODUCTS, DM_SUPPLIES, FACT_CUST_BEHAVIOUR, FACT_SALES,
    UNKNOWN,
)
from models.zone import UNZONED_KEY, UNZONED_NAME, StoreMap
from pipeline.storemap import locate
from pipeline.warehouse import Warehouse, compute_margin

logger = logging.getLogger(__name__)

CALENDAR_LEVELS = ('year', 'quarter', 'month', 'day')
SHARED_LEVELS = CALENDAR_LEVELS + ('zone', 'customer', 'gender', 'age_band')
SALES_LEVELS = SHARED_LEVELS + ('product', 'supplier', 'category')
BEHAVIOUR_LEVELS = SHARED_LEVELS + ('movement',)
LEVELS = SHARED_LEVELS + ('product', 'supplier', 'category', 'movement')

MONEY_MEASURES = ('revenue', 'cost', 'profit')
SALES_MEASURES = ('quantity',) + MONEY_MEASURES + ('margin',)
BEHAVIOUR_MEASURES = ('dwell_s', 'stop_s', 'visit_count', 'distance_m')
MEASURES = SALES_MEASURES + BEHAVIOUR_MEASURES
FLOAT_MEASURES = ('dwell_s', 'stop_s', 'distance_m')
NON_ADDITIVE = ('margin',)
HEATMAP_MEASURES = ('dwell_s', 'visit_count', 'revenue')
CALENDAR_DRILL_PAIRS = (('year', 'quarter'), ('quarter', 'month'), ('month', 'day'), ('year', 'day'))

AGE_BANDS = ((0, 17, '0-17'), (18, 24, '18-24'), (25, 34, '25-34'), (35, 44, '35-44'),
             (45, 54, '45-54'), (55, 64, '55-64'))
FLOAT_TOLERANCE = 1e-9


@dataclass
class CubeQuery:
    measures: Tuple[str, ...]
    group_by: Tuple[str, ...] = ()
    filters: Dict[str, str] = field(default_factory=dict)
    date_from: Optional[date] = None
    date_to: Optional[date] = None

    def validate(self) -> None:
        if not self.measures:
            raise CubeError('UNKNOWN_MEASURE', "a query needs at least one measure")
        for measure in self.measures:
            if measure not in MEASURES:
                raise CubeError('UNKNOWN_MEASURE', f"unknown measure {measure!r}; known: {', '.join(MEASURES)}")
        for level in tuple(self.group_by) + tuple(self.filters):
            if level not in LEVELS:
                raise CubeError('UNKNOWN_LEVEL', f"unknown level {level!r}; known: {', '.join(LEVELS)}")
        if len(set(self.group_by)) != len(self.group_by):
            raise CubeError('UNKNOWN_LEVEL', "group_by levels must be distinct")
        for measure in self.measures:
            allowed = SALES_LEVELS if measure in SALES_MEASURES else BEHAVIOUR_LEVELS
            for level in tuple(self.group_by) + tuple(self.filters):
                if level not in allowed:
                    raise CubeError('LEVEL_NOT_APPLICABLE', f"level {level!r} does not apply to measure {measure!r}")
        if self.date_from and self.date_to and self.date_from > self.date_to:
            raise CubeError('EMPTY_RANGE', f"range {self.date_from} .. {self.date_to} is empty")


@dataclass
class ResultTable:
    """Group-level columns then measure columns; rows sorted by group key, one row per key."""
    header: List[str]
    rows: List[list]

    def to_records(self) -> List[dict]:
        return [dict(zip(self.header, row)) for row in self.rows]

    def to_dict(self) -> dict:
        return {'header': list(self.header), 'rows': [[_plain(value) for value in row] for row in self.rows]}


@dataclass
class HierarchyReport:
    measure: str
    parent_level: str
    child_level: str
    parents_checked: int = 0
    violations: List[dict] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            'measure': self.measure,
            'parent_level': self.parent_level,
            'child_level': self.child_level,
            'parents_checked': self.parents_checked,
            'consistent': self.consistent,
            'violations': list(self.violations),
        }


@dataclass
class Heatmap:
    measure: str
    date_from: Optional[date]
    date_to: Optional[date]
    zones: List[Tuple[str, object]]   # (area_name, value) in sequence order, UNZONED last

    def value(self, area_name: str):
        return dict(self.zones)[area_name]

    def to_dict(self) -> dict:
        return {
            'measure': self.measure,
            'date_from': self.date_from.isoformat() if self.date_from else None,
            'date_to': self.date_to.isoformat() if self.date_to else None,
            'zones': [{'area_name': name, 'value': _plain(value)} for name, value in self.zones],
        }


def age_band(age: Optional[int]) -> str:
    if age is None:
        return UNKNOWN
    for low, high, label in AGE_BANDS:
        if low <= age <= high:
            return label
    return '65+'


class Cube:
    """Fact frames with every level resolved to its encoded value, built once per warehouse snapshot."""

    def __init__(self, warehouse: Warehouse):
        if warehouse.is_empty():
            raise CubeError('EMPTY_WAREHOUSE', "the warehouse holds no facts; run load first")
        self.warehouse = warehouse
        self.sales = self._sales_frame()
        self.behaviour = self._behaviour_frame()

    def rollup(self, query: CubeQuery) -> ResultTable:
        """
        Group-and-sum the requested measures.

        Sales and behaviour measures in one query are aggregated per fact and
        outer-joined on the group key; missing cells are 0.
        """
        query.validate()
        levels = list(query.group_by)
        parts = []
        sales_measures = [m for m in query.measures if m in SALES_MEASURES]
        behaviour_measures = [m for m in query.measures if m in BEHAVIOUR_MEASURES]
        if sales_measures:
            parts.append(self._aggregate(self.sales, query, levels, _sales_columns(sales_measures)))
        if behaviour_measures:
            parts.append(self._aggregate(self.behaviour, query, levels, behaviour_measures))

        merged = parts[0]
        for part in parts[1:]:
            if levels:
                merged = merged.merge(part, on=levels, how='outer')
            else:
                merged = pd.concat([merged, part], axis=1)
        if merged.empty:
            return ResultTable(header=levels + list(query.measures), rows=[])
        if levels:
            merged = merged.sort_values(levels, kind='mergesort').reset_index(drop=True)

        rows = []
        for record in merged.to_dict('records'):
            row = [record[level] for level in levels]
            for measure in query.measures:
                row.append(_measure_value(measure, record))
            rows.append(row)
        return ResultTable(header=levels + list(query.measures), rows=rows)

    def hierarchy_consistency(self, measure: str, parent_level: str, child_level: str) -> HierarchyReport:
        """
        Check that every parent group equals the sum of its child groups.

        Raises:
            CubeError: NON_ADDITIVE_MEASURE for margin; UNKNOWN_LEVEL for a repeated level
        """
        if measure in NON_ADDITIVE:
            raise CubeError('NON_ADDITIVE_MEASURE', f"{measure} is a ratio and does not add up across levels")
        if parent_level == child_level:
            raise CubeError('UNKNOWN_LEVEL', "parent and child levels must differ")
        parents = self.rollup(CubeQuery(measures=(measure,), group_by=(parent_level,)))
        children = self.rollup(CubeQuery(measures=(measure,), group_by=(parent_level, child_level)))
        sums: Dict[str, object] = {}
        for parent, _, value in children.rows:
            sums[parent] = sums.get(parent, 0) + value
        report = HierarchyReport(measure, parent_level, child_level)
        for parent, value in parents.rows:
            report.parents_checked += 1
            total = sums.get(parent, 0)
            if not _equal(measure, value, total):
                report.violations.append({'parent': parent, 'value': _plain(value), 'children_sum': _plain(total)})
        return report

    def calendar_consistency(self) -> List[HierarchyReport]:
        """Every additive measure over every calendar drill-down pair."""
        return [self.hierarchy_consistency(measure, parent, child)
                for parent, child in CALENDAR_DRILL_PAIRS
                for measure in MEASURES if measure not in NON_ADDITIVE]

    def heatmap(self, measure: str, date_from: Optional[date] = None, date_to: Optional[date] = None) -> Heatmap:
        """
        One value per zone in sequence order plus the UNZONED bucket.

        Raises:
            CubeError: UNKNOWN_MEASURE outside dwell_s / visit_count / revenue; EMPTY_RANGE for an inverted range
        """
        if measure not in HEATMAP_MEASURES:
            raise CubeError('UNKNOWN_MEASURE', f"heatmap measure must be one of {', '.join(HEATMAP_MEASURES)}")
        table = self.rollup(CubeQuery(measures=(measure,), group_by=('zone',), date_from=date_from, date_to=date_to))
        values = {zone: value for zone, value in table.rows}
        zero = Decimal('0.00') if measure in MONEY_MEASURES else 0.0 if measure in FLOAT_MEASURES else 0
        areas = sorted((row for row in self.warehouse.table(AREA) if row.area_key != UNZONED_KEY),
                       key=lambda row: row.sequence_index)
        zones = [(row.area_name, values.get(row.area_name, zero)) for row in areas]
        zones.append((UNZONED_NAME, values.get(UNZONED_NAME, zero)))
        return Heatmap(measure, date_from, date_to, zones)

    def _aggregate(self, frame: pd.DataFrame, query: CubeQuery, levels: List[str], columns: List[str]) -> pd.DataFrame:
        selected = frame
        for level, value in query.filters.items():
            selected = selected[selected[level] == str(value)]
        if query.date_from is not None:
            selected = selected[selected['day'] >= query.date_from.isoformat()]
        if query.date_to is not None:
            selected = selected[selected['day'] <= query.date_to.isoformat()]
        if selected.empty:
            return pd.DataFrame(columns=levels + columns)
        if levels:
            return selected.groupby(levels, sort=True)[columns].sum().reset_index()
        return selected[columns].sum().to_frame().T

    def _sales_frame(self) -> pd.DataFrame:
        calendar = self.warehouse.rows_by_key(DM_CALENDAR)
        areas = self.warehouse.rows_by_key(AREA)
        products = self.warehouse.rows_by_key(DM_PRODUCTS)
        suppliers = self.warehouse.rows_by_key(DM_SUPPLIES)
        customers = self.warehouse.rows_by_key(DM_CUSTOMERS)
        records = []
        for row in self.warehouse.table(FACT_SALES):
            product = products[row.product_key]
            record = _shared_levels(calendar[row.date_key], areas[row.area_key], customers[row.customer_key])
            record.update({
                'product': product.sku_key,
                'supplier': suppliers[product.supplier_key].supplier_name,
                'category': product.category,
                'quantity': row.quantity,
                'revenue_cents': _cents(row.revenue),
                'cost_cents': _cents(row.cost),
                'profit_cents': _cents(row.profit),
            })
            records.append(record)
        columns = list(SALES_LEVELS) + ['quantity', 'revenue_cents', 'cost_cents', 'profit_cents']
        return pd.DataFrame.from_records(records, columns=columns)

    def _behaviour_frame(self) -> pd.DataFrame:
        calendar = self.warehouse.rows_by_key(DM_CALENDAR)
        areas = self.warehouse.rows_by_key(AREA)
        customers = self.warehouse.rows_by_key(DM_CUSTOMERS)
        movements = self.warehouse.rows_by_key(DM_MOVEMENT)
        records = []
        for row in self.warehouse.table(FACT_CUST_BEHAVIOUR):
            movement = movements[row.movement_key].movement
            record = _shared_levels(calendar[row.date_key], areas[row.area_key], customers[row.customer_key])
            record.update({
                'movement': movement,
                'dwell_s': row.duration_s,
                'stop_s': row.duration_s if movement == 'STOP' else 0.0,
                'visit_count': row.visit_start,
                'distance_m': row.distance_m,
            })
            records.append(record)
        columns = list(BEHAVIOUR_LEVELS) + list(BEHAVIOUR_MEASURES)
        return pd.DataFrame.from_records(records, columns=columns)


def heatmap_raster(heatmap: Heatmap, store_map: StoreMap) -> np.ndarray:
    """
    1 m cells over the map bounds, top row first; each cell holds its zone's value.

    Cells whose centre lies in no zone hold 0.
    """
    bounds = store_map.bounds
    if bounds is None:
        return np.zeros((0, 0))
    width = int(np.ceil(bounds.x1 - bounds.x0))
    height = int(np.ceil(bounds.y1 - bounds.y0))
    values = dict(heatmap.zones)
    raster = np.zeros((height, width), dtype=float)
    for r in range(height):
        y = bounds.y1 - r - 0.5
        for c in range(width):
            key = locate(store_map, bounds.x0 + c + 0.5, y)
            if key is not None:
                raster[r, c] = float(values.get(store_map.area_name(key), 0))
    return raster


def _shared_levels(calendar, area, customer) -> dict:
    return {
        'year': str(calendar.year),
        'quarter': f"{calendar.year}-Q{calendar.quarter}",
        'month': f"{calendar.year}-{calendar.month:02d}",
        'day': calendar.date.isoformat(),
        'zone': area.area_name,
        'customer': customer.customer_id,
        'gender': customer.gender,
        'age_band': age_band(customer.age),
    }


def _sales_columns(measures: Sequence[str]) -> List[str]:
    columns = []
    for measure in measures:
        wanted = ['revenue_cents', 'profit_cents'] if measure == 'margin' else \
            [f"{measure}_cents"] if measure in MONEY_MEASURES else [measure]
        columns.extend(c for c in wanted if c not in columns)
    return columns


def _cents(amount: Decimal) -> int:
    return int(amount.scaleb(2).to_integral_value())


def _from_cents(cents) -> Decimal:
    return Decimal(int(cents)).scaleb(-2).quantize(Decimal('0.01'))


def _measure_value(measure: str, record: dict):
    if measure == 'margin':
        return compute_margin(_from_cents(_zero_nan(record.get('profit_cents'))),
                              _from_cents(_zero_nan(record.get('revenue_cents'))))
    if measure in MONEY_MEASURES:
        return _from_cents(_zero_nan(record.get(f"{measure}_cents")))
    if measure in FLOAT_MEASURES:
        return float(_zero_nan(record.get(measure)))
    return int(_zero_nan(record.get(measure)))


def _zero_nan(value):
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return 0
    return value


def _equal(measure: str, a, b) -> bool:
    if measure in FLOAT_MEASURES:
        return abs(float(a) - float(b)) <= FLOAT_TOLERANCE * max(1.0, abs(float(a)), abs(float(b)))
    return a == b


def _plain(value):
    if isinstance(value, Decimal):
        return str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value
