"""Star-schema warehouse: dimension upserts, fact loads, integrity checks, atomic publish.

Layout under <workspace>/warehouse/:
    manifest.yaml                        generation, consumed batch ids, parts per table
    tables/<table>/part-<generation>.csv rows added by that generation

A load only becomes visible when publish() swaps the manifest.
"""

import csv
import io
import logging
import os
from dataclasses import dataclass
from datetime import date, tzinfo
from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import yaml

from helpers.workspace_ops import dump_yaml, read_yaml, write_atomic, write_durable
from models.errors import WarehouseError
from models.ping import ReceiptLine
from models.segment import MOVE, STOP, Segment
from models.star_schema import (
    AREA, DIMENSIONS, DM_CALENDAR, DM_CUSTOMERS, DM_MOVEMENT, DM_PRODUCTS, DM_SUPPLIES, FACT_CUST_BEHAVIOUR,
    FACT_SALES, KEY_COLUMNS, MOVE_KEY, ROW_TYPES, STOP_KEY, TABLES, UNKNOWN, UNKNOWN_CUSTOMER_KEY, AreaRow,
    BehaviourFact, CalendarRow, CustomerRow, MovementRow, SalesFact,
)
from models.zone import UNZONED_KEY, UNZONED_NAME
from pipeline.trajectory import visit_starts

logger = logging.getLogger(__name__)

WAREHOUSE_DIR = 'warehouse'
MANIFEST_FILE = 'manifest.yaml'
MARGIN_PLACES = Decimal('0.0001')
DURATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AttributeConflict:
    kind: str
    natural_key: str
    column: str
    existing: str
    incoming: str


@dataclass(frozen=True)
class Violation:
    table: str
    row: int            # 1-based position in the table
    rule: str
    detail: str

    def to_dict(self) -> dict:
        return {'table': self.table, 'row': self.row, 'rule': self.rule, 'detail': self.detail}


def compute_margin(profit: Decimal, revenue: Decimal) -> Decimal:
    """profit / revenue to 4 places (half-even); 0 when there is no revenue."""
    if revenue <= 0:
        return Decimal('0.0000')
    return (profit / revenue).quantize(MARGIN_PLACES, rounding=ROUND_HALF_EVEN)


class Warehouse:
    def __init__(self, workspace: str):
        self.root = os.path.join(workspace, WAREHOUSE_DIR)
        self.generation = 0
        self.consumed_batches: Set[int] = set()
        self.parts: Dict[str, List[str]] = {table: [] for table in TABLES}
        self.rows: Dict[str, list] = {table: [] for table in TABLES}
        self.pending: Dict[str, list] = {table: [] for table in TABLES}
        self.conflicts: List[AttributeConflict] = []
        self.skipped_sales = 0
        self._index: Dict[str, Dict[str, object]] = {kind: {} for kind in DIMENSIONS}
        self._sales_keys: Set[Tuple[str, int]] = set()
        self._behaviour_days: Set[Tuple[int, int]] = set()

    @property
    def manifest_path(self) -> str:
        return os.path.join(self.root, MANIFEST_FILE)

    def exists(self) -> bool:
        return os.path.exists(self.manifest_path)

    @staticmethod
    def open(workspace: str) -> 'Warehouse':
        """Read the last published generation (an empty warehouse when nothing was published)."""
        warehouse = Warehouse(workspace)
        try:
            manifest = read_yaml(warehouse.manifest_path, default={})
        except (OSError, yaml.YAMLError) as e:
            raise WarehouseError('STORAGE_FAILURE', f"cannot read warehouse manifest: {e}")
        if not isinstance(manifest, dict):
            raise WarehouseError('STORAGE_FAILURE', "warehouse manifest is corrupt: not a mapping")
        warehouse.generation = int(manifest.get('generation', 0))
        warehouse.consumed_batches = set(int(b) for b in manifest.get('batches') or [])
        for table, entry in (manifest.get('tables') or {}).items():
            if table not in ROW_TYPES:
                raise WarehouseError('STORAGE_FAILURE', f"warehouse manifest names unknown table {table}")
            warehouse.parts[table] = list(entry.get('parts') or [])
            for part in warehouse.parts[table]:
                warehouse.rows[table].extend(warehouse._read_part(table, part))
        warehouse._build_indexes()
        return warehouse

    def table(self, name: str) -> list:
        """Published rows followed by rows pending in this load."""
        return self.rows[name] + self.pending[name]

    def is_empty(self) -> bool:
        return not any(self.table(name) for name in (FACT_SALES, FACT_CUST_BEHAVIOUR))

    def key_for(self, kind: str, natural_key: str) -> Optional[int]:
        row = self._index[kind].get(natural_key)
        return None if row is None else getattr(row, KEY_COLUMNS[kind])

    def row_for(self, kind: str, natural_key: str):
        return self._index[kind].get(natural_key)

    def rows_by_key(self, kind: str) -> Dict[int, object]:
        column = KEY_COLUMNS[kind]
        return {getattr(row, column): row for row in self.table(kind)}

    def has_behaviour(self, customer_key: int, day_key: int) -> bool:
        return (customer_key, day_key) in self._behaviour_days

    def ensure_reserved_rows(self) -> None:
        """UNZONED area 0, UNKNOWN customer 0, movements STOP=1 and MOVE=2."""
        if self.row_for(AREA, UNZONED_NAME) is None:
            self._add(AREA, AreaRow(UNZONED_KEY, UNZONED_NAME))
        if self.row_for(DM_CUSTOMERS, UNKNOWN) is None:
            self._add(DM_CUSTOMERS, CustomerRow(UNKNOWN_CUSTOMER_KEY, UNKNOWN))
        if self.row_for(DM_MOVEMENT, STOP) is None:
            self._add(DM_MOVEMENT, MovementRow(STOP_KEY, STOP))
        if self.row_for(DM_MOVEMENT, MOVE) is None:
            self._add(DM_MOVEMENT, MovementRow(MOVE_KEY, MOVE))

    def upsert_dimension(self, kind: str, attributes: dict) -> int:
        """
        Return the surrogate key for a dimension member, allocating the next one for new members.

        Args:
            kind: one of the dimension table names
            attributes: row fields except the surrogate key (natural key included)

        Returns:
            int: existing key when the natural key is known (its row is kept as is), else the new key
        """
        if kind not in DIMENSIONS:
            raise WarehouseError('UNKNOWN_LEVEL', f"{kind} is not a dimension")
        row_type = ROW_TYPES[kind]
        column = KEY_COLUMNS[kind]
        if kind == DM_CALENDAR:
            candidate = CalendarRow.for_date(attributes['date'])
        else:
            candidate = row_type(**{column: -1}, **attributes)
        if not candidate.natural_key:
            raise WarehouseError('UNRESOLVED_KEY', f"{kind} member has an empty natural key")

        existing = self._index[kind].get(candidate.natural_key)
        if existing is not None:
            self._report_conflicts(kind, existing, candidate, column)
            return getattr(existing, column)

        if kind == DM_CALENDAR:
            row = candidate
        else:
            used = [getattr(r, column) for r in self.table(kind)]
            row = row_type(**{column: max([0] + used) + 1}, **attributes)
        self._add(kind, row)
        return getattr(row, column)

    def upsert_calendar(self, day: date) -> int:
        return self.upsert_dimension(DM_CALENDAR, {'date': day})

    def load_fact_sales(self, lines: Iterable[ReceiptLine], store_tz: tzinfo,
                        unit_costs: Dict[str, Decimal], stock: Dict[str, int]) -> int:
        """
        Insert one FactSales row per receipt line.

        Lines whose (receipt_id, sku) is already in the warehouse are skipped.

        Raises:
            WarehouseError: UNRESOLVED_KEY for an unknown SKU, customer or unit cost
        """
        inserted = 0
        for line in lines:
            product = self.row_for(DM_PRODUCTS, line.sku_key)
            if product is None:
                raise WarehouseError('UNRESOLVED_KEY', f"receipt {line.receipt_id} references unknown SKU {line.sku_key}")
            if line.sku_key not in unit_costs:
                raise WarehouseError('UNRESOLVED_KEY', f"no unit cost for SKU {line.sku_key}")
            customer_key = self._customer_key(line.customer_id) if not line.is_walk_in else UNKNOWN_CUSTOMER_KEY
            if (line.receipt_id, product.product_key) in self._sales_keys:
                self.skipped_sales += 1
                logger.warning("receipt %s SKU %s already loaded, skipped", line.receipt_id, line.sku_key)
                continue
            day_key = self.upsert_calendar(line.ts.astimezone(store_tz).date())

            revenue = line.line_total
            cost = unit_costs[line.sku_key] * line.quantity
            profit = revenue - cost
            self._add(FACT_SALES, SalesFact(
                product_key=product.product_key,
                customer_key=customer_key,
                date_key=day_key,
                area_key=product.home_area_key,
                receipt_id=line.receipt_id,
                quantity=line.quantity,
                quantity_purchased=line.quantity,
                sold=line.quantity if revenue > 0 else 0,
                cost=cost,
                revenue=revenue,
                profit=profit,
                total_sales=revenue,
                margin=compute_margin(profit, revenue),
                stock=stock.get(line.sku_key, 0),
            ))
            inserted += 1
        return inserted

    def load_fact_behaviour(self, customer_id: str, day: date, segments: Sequence[Segment]) -> int:
        """
        Insert one FactCustBehaviour row per attributed segment of one customer-day.

        Raises:
            WarehouseError: UNRESOLVED_KEY for an unknown customer or zone
        """
        customer_key = self._customer_key(customer_id)
        day_key = self.upsert_calendar(day)
        areas = {row.area_key for row in self.table(AREA)}
        for seg, starts in zip(segments, visit_starts(segments)):
            area_key = UNZONED_KEY if seg.area_key is None else seg.area_key
            if area_key not in areas:
                raise WarehouseError('UNRESOLVED_KEY', f"segment of {customer_id} is attributed to unknown zone {area_key}")
            self._add(FACT_CUST_BEHAVIOUR, BehaviourFact(
                customer_key=customer_key,
                date_key=day_key,
                area_key=area_key,
                movement_key=STOP_KEY if seg.kind == STOP else MOVE_KEY,
                t_start=seg.t_start,
                t_end=seg.t_end,
                x=seg.anchor_x,
                y=seg.anchor_y,
                speed_m_s=seg.mean_speed_m_s,
                distance_m=seg.distance_m,
                duration_s=seg.duration_s,
                visit_start=1 if starts else 0,
            ))
        self._behaviour_days.add((customer_key, day_key))
        return len(segments)

    def integrity_check(self) -> List[Violation]:
        """Foreign keys, sales identities, calendar hierarchy and behaviour durations; empty list = healthy."""
        violations: List[Violation] = []
        keys = {kind: set(self.rows_by_key(kind)) for kind in DIMENSIONS}

        for n, row in enumerate(self.table(DM_CALENDAR), start=1):
            expected = CalendarRow.for_date(row.date)
            if row != expected:
                violations.append(Violation(DM_CALENDAR, n, 'CALENDAR_HIERARCHY',
                                            f"date_key {row.date_key} disagrees with date {row.date.isoformat()}"))

        for n, row in enumerate(self.table(DM_PRODUCTS), start=1):
            if row.supplier_key not in keys[DM_SUPPLIES]:
                violations.append(Violation(DM_PRODUCTS, n, 'FOREIGN_KEY', f"supplier_key {row.supplier_key} not in {DM_SUPPLIES}"))
            if row.home_area_key not in keys[AREA]:
                violations.append(Violation(DM_PRODUCTS, n, 'FOREIGN_KEY', f"home_area_key {row.home_area_key} not in {AREA}"))

        for n, row in enumerate(self.table(FACT_SALES), start=1):
            for column, kind in (('product_key', DM_PRODUCTS), ('customer_key', DM_CUSTOMERS),
                                 ('date_key', DM_CALENDAR), ('area_key', AREA)):
                if getattr(row, column) not in keys[kind]:
                    violations.append(Violation(FACT_SALES, n, 'FOREIGN_KEY', f"{column} {getattr(row, column)} not in {kind}"))
            if row.profit != row.revenue - row.cost:
                violations.append(Violation(FACT_SALES, n, 'PROFIT_IDENTITY',
                                            f"profit {row.profit} != revenue {row.revenue} - cost {row.cost}"))
            if row.margin != compute_margin(row.profit, row.revenue):
                violations.append(Violation(FACT_SALES, n, 'MARGIN_IDENTITY',
                                            f"margin {row.margin} != {compute_margin(row.profit, row.revenue)}"))
            if row.total_sales != row.revenue:
                violations.append(Violation(FACT_SALES, n, 'TOTAL_SALES_IDENTITY',
                                            f"total_sales {row.total_sales} != revenue {row.revenue}"))

        for n, row in enumerate(self.table(FACT_CUST_BEHAVIOUR), start=1):
            for column, kind in (('customer_key', DM_CUSTOMERS), ('date_key', DM_CALENDAR),
                                 ('area_key', AREA), ('movement_key', DM_MOVEMENT)):
                if getattr(row, column) not in keys[kind]:
                    violations.append(Violation(FACT_CUST_BEHAVIOUR, n, 'FOREIGN_KEY',
                                                f"{column} {getattr(row, column)} not in {kind}"))
            span = (row.t_end - row.t_start).total_seconds()
            if abs(row.duration_s - span) > DURATION_TOLERANCE * max(1.0, span):
                violations.append(Violation(FACT_CUST_BEHAVIOUR, n, 'DURATION_IDENTITY',
                                            f"duration_s {row.duration_s} != t_end - t_start {span}"))
        return violations

    def publish(self, batch_ids: Iterable[int] = ()) -> int:
        """
        Write pending rows as new part files, then swap the manifest.

        Returns:
            int: the published generation (unchanged when there was nothing to publish)
        """
        new_batches = set(batch_ids) - self.consumed_batches
        if not new_batches and not any(self.pending.values()):
            return self.generation
        generation = self.generation + 1
        part = f"part-{generation:06d}.csv"
        try:
            for table in TABLES:
                if self.pending[table]:
                    write_durable(os.path.join(self.root, 'tables', table, part), _table_csv(table, self.pending[table]))
            parts = {table: self.parts[table] + ([part] if self.pending[table] else []) for table in TABLES}
            manifest = {
                'generation': generation,
                'batches': sorted(self.consumed_batches | new_batches),
                'tables': {table: {'parts': parts[table], 'rows': len(self.table(table))} for table in TABLES},
            }
            write_atomic(self.manifest_path, dump_yaml(manifest))
        except OSError as e:
            raise WarehouseError('STORAGE_FAILURE', f"cannot publish warehouse generation {generation}: {e}")

        for table in TABLES:
            self.rows[table].extend(self.pending[table])
            self.pending[table] = []
        self.parts = parts
        self.generation = generation
        self.consumed_batches |= new_batches
        logger.info("published warehouse generation %d", generation)
        return generation

    def export_tables(self, out_dir: str) -> List[str]:
        """One CSV per table with its documented header."""
        paths = []
        try:
            os.makedirs(out_dir, exist_ok=True)
            for table in TABLES:
                path = os.path.join(out_dir, f"{table}.csv")
                write_durable(path, _table_csv(table, self.table(table)))
                paths.append(path)
        except OSError as e:
            raise WarehouseError('STORAGE_FAILURE', f"cannot export tables to {out_dir}: {e}")
        return paths

    def counts(self) -> Dict[str, int]:
        return {table: len(self.table(table)) for table in TABLES}

    def _customer_key(self, customer_id: str) -> int:
        key = self.key_for(DM_CUSTOMERS, customer_id)
        if key is None:
            raise WarehouseError('UNRESOLVED_KEY', f"customer {customer_id} has no demographics row")
        return key

    def _add(self, table: str, row) -> None:
        self.pending[table].append(row)
        self._index_row(table, row)

    def _index_row(self, table: str, row) -> None:
        if table in self._index:
            self._index[table][row.natural_key] = row
        elif table == FACT_SALES:
            self._sales_keys.add((row.receipt_id, row.product_key))
        elif table == FACT_CUST_BEHAVIOUR:
            self._behaviour_days.add((row.customer_key, row.date_key))

    def _build_indexes(self) -> None:
        for table in TABLES:
            for row in self.rows[table]:
                self._index_row(table, row)

    def _report_conflicts(self, kind: str, existing, candidate, key_column: str) -> None:
        old, new = existing.to_dict(), candidate.to_dict()
        for column in type(existing).HEADER:
            if column != key_column and old[column] != new[column]:
                conflict = AttributeConflict(kind, existing.natural_key, column, old[column], new[column])
                self.conflicts.append(conflict)
                logger.warning("ATTRIBUTE_CONFLICT %s %s: %s is %r, incoming %r; existing row kept",
                               kind, conflict.natural_key, column, conflict.existing, conflict.incoming)

    def _read_part(self, table: str, part: str) -> list:
        path = os.path.join(self.root, 'tables', table, part)
        row_type = ROW_TYPES[table]
        try:
            with open(path, 'r', encoding='utf-8', newline='') as f:
                return [row_type.from_dict(record) for record in csv.DictReader(f)]
        except OSError as e:
            raise WarehouseError('STORAGE_FAILURE', f"cannot read {table}/{part}: {e}")
        except (KeyError, ValueError, TypeError, InvalidOperation) as e:
            raise WarehouseError('STORAGE_FAILURE', f"{table}/{part} is corrupt: {e}")


def _table_csv(table: str, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(ROW_TYPES[table].HEADER), lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow(row.to_dict())
    return buf.getvalue()
