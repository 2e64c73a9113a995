"""Stage-2 ETL: move LOADED staging batches into the warehouse in one published generation."""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, List, Tuple

from models.config_model import AppConfig
from models.errors import StagingError, WarehouseError
from models.ping import Ping
from models.staging_batch import LOADED
from models.star_schema import AREA, DM_CUSTOMERS, DM_PRODUCTS, DM_SUPPLIES, FACT_CUST_BEHAVIOUR, FACT_SALES, date_key
from models.zone import StoreMap
from helpers.config_ops import segmentation_params
from pipeline.ingest import PINGS, POS
from pipeline.reference import CatalogueEntry, Demographics
from pipeline.staging import StagingStore
from pipeline.trajectory import attribute_zones, check_time_conservation, order_track, segment
from pipeline.warehouse import Warehouse

logger = logging.getLogger(__name__)


@dataclass
class LoadSummary:
    generation: int = 0
    batches: List[int] = field(default_factory=list)
    inserted: Dict[str, int] = field(default_factory=dict)
    table_rows: Dict[str, int] = field(default_factory=dict)
    customer_days: int = 0
    segments: int = 0
    orphan_pings: int = 0
    status_conflicts: int = 0
    late_pings: int = 0
    skipped_sales_lines: int = 0
    attribute_conflicts: int = 0

    def to_dict(self) -> dict:
        return {
            'generation': self.generation,
            'batches': list(self.batches),
            'inserted': dict(sorted(self.inserted.items())),
            'table_rows': dict(sorted(self.table_rows.items())),
            'customer_days': self.customer_days,
            'segments': self.segments,
            'orphan_pings': self.orphan_pings,
            'status_conflicts': self.status_conflicts,
            'late_pings': self.late_pings,
            'skipped_sales_lines': self.skipped_sales_lines,
            'attribute_conflicts': self.attribute_conflicts,
        }


def run_load(workspace: str, store_map: StoreMap, catalogue: List[CatalogueEntry],
             unit_costs: Dict, demographics: List[Demographics], config: AppConfig) -> LoadSummary:
    """
    Transform every LOADED staging batch not yet in the warehouse and publish the result.

    Raises:
        StagingError: MISSING_STAGE when nothing was ever staged
        WarehouseError: UNRESOLVED_KEY aborts the whole load; staging stays LOADED
        TrajectoryError: INVARIANT_VIOLATION when segments do not conserve time
    """
    staging = StagingStore(workspace)
    if not staging.exists():
        raise StagingError('MISSING_STAGE', "nothing staged in this workspace; run ingest first")
    warehouse = Warehouse.open(workspace)
    before = warehouse.counts()

    # a crash between publish and mark_transformed leaves consumed batches LOADED
    recovered = [b.batch_id for b in staging.list_batches(LOADED) if b.batch_id in warehouse.consumed_batches]
    if recovered:
        logger.info("marking batches %s transformed after an interrupted load", recovered)
        staging.mark_transformed(recovered)

    batches = [b for b in staging.list_batches(LOADED) if b.batch_id not in warehouse.consumed_batches]
    summary = LoadSummary(batches=[b.batch_id for b in batches])

    warehouse.ensure_reserved_rows()
    zone_keys = load_dimensions(warehouse, store_map, catalogue, demographics)

    pings: List[Ping] = []
    receipts = []
    for batch in batches:
        if batch.kind not in (PINGS, POS):
            raise StagingError('STORAGE_FAILURE', f"batch {batch.batch_id} has unknown kind {batch.kind}")
        (pings if batch.kind == PINGS else receipts).extend(staging.load_batch_rows(batch))

    _load_behaviour(warehouse, pings, store_map, zone_keys, config, summary)
    stock = {entry.sku_key: entry.stock_on_hand for entry in catalogue}
    warehouse.load_fact_sales(receipts, config.tzinfo, unit_costs, stock)

    summary.generation = warehouse.publish(summary.batches)
    staging.mark_transformed(summary.batches)

    after = warehouse.counts()
    summary.inserted = {table: after[table] - before.get(table, 0) for table in after}
    summary.table_rows = after
    summary.skipped_sales_lines = warehouse.skipped_sales
    summary.attribute_conflicts = len(warehouse.conflicts)
    logger.info("load published generation %d: %d sales rows, %d behaviour rows",
                summary.generation, summary.inserted[FACT_SALES], summary.inserted[FACT_CUST_BEHAVIOUR])
    return summary


def load_dimensions(warehouse: Warehouse, store_map: StoreMap, catalogue: List[CatalogueEntry],
                    demographics: List[Demographics]) -> Dict[int, int]:
    """Upsert zones, suppliers, products and customers; returns store-map zone key -> warehouse area key."""
    zone_keys = {}
    for zone in store_map.zones:
        zone_keys[zone.area_key] = warehouse.upsert_dimension(AREA, {
            'area_name': zone.area_name, 'x0': zone.x0, 'y0': zone.y0, 'x1': zone.x1, 'y1': zone.y1,
            'sequence_index': zone.sequence_index,
        })
    for entry in catalogue:
        supplier_key = warehouse.upsert_dimension(DM_SUPPLIES, {'supplier_name': entry.supplier_name})
        home_area_key = warehouse.key_for(AREA, entry.home_area_name)
        if home_area_key is None:
            raise WarehouseError('UNRESOLVED_KEY', f"SKU {entry.sku_key} is homed in unknown zone {entry.home_area_name}")
        warehouse.upsert_dimension(DM_PRODUCTS, {
            'sku_key': entry.sku_key, 'product_name': entry.product_name, 'category': entry.category,
            'unit_price': entry.unit_price, 'supplier_key': supplier_key, 'home_area_key': home_area_key,
        })
    for person in demographics:
        warehouse.upsert_dimension(DM_CUSTOMERS, {
            'customer_id': person.customer_id, 'gender': person.gender, 'age': person.age,
            'location': person.location,
        })
    return zone_keys


def group_customer_days(pings: List[Ping], config: AppConfig) -> Dict[Tuple[str, date], List[Ping]]:
    """Pings keyed by (customer_id, store-local date)."""
    groups: Dict[Tuple[str, date], List[Ping]] = defaultdict(list)
    tz = config.tzinfo
    for ping in pings:
        groups[(ping.customer_id, ping.ts.astimezone(tz).date())].append(ping)
    return groups


def _load_behaviour(warehouse: Warehouse, pings: List[Ping], store_map: StoreMap, zone_keys: Dict[int, int],
                    config: AppConfig, summary: LoadSummary) -> None:
    params = segmentation_params(config)
    groups = group_customer_days(pings, config)
    for (customer_id, day) in sorted(groups):
        group = groups[(customer_id, day)]
        customer_key = warehouse.key_for(DM_CUSTOMERS, customer_id)
        if customer_key is not None and warehouse.has_behaviour(customer_key, date_key(day)):
            summary.late_pings += len(group)
            logger.warning("%d late pings for %s on %s skipped; that day is already loaded",
                           len(group), customer_id, day.isoformat())
            continue
        series = order_track(group)
        result = segment(series, params)
        check_time_conservation(series, result, params.max_gap_s)
        segments = [s.with_area(zone_keys.get(s.area_key)) for s in attribute_zones(result.segments, store_map)]
        summary.segments += warehouse.load_fact_behaviour(customer_id, day, segments)
        summary.customer_days += 1
        summary.orphan_pings += result.orphan_pings
        summary.status_conflicts += result.status_conflicts
