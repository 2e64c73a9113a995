"""Customer journeys: POS and RFID facts joined by customer and day, plus zone conversion."""

import logging
from collections import defaultdict
from datetime import date
from typing import Dict, List, Optional, Set, Tuple

from models.errors import JourneyError
from models.journey import (
    BOTH, NO_FACTS, POS_ONLY, RFID_ONLY, JourneyProfile, PurchaseEntry, ZoneBehaviour, ZoneConversion,
    ZoneConversionFlag,
)
from models.segment import STOP
from models.star_schema import (
    AREA, DM_CUSTOMERS, DM_MOVEMENT, DM_PRODUCTS, FACT_CUST_BEHAVIOUR, FACT_SALES,
    UNKNOWN_CUSTOMER_KEY, date_key,
)
from models.zone import UNZONED_KEY
from pipeline.warehouse import Warehouse

logger = logging.getLogger(__name__)


def build_profile(warehouse: Warehouse, customer_id: str, day: date) -> JourneyProfile:
    """
    Assemble one customer-day's purchases and in-store behaviour.

    Raises:
        JourneyError: UNKNOWN_CUSTOMER when the customer has no facts in either fact table
    """
    customer_key = warehouse.key_for(DM_CUSTOMERS, customer_id)
    if customer_key is None or not _has_any_facts(warehouse, customer_key):
        raise JourneyError('UNKNOWN_CUSTOMER', f"customer {customer_id} appears in neither POS nor RFID facts")
    day_key = date_key(day)
    areas = warehouse.rows_by_key(AREA)
    products = warehouse.rows_by_key(DM_PRODUCTS)
    movements = warehouse.rows_by_key(DM_MOVEMENT)

    purchases: Dict[str, PurchaseEntry] = {}
    receipts: List[str] = []
    bought_in: Set[int] = set()
    for row in warehouse.table(FACT_SALES):
        if row.customer_key != customer_key or row.date_key != day_key:
            continue
        product = products[row.product_key]
        entry = purchases.setdefault(product.sku_key, PurchaseEntry(
            product.sku_key, product.product_name, areas[row.area_key].area_name))
        entry.quantity += row.quantity
        entry.revenue += row.revenue
        if row.receipt_id not in receipts:
            receipts.append(row.receipt_id)
        bought_in.add(row.area_key)

    behaviour: Dict[int, ZoneBehaviour] = {}
    for row in warehouse.table(FACT_CUST_BEHAVIOUR):
        if row.customer_key != customer_key or row.date_key != day_key:
            continue
        zone = behaviour.setdefault(row.area_key, ZoneBehaviour(areas[row.area_key].area_name))
        zone.dwell_s += row.duration_s
        if movements[row.movement_key].movement == STOP:
            zone.stop_s += row.duration_s
        zone.visit_count += row.visit_start
        zone.distance_m += row.distance_m

    visited = {key for key, zone in behaviour.items() if zone.dwell_s > 0}
    conversions = [
        ZoneConversionFlag(area.area_name, area.area_key in visited, area.area_key in bought_in)
        for area in sorted(areas.values(), key=_area_order)
        if area.area_key in visited or area.area_key in bought_in
    ]
    return JourneyProfile(
        customer_id=customer_id,
        date=day,
        coverage=_coverage(bool(purchases), bool(behaviour)),
        purchases=[purchases[sku] for sku in sorted(purchases)],
        receipts=sorted(receipts),
        behaviour=[behaviour[key] for key in sorted(behaviour, key=lambda k: _area_order(areas[k]))],
        conversions=conversions,
    )


def zone_conversion(warehouse: Warehouse, date_from: Optional[date] = None,
                    date_to: Optional[date] = None) -> List[ZoneConversion]:
    """
    Per zone: distinct visiting customer-days, distinct buying customer-days, buyers / visitors.

    Walk-in receipts have no tracked customer and are left out of the buyer count.

    Raises:
        JourneyError: EMPTY_RANGE for an inverted range or one holding no facts
    """
    if date_from and date_to and date_from > date_to:
        raise JourneyError('EMPTY_RANGE', f"range {date_from} .. {date_to} is empty")
    low = date_key(date_from) if date_from else None
    high = date_key(date_to) if date_to else None

    def in_range(key: int) -> bool:
        return (low is None or key >= low) and (high is None or key <= high)

    dwell: Dict[Tuple[int, int, int], float] = defaultdict(float)
    for row in warehouse.table(FACT_CUST_BEHAVIOUR):
        if in_range(row.date_key):
            dwell[(row.area_key, row.customer_key, row.date_key)] += row.duration_s
    buyers: Dict[int, Set[Tuple[int, int]]] = defaultdict(set)
    sales_in_range = False
    for row in warehouse.table(FACT_SALES):
        if not in_range(row.date_key):
            continue
        sales_in_range = True
        if row.customer_key != UNKNOWN_CUSTOMER_KEY:
            buyers[row.area_key].add((row.customer_key, row.date_key))
    if not dwell and not sales_in_range:
        raise JourneyError('EMPTY_RANGE', "no facts fall inside the requested range")

    visitors: Dict[int, Set[Tuple[int, int]]] = defaultdict(set)
    for (area_key, customer_key, day_key), seconds in dwell.items():
        if seconds > 0:
            visitors[area_key].add((customer_key, day_key))

    results = []
    for area in sorted(warehouse.table(AREA), key=_area_order):
        result = ZoneConversion(area.area_name, len(visitors[area.area_key]), len(buyers[area.area_key]))
        if result.buyers_exceed_visitors:
            logger.warning("zone %s has %d buyers but %d visitors", area.area_name, result.buyers, result.visitors)
        results.append(result)
    return results


def _has_any_facts(warehouse: Warehouse, customer_key: int) -> bool:
    return any(row.customer_key == customer_key for row in warehouse.table(FACT_SALES)) or \
        any(row.customer_key == customer_key for row in warehouse.table(FACT_CUST_BEHAVIOUR))


def _coverage(has_pos: bool, has_rfid: bool) -> str:
    if has_pos and has_rfid:
        return BOTH
    if has_pos:
        return POS_ONLY
    if has_rfid:
        return RFID_ONLY
    return NO_FACTS


def _area_order(area) -> Tuple[int, int]:
    # zones by sequence, UNZONED last
    if area.area_key == UNZONED_KEY:
        return (1, 0)
    return (0, area.sequence_index if area.sequence_index is not None else 0)
