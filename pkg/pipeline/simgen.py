"""Deterministic synthetic store: scripted walks, correlated purchases and the ground truth behind them.

Every random draw comes from one numpy PCG64 stream seeded with SimConfig.seed,
consumed in this order: product catalogue, customer demographics, then for each
day every customer's trip (itinerary, dwell, walk speed, basket, dwell jitter,
arrival second) followed by that day's walk-in receipts, and finally the
corrupted-row picks for pings and POS lines.
"""

import csv
import io
import logging
import math
import os
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from helpers.validation import CENT
from helpers.workspace_ops import dump_yaml, write_atomic
from models.config_model import parse_utc_offset
from models.errors import SimConfigError, WorkspaceError
from models.ground_truth import CorruptedRow, CustomerDay, GroundTruth, TrueLine, TrueReceipt, TrueSegment, ZoneVisit
from models.ping import MIG, SUS
from models.segment import MOVE, STOP
from models.sim_config import SimConfig
from models.zone import StoreMap
from pipeline.ingest import (
    BAD_NUMBER, BAD_STATUS, BAD_TIMESTAMP, MISSING_FIELD, PING_HEADER, POS_HEADER, TOTAL_MISMATCH,
)
from pipeline.reference import CATALOGUE_HEADER, COST_HEADER, DEMOGRAPHICS_HEADER
from pipeline.storemap import dump_map, load_map, load_map_file

logger = logging.getLogger(__name__)

ZONES_FILE = 'zones.csv'
PRODUCTS_FILE = 'products.csv'
COSTS_FILE = 'costs.csv'
DEMOGRAPHICS_FILE = 'demographics.csv'
PINGS_FILE = 'pings.csv'
POS_FILE = 'pos.csv'
GROUND_TRUTH_FILE = 'ground_truth.yaml'
OUTPUT_FILES = (ZONES_FILE, PRODUCTS_FILE, COSTS_FILE, DEMOGRAPHICS_FILE, PINGS_FILE, POS_FILE, GROUND_TRUTH_FILE)

SECONDS_PER_DAY = 86400
WALK_IN_MAX_LINES = 3

# Two rows of four zones with a 4 m walkway between them along y = 10.
EXAMPLE_ZONES = """# bounds=0,0,42,20
area_name,x0,y0,x1,y1,sequence_index
Produce,2,2,10,8,1
Frozen,2,12,10,18,2
Bakery,12,2,20,8,3
Snacks,12,12,20,18,4
Dairy,22,2,30,8,5
Drinks,22,12,30,18,6
Meat,32,2,40,8,7
Household,32,12,40,18,8
"""

SUPPLIERS = ('Northfield Farms', 'Baltic Foods', 'Kama Trading', 'Volga Wholesale')
LOCATIONS = ('Center', 'North', 'South', 'East', 'West')
GENDERS = ('M', 'F')

Row = List[str]
Mangler = Tuple[str, Callable[[Row], Row]]

PING_MANGLERS: Tuple[Mangler, ...] = (
    (BAD_NUMBER, lambda row: row[:2] + ['not-a-number'] + row[3:]),
    (BAD_TIMESTAMP, lambda row: row[:1] + [row[1][:19]] + row[2:]),   # offset stripped
    (MISSING_FIELD, lambda row: row[:4]),
    (BAD_STATUS, lambda row: row[:4] + ['LOST']),
)
POS_MANGLERS: Tuple[Mangler, ...] = (
    (BAD_NUMBER, lambda row: row[:5] + ['two'] + row[6:]),
    (BAD_TIMESTAMP, lambda row: row[:1] + [row[1][:19]] + row[2:]),
    (MISSING_FIELD, lambda row: row[:7]),
    (TOTAL_MISMATCH, lambda row: row[:7] + [f"{Decimal(row[7]) + CENT:.2f}"]),
)


@dataclass(frozen=True)
class SimProduct:
    sku_key: str
    product_name: str
    category: str
    supplier_name: str
    home_area_name: str
    unit_price: Decimal
    unit_cost: Decimal
    stock_on_hand: int


@dataclass
class SimOutput:
    """Generated file texts keyed by file name, plus the ground truth they were drawn from."""
    files: Dict[str, str] = field(default_factory=dict)
    ground_truth: Optional[GroundTruth] = None

    def data(self, name: str) -> bytes:
        return self.files[name].encode('utf-8')


def store_map_for(config: SimConfig) -> StoreMap:
    """The configured zone file, or the built-in two-row example layout."""
    try:
        store_map = load_map_file(config.zone_file) if config.zone_file else load_map(EXAMPLE_ZONES)
    except OSError as e:
        raise SimConfigError('INVALID_CONFIG', f"cannot read zone file {config.zone_file}: {e}")
    if not store_map.zones:
        raise SimConfigError('INVALID_CONFIG', "the simulation needs at least one zone")
    return store_map


def generate(config: SimConfig, store_map: Optional[StoreMap] = None) -> SimOutput:
    """
    Simulate the store and return every output file in memory.

    The same config (seed included) always yields byte-identical files.

    Raises:
        SimConfigError: INVALID_CONFIG when the layout cannot host the configured trips
    """
    simulator = StoreSimulator(config, store_map or store_map_for(config))
    output = simulator.run()
    truth = output.ground_truth
    logger.info("Simulated %d trips, %d receipts, %d corrupted rows (seed %d)",
                len(truth.customer_days), len(truth.receipts), len(truth.corrupted), config.seed)
    return output


def write_outputs(output: SimOutput, out_dir: str) -> List[str]:
    paths = []
    try:
        for name in OUTPUT_FILES:
            path = os.path.join(out_dir, name)
            write_atomic(path, output.files[name])
            paths.append(path)
    except OSError as e:
        raise WorkspaceError('STORAGE_FAILURE', f"cannot write simulation output to {out_dir}: {e}")
    return paths


class _Walk:
    """A 1 Hz track in seconds relative to the trip start, built leg by leg."""

    def __init__(self, origin: Tuple[float, float], speed: float):
        self.x, self.y = origin
        self.speed = speed
        self.t = 0
        self.fixes: List[Tuple[int, float, float, str]] = [(0, self.x, self.y, MIG)]
        self.segments: List[Tuple[str, int, int]] = []
        self.visits: List[Tuple[str, int, int]] = []
        self.path_length_m = 0.0

    def move_to(self, waypoints: List[Tuple[float, float]]) -> None:
        start = self.t
        for wx, wy in waypoints:
            length = math.hypot(wx - self.x, wy - self.y)
            if length == 0:
                continue
            # whole seconds per leg so the corner itself is sampled
            steps = max(1, math.ceil(length / self.speed))
            for k in range(1, steps):
                f = k / steps
                self.fixes.append((self.t + k, self.x + (wx - self.x) * f, self.y + (wy - self.y) * f, MIG))
            self.t += steps
            self.fixes.append((self.t, wx, wy, MIG))
            self.x, self.y = wx, wy
            self.path_length_m += length
        if self.t > start:
            self.segments.append((MOVE, start, self.t))

    def stay(self, area_name: str, jitter: np.ndarray) -> None:
        entry = self.t
        t, x, y, _ = self.fixes[-1]
        self.fixes[-1] = (t, x, y, SUS)
        for k, (dx, dy) in enumerate(jitter, start=1):
            self.fixes.append((entry + k, self.x + float(dx), self.y + float(dy), SUS))
        self.t = entry + len(jitter)
        self.segments.append((STOP, entry, self.t))
        self.visits.append((area_name, entry, self.t))


class StoreSimulator:
    def __init__(self, config: SimConfig, store_map: StoreMap):
        self.config = config
        self.store_map = store_map
        self.rng = np.random.Generator(np.random.PCG64(config.seed))
        self.tz = parse_utc_offset(config.store_utc_offset)

        bounds = store_map.bounds
        self.aisle_y = float(config.aisle_y) if config.aisle_y is not None else (bounds.y0 + bounds.y1) / 2.0
        self.entrance = config.entrance or (bounds.x0 + 1.0, self.aisle_y)
        self.exit = config.exit or (bounds.x1 - 1.0, self.aisle_y)
        for name, (x, y) in (('entrance', self.entrance), ('exit', self.exit)):
            if not bounds.contains(x, y):
                raise SimConfigError('INVALID_CONFIG', f"{name} ({x}, {y}) lies outside the store bounds")
        if not bounds.y0 <= self.aisle_y < bounds.y1:
            raise SimConfigError('INVALID_CONFIG', f"aisle_y {self.aisle_y} lies outside the store bounds")
        if self.entrance == self.exit:
            raise SimConfigError('INVALID_CONFIG', "entrance and exit must differ")

        self.products: List[SimProduct] = []
        self.shelves: Dict[str, List[SimProduct]] = {}
        self.customers: List[Tuple[str, str, int, str]] = []
        self.ping_rows: List[Row] = []
        self.pos_rows: List[Row] = []
        self.truth = GroundTruth(seed=config.seed)

    def run(self) -> SimOutput:
        self._draw_catalogue()
        self._draw_customers()
        for offset in range(self.config.n_days):
            day = self.config.start_date + timedelta(days=offset)
            for customer_id, _, _, _ in self.customers:
                self._simulate_trip(customer_id, day)
            self._simulate_walk_ins(day)
        pings = self._corrupt(PINGS_FILE, self.ping_rows, PING_MANGLERS)
        pos = self._corrupt(POS_FILE, self.pos_rows, POS_MANGLERS)

        files = {
            ZONES_FILE: dump_map(self.store_map),
            PRODUCTS_FILE: _csv(CATALOGUE_HEADER, [
                [p.sku_key, p.product_name, p.category, p.supplier_name, p.home_area_name,
                 f"{p.unit_price:.2f}", str(p.stock_on_hand)] for p in self.products]),
            COSTS_FILE: _csv(COST_HEADER, [[p.sku_key, f"{p.unit_cost:.2f}"] for p in self.products]),
            DEMOGRAPHICS_FILE: _csv(DEMOGRAPHICS_HEADER, [
                [customer_id, gender, str(age), location] for customer_id, gender, age, location in self.customers]),
            PINGS_FILE: _csv(PING_HEADER, pings),
            POS_FILE: _csv(POS_HEADER, pos),
            GROUND_TRUTH_FILE: dump_yaml(self.truth.to_dict()),
        }
        return SimOutput(files=files, ground_truth=self.truth)

    def _draw_catalogue(self) -> None:
        low, high = (int(round(bound * 100)) for bound in self.config.price)
        for zone in self.store_map.in_sequence_order():
            shelf = []
            for k in range(self.config.products_per_zone):
                price = Decimal(int(self.rng.integers(low, high + 1))) * CENT
                ratio = Decimal(f"{float(self.rng.uniform(*self.config.cost_ratio)):.4f}")
                stock = int(self.rng.integers(0, 201))
                supplier = SUPPLIERS[int(self.rng.integers(len(SUPPLIERS)))]
                shelf.append(SimProduct(
                    sku_key=f"SKU-{zone.sequence_index:02d}{k + 1:02d}",
                    product_name=f"{zone.area_name} item {k + 1}",
                    category=zone.area_name,
                    supplier_name=supplier,
                    home_area_name=zone.area_name,
                    unit_price=price,
                    unit_cost=(price * ratio).quantize(CENT, rounding=ROUND_HALF_EVEN),
                    stock_on_hand=stock,
                ))
            self.shelves[zone.area_name] = shelf
            self.products.extend(shelf)

    def _draw_customers(self) -> None:
        for i in range(1, self.config.n_customers + 1):
            gender = GENDERS[int(self.rng.integers(len(GENDERS)))]
            age = int(self.rng.integers(16, 81))
            location = LOCATIONS[int(self.rng.integers(len(LOCATIONS)))]
            self.customers.append((f"C{i:04d}", gender, age, location))

    def _simulate_trip(self, customer_id: str, day: date) -> None:
        cfg = self.config
        plan = []
        for zone in self.store_map.in_sequence_order():
            if self.rng.random() < cfg.visit_probability_for(zone.area_name):
                low, high = cfg.dwell_for(zone.area_name)
                plan.append((zone, int(self.rng.integers(low, high + 1))))
        speed = float(self.rng.uniform(*cfg.walk_speed_m_s))
        basket = []
        for zone, _ in plan:
            if self.rng.random() < cfg.buy_probability:
                shelf = self.shelves[zone.area_name]
                low, high = cfg.items_per_purchase
                basket.append((shelf[int(self.rng.integers(len(shelf)))], int(self.rng.integers(low, high + 1))))

        walk = _Walk(self.entrance, speed)
        for zone, dwell in plan:
            cx, cy = zone.centroid
            walk.move_to([(walk.x, self.aisle_y), (cx, self.aisle_y), (cx, cy)])
            if cfg.dwell_jitter_m > 0:
                jitter = self.rng.uniform(-cfg.dwell_jitter_m, cfg.dwell_jitter_m, size=(dwell, 2))
            else:
                jitter = np.zeros((dwell, 2))
            walk.stay(zone.area_name, jitter)
        ex, ey = self.exit
        walk.move_to([(walk.x, self.aisle_y), (ex, self.aisle_y), (ex, ey)])

        duration = walk.t + (cfg.checkout_delay_s if basket else 0)
        arrival = int(self.rng.integers(cfg.session_start_hour * 3600, cfg.session_end_hour * 3600))
        arrival = min(arrival, SECONDS_PER_DAY - 1 - duration)
        if arrival < 0:
            raise SimConfigError('INVALID_CONFIG', f"a {duration} s trip does not fit in one day")
        start = datetime.combine(day, time(), tzinfo=self.tz) + timedelta(seconds=arrival)

        for t, x, y, status in walk.fixes:
            self.ping_rows.append([customer_id, (start + timedelta(seconds=t)).isoformat(), repr(float(x)),
                                   repr(float(y)), status if cfg.emit_status else ''])
        trip = CustomerDay(
            customer_id=customer_id,
            date=day,
            visits=[ZoneVisit(name, start + timedelta(seconds=t0), start + timedelta(seconds=t1))
                    for name, t0, t1 in walk.visits],
            segments=[TrueSegment(kind, start + timedelta(seconds=t0), start + timedelta(seconds=t1))
                      for kind, t0, t1 in walk.segments],
            path_length_m=walk.path_length_m,
        )
        if basket:
            trip.receipt_id = f"R{day:%Y%m%d}-{customer_id}"
            self._emit_receipt(trip.receipt_id, customer_id, day, start + timedelta(seconds=duration), basket)
        self.truth.customer_days.append(trip)

    def _simulate_walk_ins(self, day: date) -> None:
        cfg = self.config
        for n in range(1, cfg.walk_in_receipts_per_day + 1):
            second = int(self.rng.integers(cfg.session_start_hour * 3600, cfg.session_end_hour * 3600))
            count = min(int(self.rng.integers(1, WALK_IN_MAX_LINES + 1)), len(self.products))
            picks = sorted(int(i) for i in self.rng.choice(len(self.products), size=count, replace=False))
            low, high = cfg.items_per_purchase
            basket = [(self.products[i], int(self.rng.integers(low, high + 1))) for i in picks]
            ts = datetime.combine(day, time(), tzinfo=self.tz) + timedelta(seconds=second)
            self._emit_receipt(f"W{day:%Y%m%d}-{n:04d}", '', day, ts, basket)

    def _emit_receipt(self, receipt_id: str, customer_id: str, day: date, ts: datetime,
                      basket: List[Tuple[SimProduct, int]]) -> None:
        receipt = TrueReceipt(receipt_id, customer_id, day, ts)
        for product, quantity in basket:
            line_total = product.unit_price * quantity
            self.pos_rows.append([customer_id, ts.isoformat(), receipt_id, product.sku_key, product.product_name,
                                  str(quantity), f"{product.unit_price:.2f}", f"{line_total:.2f}"])
            receipt.lines.append(TrueLine(product.sku_key, quantity, line_total))
        self.truth.receipts.append(receipt)

    def _corrupt(self, file_name: str, rows: List[Row], manglers: Tuple[Mangler, ...]) -> List[Row]:
        """Insert a mangled copy after each picked clean row; the clean row stays."""
        count = int(round(self.config.corruption_rate * len(rows)))
        if count == 0:
            return rows
        picks = sorted(int(i) for i in self.rng.choice(len(rows), size=count, replace=False))
        kinds = [int(k) for k in self.rng.integers(len(manglers), size=count)]
        chosen = dict(zip(picks, kinds))
        out: List[Row] = []
        for index, row in enumerate(rows):
            out.append(row)
            if index in chosen:
                reason, mangle = manglers[chosen[index]]
                out.append(mangle(row))
                # header is line 1
                self.truth.corrupted.append(CorruptedRow(file_name, len(out) + 1, reason))
        return out


def _csv(header: List[str], rows: List[Row]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()
