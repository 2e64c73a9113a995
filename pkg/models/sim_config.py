from dataclasses import asdict, dataclass, field
from datetime import date
import os
from typing import Dict, Optional, Tuple

import yaml

from models.config_model import parse_utc_offset
from models.errors import ConfigError, SimConfigError

MAX_SEED = 2 ** 64 - 1


def _pair(value, name: str, cast=float) -> Tuple:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SimConfigError('INVALID_CONFIG', f"{name} must be a [low, high] pair")
    try:
        low, high = cast(value[0]), cast(value[1])
    except (TypeError, ValueError):
        raise SimConfigError('INVALID_CONFIG', f"{name} must hold numbers")
    if low > high:
        raise SimConfigError('INVALID_CONFIG', f"{name} bounds are out of order: {low} > {high}")
    return low, high


def _probability(value, name: str) -> float:
    try:
        p = float(value)
    except (TypeError, ValueError):
        raise SimConfigError('INVALID_CONFIG', f"{name} must be a number")
    if not 0.0 <= p <= 1.0:
        raise SimConfigError('INVALID_CONFIG', f"{name} must lie in [0, 1], got {p}")
    return p


@dataclass
class SimConfig:
    """Knobs of the synthetic store; every random draw comes from PCG64(seed)."""
    seed: int = 42
    n_customers: int = 50
    n_days: int = 7
    start_date: date = date(2024, 3, 4)
    zone_file: Optional[str] = None            # None = built-in example layout
    store_utc_offset: str = '+00:00'
    session_start_hour: int = 9
    session_end_hour: int = 20
    visit_probability: float = 0.5
    zone_visit_probability: Dict[str, float] = field(default_factory=dict)
    dwell_s: Tuple[int, int] = (30, 300)
    zone_dwell_s: Dict[str, Tuple[int, int]] = field(default_factory=dict)
    walk_speed_m_s: Tuple[float, float] = (0.8, 1.4)
    buy_probability: float = 0.3
    items_per_purchase: Tuple[int, int] = (1, 3)
    products_per_zone: int = 5
    price: Tuple[float, float] = (0.5, 20.0)
    cost_ratio: Tuple[float, float] = (0.4, 0.8)
    walk_in_receipts_per_day: int = 1000
    dwell_jitter_m: float = 0.2
    emit_status: bool = False
    corruption_rate: float = 0.0
    checkout_delay_s: int = 30
    entrance: Optional[Tuple[float, float]] = None   # default: left edge of the walkway
    exit: Optional[Tuple[float, float]] = None       # default: right edge of the walkway
    aisle_y: Optional[float] = None                  # default: middle of the store bounds

    def __post_init__(self):
        if isinstance(self.start_date, str):
            try:
                self.start_date = date.fromisoformat(self.start_date)
            except ValueError:
                raise SimConfigError('INVALID_CONFIG', f"start_date must be YYYY-MM-DD, got {self.start_date!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed <= MAX_SEED:
            raise SimConfigError('INVALID_CONFIG', "seed must be an integer in [0, 2^64)")
        for name in ('n_customers', 'n_days', 'products_per_zone'):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise SimConfigError('INVALID_CONFIG', f"{name} must be a positive integer")
        for name in ('walk_in_receipts_per_day', 'checkout_delay_s'):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise SimConfigError('INVALID_CONFIG', f"{name} must be a non-negative integer")
        if not (0 <= self.session_start_hour < self.session_end_hour <= 23):
            raise SimConfigError('INVALID_CONFIG', "session hours must satisfy 0 <= start < end <= 23")
        try:
            parse_utc_offset(self.store_utc_offset)
        except ConfigError as e:
            raise SimConfigError('INVALID_CONFIG', e.message)

        self.visit_probability = _probability(self.visit_probability, 'visit_probability')
        self.buy_probability = _probability(self.buy_probability, 'buy_probability')
        self.corruption_rate = _probability(self.corruption_rate, 'corruption_rate')
        self.zone_visit_probability = {str(k): _probability(v, f"zone_visit_probability.{k}")
                                       for k, v in (self.zone_visit_probability or {}).items()}
        self.dwell_s = _pair(self.dwell_s, 'dwell_s', int)
        self.zone_dwell_s = {str(k): _pair(v, f"zone_dwell_s.{k}", int) for k, v in (self.zone_dwell_s or {}).items()}
        for name, bounds in [('dwell_s', self.dwell_s)] + [(f"zone_dwell_s.{k}", v) for k, v in self.zone_dwell_s.items()]:
            if bounds[0] < 1:
                raise SimConfigError('INVALID_CONFIG', f"{name} must be at least 1 second")
        self.walk_speed_m_s = _pair(self.walk_speed_m_s, 'walk_speed_m_s')
        if self.walk_speed_m_s[0] <= 0:
            raise SimConfigError('INVALID_CONFIG', "walk_speed_m_s must be positive")
        self.items_per_purchase = _pair(self.items_per_purchase, 'items_per_purchase', int)
        if self.items_per_purchase[0] < 1:
            raise SimConfigError('INVALID_CONFIG', "items_per_purchase must be at least 1")
        self.price = _pair(self.price, 'price')
        if self.price[0] < 0.01:
            raise SimConfigError('INVALID_CONFIG', "price must be at least 0.01")
        self.cost_ratio = _pair(self.cost_ratio, 'cost_ratio')
        if self.cost_ratio[0] < 0:
            raise SimConfigError('INVALID_CONFIG', "cost_ratio must be non-negative")
        if not isinstance(self.dwell_jitter_m, (int, float)) or self.dwell_jitter_m < 0:
            raise SimConfigError('INVALID_CONFIG', "dwell_jitter_m must be non-negative")
        if self.entrance is not None:
            self.entrance = _pair_point(self.entrance, 'entrance')
        if self.exit is not None:
            self.exit = _pair_point(self.exit, 'exit')

    def visit_probability_for(self, area_name: str) -> float:
        return self.zone_visit_probability.get(area_name, self.visit_probability)

    def dwell_for(self, area_name: str) -> Tuple[int, int]:
        return self.zone_dwell_s.get(area_name, self.dwell_s)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['start_date'] = self.start_date.isoformat()
        for name in ('dwell_s', 'walk_speed_m_s', 'items_per_purchase', 'price', 'cost_ratio', 'entrance', 'exit'):
            if data[name] is not None:
                data[name] = list(data[name])
        data['zone_dwell_s'] = {k: list(v) for k, v in data['zone_dwell_s'].items()}
        return data


def _pair_point(value, name: str) -> Tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SimConfigError('INVALID_CONFIG', f"{name} must be an [x, y] pair")
    try:
        return float(value[0]), float(value[1])
    except (TypeError, ValueError):
        raise SimConfigError('INVALID_CONFIG', f"{name} must hold numbers")


def load_sim_config(path: str) -> SimConfig:
    """Load a simulation YAML; a relative zone_file resolves against the config's directory."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f) or {}
    except OSError as e:
        raise SimConfigError('INVALID_CONFIG', f"cannot read {path}: {e}")
    except yaml.YAMLError as e:
        raise SimConfigError('INVALID_CONFIG', f"cannot parse {path}: {str(e).splitlines()[0]}")
    if not isinstance(data, dict):
        raise SimConfigError('INVALID_CONFIG', f"{path} must contain a mapping")
    zone_file = data.get('zone_file')
    if zone_file and not os.path.isabs(zone_file):
        data['zone_file'] = os.path.join(os.path.dirname(os.path.abspath(path)), zone_file)
    try:
        return SimConfig(**data)
    except TypeError as e:
        raise SimConfigError('INVALID_CONFIG', f"{path}: {e}")
