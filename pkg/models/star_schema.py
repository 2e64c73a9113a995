"""Row types of the star schema: six dimensions, the zone dimension and two fact tables.

Every row converts to and from the string dict written in the table's CSV part files.
"""

from dataclasses import dataclass
from datetime import date, datetime
from decimal import Decimal
from typing import Dict, Optional

from helpers.validation import format_timestamp

UNKNOWN = 'UNKNOWN'
UNKNOWN_CUSTOMER_KEY = 0
STOP_KEY = 1
MOVE_KEY = 2

AREA = 'area'
DM_SUPPLIES = 'dm_supplies'
DM_PRODUCTS = 'dm_products'
DM_CALENDAR = 'dm_calendar'
DM_CUSTOMERS = 'dm_customers'
DM_MOVEMENT = 'dm_movement'
FACT_SALES = 'fact_sales'
FACT_CUST_BEHAVIOUR = 'fact_cust_behaviour'

DIMENSIONS = (AREA, DM_SUPPLIES, DM_PRODUCTS, DM_CALENDAR, DM_CUSTOMERS, DM_MOVEMENT)
FACTS = (FACT_SALES, FACT_CUST_BEHAVIOUR)
TABLES = DIMENSIONS + FACTS


def _money(value: Decimal) -> str:
    return f"{value:.2f}"


def _opt_float(text: str) -> Optional[float]:
    return float(text) if text not in (None, '') else None


def _opt_str(value) -> str:
    return '' if value is None else repr(value) if isinstance(value, float) else str(value)


@dataclass(frozen=True)
class AreaRow:
    area_key: int
    area_name: str
    x0: Optional[float] = None
    y0: Optional[float] = None
    x1: Optional[float] = None
    y1: Optional[float] = None
    sequence_index: Optional[int] = None

    HEADER = ('area_key', 'area_name', 'x0', 'y0', 'x1', 'y1', 'sequence_index')

    @property
    def natural_key(self) -> str:
        return self.area_name

    def to_dict(self) -> Dict[str, str]:
        return {
            'area_key': str(self.area_key),
            'area_name': self.area_name,
            'x0': _opt_str(self.x0),
            'y0': _opt_str(self.y0),
            'x1': _opt_str(self.x1),
            'y1': _opt_str(self.y1),
            'sequence_index': _opt_str(self.sequence_index),
        }

    @staticmethod
    def from_dict(data: Dict[str, str]) -> 'AreaRow':
        seq = data.get('sequence_index', '')
        return AreaRow(int(data['area_key']), data['area_name'], _opt_float(data.get('x0')),
                       _opt_float(data.get('y0')), _opt_float(data.get('x1')), _opt_float(data.get('y1')),
                       int(seq) if seq not in (None, '') else None)


@dataclass(frozen=True)
class SupplierRow:
    supplier_key: int
    supplier_name: str

    HEADER = ('supplier_key', 'supplier_name')

    @property
    def natural_key(self) -> str:
        return self.supplier_name

    def to_dict(self) -> Dict[str, str]:
        return {'supplier_key': str(self.supplier_key), 'supplier_name': self.supplier_name}

    @staticmethod
    def from_dict(data: Dict[str, str]) -> 'SupplierRow':
        return SupplierRow(int(data['supplier_key']), data['supplier_name'])


@dataclass(frozen=True)
class ProductRow:
    product_key: int
    sku_key: str
    product_name: str
    category: str
    unit_price: Decimal
    supplier_key: int
    home_area_key: int

    HEADER = ('product_key', 'sku_key', 'product_name', 'category', 'unit_price', 'supplier_key', 'home_area_key')

    @property
    def natural_key(self) -> str:
        return self.sku_key

    def to_dict(self) -> Dict[str, str]:
        return {
            'product_key': str(self.product_key),
            'sku_key': self.sku_key,
            'product_name': self.product_name,
            'category': self.category,
            'unit_price': _money(self.unit_price),
            'supplier_key': str(self.supplier_key),
            'home_area_key': str(self.home_area_key),
        }

    @staticmethod
    def from_dict(data: Dict[str, str]) -> 'ProductRow':
        return ProductRow(int(data['product_key']), data['sku_key'], data['product_name'], data['category'],
                          Decimal(data['unit_price']), int(data['supplier_key']), int(data['home_area_key']))


@dataclass(frozen=True)
class CalendarRow:
    date_key: int   # yyyymmdd
    date: date
    day: int
    month: int
    quarter: int
    year: int

    HEADER = ('date_key', 'date', 'day', 'month', 'quarter', 'year')

    @property
    def natural_key(self) -> str:
        return self.date.isoformat()

    @staticmethod
    def for_date(day: date) -> 'CalendarRow':
        return CalendarRow(date_key(day), day, day.day, day.month, (day.month - 1) // 3 + 1, day.year)

    def to_dict(self) -> Dict[str, str]:
        return {
            'date_key': str(self.date_key),
            'date': self.date.isoformat(),
            'day': str(self.day),
            'month': str(self.month),
            'quarter': str(self.quarter),
            'year': str(self.year),
        }

    @staticmethod
    def from_dict(data: Dict[str, str]) -> 'CalendarRow':
        return CalendarRow(int(data['date_key']), date.fromisoformat(data['date']), int(data['day']),
                           int(data['month']), int(data['quarter']), int(data['year']))


@dataclass(frozen=True)
class CustomerRow:
    customer_key: int
    customer_id: str
    gender: str = UNKNOWN          # M, F or UNKNOWN
    age: Optional[int] = None      # None = UNKNOWN
    location: str = ''

    HEADER = ('customer_key', 'customer_id', 'gender', 'age', 'location')

    @property
    def natural_key(self) -> str:
        return self.customer_id

    def to_dict(self) -> Dict[str, str]:
        return {
            'customer_key': str(self.customer_key),
            'customer_id': self.customer_id,
            'gender': self.gender,
            'age': UNKNOWN if self.age is None else str(self.age),
            'location': self.location,
        }

    @staticmethod
    def from_dict(data: Dict[str, str]) -> 'CustomerRow':
        age = data.get('age', UNKNOWN)
        return CustomerRow(int(data['customer_key']), data['customer_id'], data.get('gender') or UNKNOWN,
                           None if age in (UNKNOWN, '', None) else int(age), data.get('location') or '')


@dataclass(frozen=True)
class MovementRow:
    movement_key: int
    movement: str

    HEADER = ('movement_key', 'movement')

    @property
    def natural_key(self) -> str:
        return self.movement

    def to_dict(self) -> Dict[str, str]:
        return {'movement_key': str(self.movement_key), 'movement': self.movement}

    @staticmethod
    def from_dict(data: Dict[str, str]) -> 'MovementRow':
        return MovementRow(int(data['movement_key']), data['movement'])


@dataclass(frozen=True)
class SalesFact:
    """One POS line. total_sales = revenue and quantity_purchased = quantity at line grain;
    sold counts the units that carried revenue."""
    product_key: int
    customer_key: int
    date_key: int
    area_key: int
    receipt_id: str
    quantity: int
    quantity_purchased: int
    sold: int
    cost: Decimal
    revenue: Decimal
    profit: Decimal
    total_sales: Decimal
    margin: Decimal
    stock: int

    HEADER = ('product_key', 'customer_key', 'date_key', 'area_key', 'receipt_id', 'quantity',
              'quantity_purchased', 'sold', 'cost', 'revenue', 'profit', 'total_sales', 'margin', 'stock')

    def to_dict(self) -> Dict[str, str]:
        return {
            'product_key': str(self.product_key),
            'customer_key': str(self.customer_key),
            'date_key': str(self.date_key),
            'area_key': str(self.area_key),
            'receipt_id': self.receipt_id,
            'quantity': str(self.quantity),
            'quantity_purchased': str(self.quantity_purchased),
            'sold': str(self.sold),
            'cost': _money(self.cost),
            'revenue': _money(self.revenue),
            'profit': _money(self.profit),
            'total_sales': _money(self.total_sales),
            'margin': f"{self.margin:.4f}",
            'stock': str(self.stock),
        }

    @staticmethod
    def from_dict(data: Dict[str, str]) -> 'SalesFact':
        return SalesFact(
            product_key=int(data['product_key']),
            customer_key=int(data['customer_key']),
            date_key=int(data['date_key']),
            area_key=int(data['area_key']),
            receipt_id=data['receipt_id'],
            quantity=int(data['quantity']),
            quantity_purchased=int(data['quantity_purchased']),
            sold=int(data['sold']),
            cost=Decimal(data['cost']),
            revenue=Decimal(data['revenue']),
            profit=Decimal(data['profit']),
            total_sales=Decimal(data['total_sales']),
            margin=Decimal(data['margin']),
            stock=int(data['stock']),
        )


@dataclass(frozen=True)
class BehaviourFact:
    """One STOP or MOVE segment; visit_start marks the first segment of a run in its zone."""
    customer_key: int
    date_key: int
    area_key: int
    movement_key: int
    t_start: datetime
    t_end: datetime
    x: float
    y: float
    speed_m_s: float
    distance_m: float
    duration_s: float
    visit_start: int

    HEADER = ('customer_key', 'date_key', 'area_key', 'movement_key', 't_start', 't_end', 'x', 'y',
              'speed_m_s', 'distance_m', 'duration_s', 'visit_start')

    def to_dict(self) -> Dict[str, str]:
        return {
            'customer_key': str(self.customer_key),
            'date_key': str(self.date_key),
            'area_key': str(self.area_key),
            'movement_key': str(self.movement_key),
            't_start': format_timestamp(self.t_start),
            't_end': format_timestamp(self.t_end),
            'x': repr(self.x),
            'y': repr(self.y),
            'speed_m_s': repr(self.speed_m_s),
            'distance_m': repr(self.distance_m),
            'duration_s': repr(self.duration_s),
            'visit_start': str(self.visit_start),
        }

    @staticmethod
    def from_dict(data: Dict[str, str]) -> 'BehaviourFact':
        return BehaviourFact(
            customer_key=int(data['customer_key']),
            date_key=int(data['date_key']),
            area_key=int(data['area_key']),
            movement_key=int(data['movement_key']),
            t_start=datetime.fromisoformat(data['t_start']),
            t_end=datetime.fromisoformat(data['t_end']),
            x=float(data['x']),
            y=float(data['y']),
            speed_m_s=float(data['speed_m_s']),
            distance_m=float(data['distance_m']),
            duration_s=float(data['duration_s']),
            visit_start=int(data['visit_start']),
        )


ROW_TYPES = {
    AREA: AreaRow,
    DM_SUPPLIES: SupplierRow,
    DM_PRODUCTS: ProductRow,
    DM_CALENDAR: CalendarRow,
    DM_CUSTOMERS: CustomerRow,
    DM_MOVEMENT: MovementRow,
    FACT_SALES: SalesFact,
    FACT_CUST_BEHAVIOUR: BehaviourFact,
}

KEY_COLUMNS = {
    AREA: 'area_key',
    DM_SUPPLIES: 'supplier_key',
    DM_PRODUCTS: 'product_key',
    DM_CALENDAR: 'date_key',
    DM_CUSTOMERS: 'customer_key',
    DM_MOVEMENT: 'movement_key',
}


def date_key(day: date) -> int:
    return day.year * 10000 + day.month * 100 + day.day
