from dataclasses import dataclass, field
from datetime import date
from decimal import Decimal
from fractions import Fraction
from typing import List

BOTH = 'BOTH'
POS_ONLY = 'POS_ONLY'
RFID_ONLY = 'RFID_ONLY'
NO_FACTS = 'NONE'


def ratio_text(value: Fraction, places: int = 4) -> str:
    """Exact rational rendered half-even to a fixed number of places."""
    quantum = Decimal(1).scaleb(-places)
    return str((Decimal(value.numerator) / Decimal(value.denominator)).quantize(quantum))


@dataclass
class PurchaseEntry:
    sku_key: str
    product_name: str
    area_name: str
    quantity: int = 0
    revenue: Decimal = Decimal('0.00')

    def to_dict(self) -> dict:
        return {
            'sku_key': self.sku_key,
            'product_name': self.product_name,
            'area_name': self.area_name,
            'quantity': self.quantity,
            'revenue': f"{self.revenue:.2f}",
        }


@dataclass
class ZoneBehaviour:
    area_name: str
    dwell_s: float = 0.0
    stop_s: float = 0.0
    visit_count: int = 0
    distance_m: float = 0.0

    def to_dict(self) -> dict:
        return {
            'area_name': self.area_name,
            'dwell_s': self.dwell_s,
            'stop_s': self.stop_s,
            'visit_count': self.visit_count,
            'distance_m': self.distance_m,
        }


@dataclass
class ZoneConversionFlag:
    area_name: str
    visited: bool
    purchased_here: bool


@dataclass
class JourneyProfile:
    """One customer-day: purchases from FactSales next to behaviour from FactCustBehaviour."""
    customer_id: str
    date: date
    coverage: str
    purchases: List[PurchaseEntry] = field(default_factory=list)
    receipts: List[str] = field(default_factory=list)
    behaviour: List[ZoneBehaviour] = field(default_factory=list)
    conversions: List[ZoneConversionFlag] = field(default_factory=list)

    @property
    def total_items(self) -> int:
        return sum(p.quantity for p in self.purchases)

    @property
    def total_revenue(self) -> Decimal:
        return sum((p.revenue for p in self.purchases), Decimal('0.00'))

    @property
    def total_movement_s(self) -> float:
        return sum(z.dwell_s for z in self.behaviour)

    @property
    def total_stop_s(self) -> float:
        return sum(z.stop_s for z in self.behaviour)

    @property
    def total_visits(self) -> int:
        return sum(z.visit_count for z in self.behaviour)

    @property
    def total_distance_m(self) -> float:
        return sum(z.distance_m for z in self.behaviour)

    def to_dict(self) -> dict:
        return {
            'customer_id': self.customer_id,
            'date': self.date.isoformat(),
            'coverage': self.coverage,
            'purchases': {
                'items': [p.to_dict() for p in self.purchases],
                'receipts': list(self.receipts),
                'total_items': self.total_items,
                'total_revenue': f"{self.total_revenue:.2f}",
            },
            'behaviour': {
                'zones': [z.to_dict() for z in self.behaviour],
                'total_movement_s': self.total_movement_s,
                'total_stop_s': self.total_stop_s,
                'total_visits': self.total_visits,
                'total_distance_m': self.total_distance_m,
            },
            'conversions': [
                {'area_name': c.area_name, 'visited': c.visited, 'purchased_here': c.purchased_here}
                for c in self.conversions
            ],
        }


@dataclass
class ZoneConversion:
    area_name: str
    visitors: int
    buyers: int

    @property
    def conversion(self) -> Fraction:
        return Fraction(self.buyers, self.visitors) if self.visitors else Fraction(0)

    @property
    def buyers_exceed_visitors(self) -> bool:
        return self.buyers > self.visitors

    def to_dict(self) -> dict:
        return {
            'area_name': self.area_name,
            'visitors': self.visitors,
            'buyers': self.buyers,
            'conversion': ratio_text(self.conversion),
        }
