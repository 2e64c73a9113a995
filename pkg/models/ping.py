from dataclasses import dataclass
from datetime import datetime
from decimal import Decimal
from typing import Optional

from helpers.validation import format_timestamp

SUS = 'SUS'
MIG = 'MIG'
STATUSES = (SUS, MIG)


@dataclass(frozen=True)
class Ping:
    """One 1 Hz position fix of a customer's basket tag (UTC, second resolution)."""
    customer_id: str
    ts: datetime
    x: float
    y: float
    status: Optional[str] = None

    def to_row(self) -> list:
        return [self.customer_id, format_timestamp(self.ts), repr(self.x), repr(self.y), self.status or '']


@dataclass(frozen=True)
class ReceiptLine:
    """One POS line item; money in fixed-point cents."""
    customer_id: str
    ts: datetime
    receipt_id: str
    sku_key: str
    product_name: str
    quantity: int
    unit_price: Decimal
    line_total: Decimal

    @property
    def is_walk_in(self) -> bool:
        return not self.customer_id

    def to_row(self) -> list:
        return [
            self.customer_id,
            format_timestamp(self.ts),
            self.receipt_id,
            self.sku_key,
            self.product_name,
            str(self.quantity),
            f"{self.unit_price:.2f}",
            f"{self.line_total:.2f}",
        ]
