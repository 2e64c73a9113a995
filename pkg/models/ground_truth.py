from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime
from decimal import Decimal
from typing import Dict, List, Optional

from helpers.validation import format_timestamp, validate_timestamp
from models.segment import MOVE


@dataclass(frozen=True)
class ZoneVisit:
    area_name: str
    entry: datetime
    exit: datetime

    @property
    def dwell_s(self) -> int:
        return int((self.exit - self.entry).total_seconds())

    def to_dict(self) -> dict:
        return {'area_name': self.area_name, 'entry': format_timestamp(self.entry),
                'exit': format_timestamp(self.exit), 'dwell_s': self.dwell_s}

    @classmethod
    def from_dict(cls, data: dict) -> 'ZoneVisit':
        return cls(data['area_name'], validate_timestamp(data['entry']), validate_timestamp(data['exit']))


@dataclass(frozen=True)
class TrueSegment:
    kind: str
    t_start: datetime
    t_end: datetime

    @property
    def duration_s(self) -> int:
        return int((self.t_end - self.t_start).total_seconds())

    def to_dict(self) -> dict:
        return {'kind': self.kind, 't_start': format_timestamp(self.t_start), 't_end': format_timestamp(self.t_end)}

    @classmethod
    def from_dict(cls, data: dict) -> 'TrueSegment':
        return cls(data['kind'], validate_timestamp(data['t_start']), validate_timestamp(data['t_end']))


@dataclass(frozen=True)
class TrueLine:
    sku_key: str
    quantity: int
    line_total: Decimal


@dataclass
class TrueReceipt:
    receipt_id: str
    customer_id: str      # '' for a walk-in
    date: date
    ts: datetime
    lines: List[TrueLine] = field(default_factory=list)

    @property
    def total(self) -> Decimal:
        return sum((line.line_total for line in self.lines), Decimal('0.00'))

    def to_dict(self) -> dict:
        return {
            'receipt_id': self.receipt_id,
            'customer_id': self.customer_id,
            'date': self.date.isoformat(),
            'ts': format_timestamp(self.ts),
            'lines': [{'sku_key': l.sku_key, 'quantity': l.quantity, 'line_total': f"{l.line_total:.2f}"}
                      for l in self.lines],
            'total': f"{self.total:.2f}",
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'TrueReceipt':
        return cls(
            receipt_id=data['receipt_id'],
            customer_id=data['customer_id'],
            date=date.fromisoformat(data['date']),
            ts=validate_timestamp(data['ts']),
            lines=[TrueLine(l['sku_key'], int(l['quantity']), Decimal(l['line_total'])) for l in data['lines']],
        )


@dataclass
class CustomerDay:
    """One simulated shopping trip: scripted itinerary, true segments and the walked path length."""
    customer_id: str
    date: date
    visits: List[ZoneVisit] = field(default_factory=list)
    segments: List[TrueSegment] = field(default_factory=list)
    path_length_m: float = 0.0
    receipt_id: Optional[str] = None

    @property
    def session_start(self) -> datetime:
        return self.segments[0].t_start

    @property
    def session_end(self) -> datetime:
        return self.segments[-1].t_end

    @property
    def transit_s(self) -> int:
        return sum(s.duration_s for s in self.segments if s.kind == MOVE)

    def dwell_by_zone(self) -> Dict[str, int]:
        dwell: Dict[str, int] = defaultdict(int)
        for visit in self.visits:
            dwell[visit.area_name] += visit.dwell_s
        return dict(dwell)

    def to_dict(self) -> dict:
        return {
            'customer_id': self.customer_id,
            'date': self.date.isoformat(),
            'session_start': format_timestamp(self.session_start),
            'session_end': format_timestamp(self.session_end),
            'itinerary': [v.to_dict() for v in self.visits],
            'dwell_by_zone': dict(sorted(self.dwell_by_zone().items())),
            'segments': [s.to_dict() for s in self.segments],
            'transit_s': self.transit_s,
            'path_length_m': self.path_length_m,
            'receipt_id': self.receipt_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'CustomerDay':
        return cls(
            customer_id=data['customer_id'],
            date=date.fromisoformat(data['date']),
            visits=[ZoneVisit.from_dict(v) for v in data['itinerary']],
            segments=[TrueSegment.from_dict(s) for s in data['segments']],
            path_length_m=float(data['path_length_m']),
            receipt_id=data.get('receipt_id'),
        )


@dataclass(frozen=True)
class CorruptedRow:
    file: str
    line_no: int
    reason: str

    def to_dict(self) -> dict:
        return {'file': self.file, 'line_no': self.line_no, 'reason': self.reason}


@dataclass
class GroundTruth:
    seed: int
    customer_days: List[CustomerDay] = field(default_factory=list)
    receipts: List[TrueReceipt] = field(default_factory=list)
    corrupted: List[CorruptedRow] = field(default_factory=list)

    def revenue_by_day(self) -> Dict[date, Decimal]:
        revenue: Dict[date, Decimal] = defaultdict(lambda: Decimal('0.00'))
        for receipt in self.receipts:
            revenue[receipt.date] += receipt.total
        return dict(sorted(revenue.items()))

    def corrupted_lines(self, file: str) -> Dict[int, str]:
        return {row.line_no: row.reason for row in self.corrupted if row.file == file}

    def to_dict(self) -> dict:
        return {
            'seed': self.seed,
            'customer_days': [trip.to_dict() for trip in self.customer_days],
            'receipts': [receipt.to_dict() for receipt in self.receipts],
            'revenue_by_day': {day.isoformat(): f"{total:.2f}" for day, total in self.revenue_by_day().items()},
            'corrupted_rows': [row.to_dict() for row in self.corrupted],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'GroundTruth':
        return cls(
            seed=int(data['seed']),
            customer_days=[CustomerDay.from_dict(d) for d in data.get('customer_days', [])],
            receipts=[TrueReceipt.from_dict(r) for r in data.get('receipts', [])],
            corrupted=[CorruptedRow(r['file'], int(r['line_no']), r['reason']) for r in data.get('corrupted_rows', [])],
        )
