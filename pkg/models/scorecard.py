from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import List

from models.journey import ratio_text

FINANCIAL = 'FINANCIAL'
CUSTOMER = 'CUSTOMER'
INTERNAL = 'INTERNAL'
PERSPECTIVES = (FINANCIAL, CUSTOMER, INTERNAL)

AT_LEAST = 'AT_LEAST'
AT_MOST = 'AT_MOST'
DIRECTIONS = (AT_LEAST, AT_MOST)


@dataclass
class OperationalInputs:
    """Measured business quantities for one (baseline, current) period pair."""
    baseline_period: str
    current_period: str
    investment_cost: Decimal
    measured_benefit: Decimal
    shrinkage_baseline: Decimal
    shrinkage_current: Decimal
    ops_cost_baseline: Decimal
    ops_cost_current: Decimal
    checkout_seconds_baseline: Decimal
    checkout_seconds_current: Decimal
    cc_orders_total: int
    cc_orders_accurate: int
    survey_score_baseline: Decimal
    survey_score_current: Decimal
    inventory_counted_correct: int
    inventory_counted_total: int
    sku_days_out_of_stock: int
    sku_days_total: int
    sku_days_out_of_stock_baseline: int
    sku_days_total_baseline: int

    HEADER = (
        'baseline_period', 'current_period', 'investment_cost', 'measured_benefit',
        'shrinkage_baseline', 'shrinkage_current', 'ops_cost_baseline', 'ops_cost_current',
        'checkout_seconds_baseline', 'checkout_seconds_current', 'cc_orders_total', 'cc_orders_accurate',
        'survey_score_baseline', 'survey_score_current', 'inventory_counted_correct', 'inventory_counted_total',
        'sku_days_out_of_stock', 'sku_days_total', 'sku_days_out_of_stock_baseline', 'sku_days_total_baseline',
    )


@dataclass(frozen=True)
class Target:
    kpi: str
    label: str          # '' for the plain target
    direction: str
    threshold: Fraction

    @property
    def name(self) -> str:
        return f"{self.kpi}@{self.label}" if self.label else self.kpi

    def is_met(self, value: Fraction) -> bool:
        # thresholds are inclusive in both directions
        if self.direction == AT_LEAST:
            return value >= self.threshold
        return value <= self.threshold


@dataclass(frozen=True)
class ScoreEntry:
    name: str
    kpi: str
    perspective: str
    value: Fraction
    target: Fraction
    direction: str
    met: bool

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'kpi': self.kpi,
            'perspective': self.perspective,
            'value': ratio_text(self.value),
            'target': ratio_text(self.target),
            'direction': self.direction,
            'met': self.met,
        }


@dataclass
class Scorecard:
    baseline_period: str
    current_period: str
    entries: List[ScoreEntry] = field(default_factory=list)

    @property
    def all_met(self) -> bool:
        return all(entry.met for entry in self.entries)

    def by_perspective(self, perspective: str) -> List[ScoreEntry]:
        return [entry for entry in self.entries if entry.perspective == perspective]

    def to_dict(self) -> dict:
        return {
            'baseline_period': self.baseline_period,
            'current_period': self.current_period,
            'perspectives': {p: [e.to_dict() for e in self.by_perspective(p)] for p in PERSPECTIVES},
            'met': sum(1 for e in self.entries if e.met),
            'total': len(self.entries),
        }
