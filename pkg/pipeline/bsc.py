"""Balanced-scorecard KPIs from operational inputs and warehouse revenue, checked against targets."""

import csv
import logging
import re
from calendar import monthrange
from datetime import date
from decimal import Decimal
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Tuple

from helpers.validation import DECIMAL_RE, validate_count, validate_money
from models.errors import BscError, ConfigError
from models.scorecard import (
    CUSTOMER, DIRECTIONS, FINANCIAL, INTERNAL, PERSPECTIVES, OperationalInputs, Scorecard,
    ScoreEntry, Target,
)
from models.star_schema import FACT_SALES, date_key
from pipeline.ingest import decode_lines
from pipeline.warehouse import Warehouse

logger = logging.getLogger(__name__)

KPI_PERSPECTIVES = {
    'roi': FINANCIAL,
    'sales_uplift': FINANCIAL,
    'shrinkage_reduction': FINANCIAL,
    'ops_cost_reduction': FINANCIAL,
    'checkout_time_reduction': CUSTOMER,
    'cc_accuracy': CUSTOMER,
    'survey_improvement': CUSTOMER,
    'inventory_accuracy': INTERNAL,
    'out_of_stock_rate': INTERNAL,
    'out_of_stock_reduction': INTERNAL,
}
KPI_ORDER = tuple(KPI_PERSPECTIVES)

MONEY_COLUMNS = ('investment_cost', 'measured_benefit', 'shrinkage_baseline', 'shrinkage_current',
                 'ops_cost_baseline', 'ops_cost_current')
DECIMAL_COLUMNS = ('checkout_seconds_baseline', 'checkout_seconds_current',
                   'survey_score_baseline', 'survey_score_current')
COUNT_COLUMNS = ('cc_orders_total', 'cc_orders_accurate', 'inventory_counted_correct', 'inventory_counted_total',
                 'sku_days_out_of_stock', 'sku_days_total', 'sku_days_out_of_stock_baseline',
                 'sku_days_total_baseline')

_TARGET_RE = re.compile(r'^([a-z_]+)(?:@([A-Za-z0-9_-]+))?\s*=\s*(AT_LEAST|AT_MOST)\s+(\S+)$')
_PERIOD_RE = re.compile(r'^(\d{4})(?:-Q([1-4])|-(\d{2})(?:-(\d{2}))?)?$')


def parse_inputs(data: bytes) -> List[OperationalInputs]:
    """
    Read the operational inputs CSV: one row per (baseline, current) period pair.

    Raises:
        BscError: BAD_HEADER or MALFORMED_ROW
    """
    lines = decode_lines(data)
    rows = list(csv.reader(lines)) if lines else []
    if not rows or [f.strip() for f in rows[0]] != list(OperationalInputs.HEADER):
        raise BscError('BAD_HEADER', f"expected header {','.join(OperationalInputs.HEADER)}")
    inputs = []
    for line_no, fields in enumerate(rows[1:], start=2):
        if not any(f.strip() for f in fields):
            continue
        if len(fields) != len(OperationalInputs.HEADER):
            raise BscError('MALFORMED_ROW', f"inputs line {line_no}: expected {len(OperationalInputs.HEADER)} fields")
        record = dict(zip(OperationalInputs.HEADER, (f.strip() for f in fields)))
        try:
            values = {
                'baseline_period': record['baseline_period'],
                'current_period': record['current_period'],
            }
            values.update({name: validate_money(record[name]) for name in MONEY_COLUMNS})
            values.update({name: _non_negative_decimal(record[name]) for name in DECIMAL_COLUMNS})
            values.update({name: validate_count(record[name]) for name in COUNT_COLUMNS})
        except ValueError as e:
            raise BscError('MALFORMED_ROW', f"inputs line {line_no}: {e}")
        parsed = OperationalInputs(**values)
        if parsed.cc_orders_accurate > parsed.cc_orders_total or \
                parsed.inventory_counted_correct > parsed.inventory_counted_total or \
                parsed.sku_days_out_of_stock > parsed.sku_days_total or \
                parsed.sku_days_out_of_stock_baseline > parsed.sku_days_total_baseline:
            raise BscError('MALFORMED_ROW', f"inputs line {line_no}: a subcount exceeds its total")
        inputs.append(parsed)
    return inputs


def parse_period(label: str) -> Tuple[date, date]:
    """
    Turn YYYY, YYYY-Qn, YYYY-MM, YYYY-MM-DD or 'from..to' into an inclusive date range.

    Raises:
        BscError: BAD_OPTION for anything else
    """
    text = label.strip()
    if '..' in text:
        start, _, end = text.partition('..')
        low, _ = parse_period(start)
        _, high = parse_period(end)
        if low > high:
            raise BscError('EMPTY_RANGE', f"period {label} is empty")
        return low, high
    match = _PERIOD_RE.match(text)
    if not match:
        raise BscError('BAD_OPTION', f"period {label!r} is not YYYY, YYYY-Qn, YYYY-MM or YYYY-MM-DD")
    year, quarter, month, day = match.groups()
    year = int(year)
    try:
        if day:
            single = date(year, int(month), int(day))
            return single, single
        if month:
            m = int(month)
            return date(year, m, 1), date(year, m, monthrange(year, m)[1])
        if quarter:
            first = (int(quarter) - 1) * 3 + 1
            return date(year, first, 1), date(year, first + 2, monthrange(year, first + 2)[1])
    except ValueError as e:
        raise BscError('BAD_OPTION', f"period {label!r}: {e}")
    return date(year, 1, 1), date(year, 12, 31)


def period_revenue(warehouse: Warehouse, label: str) -> Decimal:
    """
    Σ FactSales.revenue over a period.

    Raises:
        BscError: MISSING_PERIOD when the warehouse holds no sales in it
    """
    low, high = parse_period(label)
    low_key, high_key = date_key(low), date_key(high)
    rows = [row for row in warehouse.table(FACT_SALES) if low_key <= row.date_key <= high_key]
    if not rows:
        raise BscError('MISSING_PERIOD', f"no sales in period {label}")
    return sum((row.revenue for row in rows), Decimal('0.00'))


def compute_kpis(inputs: OperationalInputs, revenue_baseline: Decimal, revenue_current: Decimal) -> Dict[str, Fraction]:
    """
    Every KPI as an exact rational.

    Raises:
        BscError: DIVISION_BY_ZERO_BASELINE naming the zero quantity
    """
    f = _fraction
    return {
        'roi': _ratio(f(inputs.measured_benefit) - f(inputs.investment_cost), inputs.investment_cost, 'investment_cost'),
        'sales_uplift': _ratio(f(revenue_current) - f(revenue_baseline), revenue_baseline, 'revenue_baseline'),
        'shrinkage_reduction': _reduction(inputs.shrinkage_baseline, inputs.shrinkage_current, 'shrinkage_baseline'),
        'ops_cost_reduction': _reduction(inputs.ops_cost_baseline, inputs.ops_cost_current, 'ops_cost_baseline'),
        'checkout_time_reduction': _reduction(inputs.checkout_seconds_baseline, inputs.checkout_seconds_current,
                                              'checkout_seconds_baseline'),
        'cc_accuracy': _ratio(f(inputs.cc_orders_accurate), inputs.cc_orders_total, 'cc_orders_total'),
        'survey_improvement': _ratio(f(inputs.survey_score_current) - f(inputs.survey_score_baseline),
                                     inputs.survey_score_baseline, 'survey_score_baseline'),
        'inventory_accuracy': _ratio(f(inputs.inventory_counted_correct), inputs.inventory_counted_total,
                                     'inventory_counted_total'),
        'out_of_stock_rate': _ratio(f(inputs.sku_days_out_of_stock), inputs.sku_days_total, 'sku_days_total'),
        'out_of_stock_reduction': _reduction(
            _ratio(f(inputs.sku_days_out_of_stock_baseline), inputs.sku_days_total_baseline, 'sku_days_total_baseline'),
            _ratio(f(inputs.sku_days_out_of_stock), inputs.sku_days_total, 'sku_days_total'),
            'out_of_stock_rate_baseline'),
    }


def compute_for_warehouse(inputs: OperationalInputs, warehouse: Warehouse) -> Dict[str, Fraction]:
    return compute_kpis(inputs, period_revenue(warehouse, inputs.baseline_period),
                        period_revenue(warehouse, inputs.current_period))


def parse_targets(text: str) -> List[Target]:
    """
    Read 'name[@label] = AT_LEAST|AT_MOST threshold' lines; '#' starts a comment.

    Raises:
        ConfigError: INVALID_CONFIG for malformed lines or duplicates
        BscError: UNKNOWN_KPI_IN_CONFIG for a name that is not a KPI
    """
    targets: List[Target] = []
    seen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        match = _TARGET_RE.match(line)
        if not match:
            raise ConfigError('INVALID_CONFIG', f"targets line {line_no}: expected 'name = AT_LEAST|AT_MOST value'")
        kpi, label, direction, threshold = match.groups()
        if kpi not in KPI_PERSPECTIVES:
            raise BscError('UNKNOWN_KPI_IN_CONFIG', f"targets line {line_no}: unknown KPI {kpi!r}")
        try:
            value = Fraction(Decimal(threshold))
        except (ArithmeticError, ValueError):
            raise ConfigError('INVALID_CONFIG', f"targets line {line_no}: threshold {threshold!r} is not a number")
        target = Target(kpi, label or '', direction, value)
        if target.name in seen:
            raise ConfigError('INVALID_CONFIG', f"targets line {line_no}: {target.name} defined twice")
        seen.add(target.name)
        targets.append(target)
    return targets


def default_targets_text() -> str:
    return resources.files('rfidmart').joinpath('bsc_targets.txt').read_text(encoding='utf-8')


def evaluate(kpis: Dict[str, Fraction], targets: List[Target],
             baseline_period: str = '', current_period: str = '') -> Scorecard:
    """
    Mark each target met or not; entries grouped by perspective in a fixed order.

    Raises:
        BscError: UNKNOWN_KPI_IN_CONFIG when a target names a KPI that was not computed
    """
    entries = []
    for target in targets:
        if target.kpi not in kpis:
            raise BscError('UNKNOWN_KPI_IN_CONFIG', f"target {target.name} names a KPI that was not computed")
        if target.direction not in DIRECTIONS:
            raise ConfigError('INVALID_CONFIG', f"target {target.name} has direction {target.direction}")
        value = kpis[target.kpi]
        entries.append(ScoreEntry(
            name=target.name,
            kpi=target.kpi,
            perspective=KPI_PERSPECTIVES[target.kpi],
            value=value,
            target=target.threshold,
            direction=target.direction,
            met=target.is_met(value),
        ))
    entries.sort(key=lambda e: (PERSPECTIVES.index(e.perspective), KPI_ORDER.index(e.kpi), e.name))
    logger.info("scorecard %s vs %s: %d of %d targets met", baseline_period, current_period,
                sum(1 for e in entries if e.met), len(entries))
    return Scorecard(baseline_period, current_period, entries)


def _fraction(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def _ratio(numerator: Fraction, denominator, name: str) -> Fraction:
    denominator = _fraction(denominator)
    if denominator == 0:
        raise BscError('DIVISION_BY_ZERO_BASELINE', f"{name} is zero")
    return numerator / denominator


def _reduction(baseline, current, name: str) -> Fraction:
    return _ratio(_fraction(baseline) - _fraction(current), baseline, name)


def _non_negative_decimal(text: str) -> Decimal:
    if not DECIMAL_RE.fullmatch(text):
        raise ValueError(f"Invalid number format: {text!r}")
    value = Decimal(text)
    if value < 0:
        raise ValueError(f"Value must be a non-negative number: {text!r}")
    return value
