"""Value formatting shared by the CSV exporter and the terminal tables."""

from datetime import date
from decimal import Decimal
from fractions import Fraction
from typing import Optional

from models.journey import ratio_text


def format_value(value) -> str:
    """Canonical text for a result cell: money and margins as stored, floats by repr."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, Fraction):
        return ratio_text(value)
    if isinstance(value, Decimal):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


def format_money(amount: Decimal) -> str:
    return f"{amount:.2f}"


def format_percentage(ratio: Fraction) -> str:
    """Fraction as a percentage with one decimal, e.g. 0.255 -> '25.5%'."""
    return f"{float(ratio) * 100:.1f}%"


def format_seconds(seconds: float) -> str:
    """Short human duration: '45s', '2m 05s', '1h 02m'."""
    total = int(round(seconds))
    hours, rest = divmod(total, 3600)
    minutes, secs = divmod(rest, 60)
    if hours:
        return f"{hours}h {minutes:02d}m"
    if minutes:
        return f"{minutes}m {secs:02d}s"
    return f"{secs}s"


def format_range(date_from: Optional[date], date_to: Optional[date]) -> str:
    if not date_from and not date_to:
        return 'all dates'
    return f"{date_from.isoformat() if date_from else '…'} .. {date_to.isoformat() if date_to else '…'}"
