"""Field parsing and validation helpers shared by the CSV readers."""

from datetime import date, datetime, timezone
from decimal import Decimal, InvalidOperation
import math
import re
from typing import Optional, Union

CENT = Decimal('0.01')

DECIMAL_RE = re.compile(r'[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)')
FLOAT_RE = re.compile(r'[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?')
COUNT_RE = re.compile(r'\+?[0-9]+')


def validate_finite(value_str: str) -> float:
    """
    Parse a coordinate or measurement into a finite float.

    Raises:
        ValueError: If the text is not a number or is NaN/infinite
    """
    if not isinstance(value_str, str) or not FLOAT_RE.fullmatch(value_str.strip()):
        raise ValueError(f"Invalid number format: {value_str!r}")
    value = float(value_str.strip())
    if not math.isfinite(value):
        raise ValueError(f"Number must be finite: {value_str!r}")
    return value


def validate_money(amount_str: str) -> Decimal:
    """
    Parse a money amount with at most two decimals.

    Args:
        amount_str: Text such as '3.50'

    Returns:
        Decimal: amount quantized to cents

    Raises:
        ValueError: If amount cannot be parsed, has sub-cent digits or is negative
    """
    if not isinstance(amount_str, str) or not DECIMAL_RE.fullmatch(amount_str.strip()):
        raise ValueError(f"Invalid amount format: {amount_str!r}")
    amount = Decimal(amount_str.strip())
    if amount < 0:
        raise ValueError("Amount cannot be negative")
    try:
        cents = amount.quantize(CENT)
    except InvalidOperation:
        raise ValueError(f"Amount out of range: {amount_str!r}")
    if amount != cents:
        raise ValueError(f"Amount has more than two decimals: {amount_str!r}")
    return cents


def validate_positive_int(value_str: str) -> int:
    """Parse a strictly positive integer (quantities, counts)."""
    text = (value_str or '').strip()
    if not COUNT_RE.fullmatch(text):
        raise ValueError(f"Invalid integer format: {value_str!r}")
    value = int(text)
    if value <= 0:
        raise ValueError("Value must be positive")
    return value


def validate_count(value_str: Union[int, str]) -> int:
    """Parse a non-negative integer."""
    text = str(value_str).strip()
    if not text.isascii() or not text.isdigit():
        raise ValueError(f"Invalid count format: {value_str!r}")
    return int(text)


def validate_timestamp(ts_str: str) -> datetime:
    """
    Parse an ISO-8601 timestamp carrying a UTC offset, normalized to UTC.

    Raises:
        ValueError: If unparseable, naive (no offset) or finer than one second
    """
    text = (ts_str or '').strip()
    try:
        parsed = datetime.fromisoformat(text)
    except (ValueError, OverflowError):
        raise ValueError(f"Invalid timestamp format: {ts_str!r}")
    if parsed.tzinfo is None or parsed.utcoffset() is None:
        raise ValueError(f"Timestamp has no UTC offset: {ts_str!r}")
    if parsed.microsecond:
        raise ValueError(f"Timestamp finer than one second: {ts_str!r}")
    try:
        return parsed.astimezone(timezone.utc)
    except OverflowError:
        raise ValueError(f"Timestamp out of range: {ts_str!r}")


def format_timestamp(ts: datetime) -> str:
    """Canonical UTC rendering used in staging and warehouse files."""
    return ts.astimezone(timezone.utc).replace(tzinfo=None).isoformat() + "Z"


def validate_date_string(date_str: Optional[str]) -> Optional[date]:
    """
    Validate date string in YYYY-MM-DD format.

    Returns:
        date: Parsed date or None if input was None
    """
    if date_str is None or date_str.strip() == "":
        return None
    try:
        return date.fromisoformat(date_str.strip())
    except ValueError:
        raise ValueError(f"Invalid date format: {date_str}. Use YYYY-MM-DD format")
