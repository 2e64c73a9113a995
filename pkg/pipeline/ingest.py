"""Stage-1 extraction: parse raw ping and POS files through the data-quality gate.

Every data line ends up either accepted or rejected with a reason; only
whole-file problems (encoding, header) raise.
"""

import csv
import logging
from typing import Dict, List, Optional, Tuple

from helpers.validation import validate_finite, validate_money, validate_positive_int, validate_timestamp
from models.errors import IngestError
from models.ping import Ping, ReceiptLine, STATUSES
from models.quality import ParseResult, QualityReport, RejectRecord
from models.zone import StoreMap

logger = logging.getLogger(__name__)

PING_HEADER = ['customer_id', 'ts', 'x', 'y', 'status']
POS_HEADER = ['customer_id', 'ts', 'receipt_id', 'sku_key', 'product_name', 'quantity', 'unit_price', 'line_total']

PINGS = 'pings'
POS = 'pos'

# Reject reasons
EMPTY_ROW = 'EMPTY_ROW'
MALFORMED_ROW = 'MALFORMED_ROW'
MISSING_FIELD = 'MISSING_FIELD'
BAD_TIMESTAMP = 'BAD_TIMESTAMP'
BAD_NUMBER = 'BAD_NUMBER'
BAD_STATUS = 'BAD_STATUS'
OUT_OF_BOUNDS = 'OUT_OF_BOUNDS'
DUPLICATE = 'DUPLICATE'
CONFLICTING_FIX = 'CONFLICTING_FIX'
TOTAL_MISMATCH = 'TOTAL_MISMATCH'
DUPLICATE_LINE = 'DUPLICATE_LINE'


class _Reject(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def decode_lines(data: bytes) -> List[str]:
    """Decode UTF-8 bytes and split into lines (trailing newline and CR stripped)."""
    try:
        text = data.decode('utf-8')
    except UnicodeDecodeError as e:
        raise IngestError('UNDECODABLE_INPUT', f"input is not valid UTF-8 at byte {e.start}")
    text = text.lstrip('\ufeff')
    if not text:
        return []
    lines = text.split('\n')
    if lines[-1] == '':
        lines.pop()
    return [line[:-1] if line.endswith('\r') else line for line in lines]


def detect_kind(data: bytes) -> str:
    """Tell ping files from POS files by their header line."""
    lines = decode_lines(data)
    try:
        header = _split(lines[0]) if lines else []
    except csv.Error:
        header = []
    if header == PING_HEADER:
        return PINGS
    if header == POS_HEADER:
        return POS
    raise IngestError('BAD_HEADER', "header matches neither the ping nor the POS format")


def parse_pings(data: bytes, store_map: Optional[StoreMap] = None) -> ParseResult:
    """
    Parse a ping CSV file.

    Args:
        data: raw file bytes
        store_map: when given with bounds, pings outside the floor plan are rejected OUT_OF_BOUNDS

    Returns:
        ParseResult with accepted Ping objects, reject records and the QualityReport
    """
    lines = decode_lines(data)
    report = QualityReport(source_kind=PINGS, null_counts={name: 0 for name in PING_HEADER})
    accepted: List[Ping] = []
    accepted_raw: List[str] = []
    rejects: List[RejectRecord] = []
    if not lines:
        return _result(accepted, accepted_raw, rejects, report)
    _check_header(lines[0], PING_HEADER)

    bounds = store_map.bounds if store_map is not None else None
    seen: Dict[Tuple[str, object], Tuple[float, float]] = {}
    for line_no, raw in enumerate(lines[1:], start=2):
        try:
            fields = _fields(raw, PING_HEADER, report)
            customer_id = fields[0].strip()
            if not customer_id:
                raise _Reject(MISSING_FIELD)
            ts = _timestamp(fields[1])
            x = _number(fields[2])
            y = _number(fields[3])
            status = fields[4].strip() or None
            if status is not None and status not in STATUSES:
                raise _Reject(BAD_STATUS)
            if bounds is not None and not bounds.contains(x, y):
                report.out_of_bounds_count += 1
                raise _Reject(OUT_OF_BOUNDS)
            key = (customer_id, ts)
            if key in seen:
                if seen[key] == (x, y):
                    report.duplicate_count += 1
                    raise _Reject(DUPLICATE)
                raise _Reject(CONFLICTING_FIX)
            seen[key] = (x, y)
        except _Reject as reject:
            rejects.append(RejectRecord(line_no, reject.reason, raw))
            report.record_reject(reject.reason)
            continue
        accepted.append(Ping(customer_id, ts, x, y, status))
        accepted_raw.append(raw)
        report.record_accept()
    return _result(accepted, accepted_raw, rejects, report)


def parse_pos(data: bytes) -> ParseResult:
    """Parse a POS receipt-line CSV file; line_total must equal quantity x unit_price exactly."""
    lines = decode_lines(data)
    report = QualityReport(source_kind=POS, null_counts={name: 0 for name in POS_HEADER})
    accepted: List[ReceiptLine] = []
    accepted_raw: List[str] = []
    rejects: List[RejectRecord] = []
    if not lines:
        return _result(accepted, accepted_raw, rejects, report)
    _check_header(lines[0], POS_HEADER)

    seen = set()
    for line_no, raw in enumerate(lines[1:], start=2):
        try:
            fields = _fields(raw, POS_HEADER, report)
            customer_id, ts_text, receipt_id, sku_key, product_name = (f.strip() for f in fields[:5])
            if not (receipt_id and sku_key and product_name):
                raise _Reject(MISSING_FIELD)
            ts = _timestamp(ts_text)
            try:
                quantity = validate_positive_int(fields[5])
                unit_price = validate_money(fields[6])
                line_total = validate_money(fields[7])
            except ValueError:
                raise _Reject(BAD_NUMBER)
            if line_total != unit_price * quantity:
                raise _Reject(TOTAL_MISMATCH)
            key = (receipt_id, sku_key)
            if key in seen:
                raise _Reject(DUPLICATE_LINE)
            seen.add(key)
        except _Reject as reject:
            rejects.append(RejectRecord(line_no, reject.reason, raw))
            report.record_reject(reject.reason)
            continue
        accepted.append(ReceiptLine(customer_id, ts, receipt_id, sku_key, product_name, quantity, unit_price, line_total))
        accepted_raw.append(raw)
        report.record_accept()
    return _result(accepted, accepted_raw, rejects, report)


def _result(accepted, accepted_raw, rejects, report) -> ParseResult:
    result = ParseResult(accepted=accepted, rejects=rejects, report=report, accepted_raw=accepted_raw)
    if report.rows_rejected:
        logger.info("%s: %d of %d rows rejected %s", report.source_kind, report.rows_rejected,
                    report.rows_read, dict(sorted(report.reject_reasons.items())))
    return result


def _check_header(line: str, expected: List[str]) -> None:
    try:
        header = _split(line)
    except csv.Error:
        header = None
    if header != expected:
        raise IngestError('BAD_HEADER', f"expected header {','.join(expected)}")


def _split(line: str) -> List[str]:
    if '"' not in line and '\r' not in line and '\x00' not in line:
        return [f.strip() for f in line.split(',')]
    return [f.strip() for f in next(csv.reader([line]), [])]


def _fields(raw: str, header: List[str], report: QualityReport) -> List[str]:
    if not raw.strip():
        for name in header:
            report.null_counts[name] += 1
        raise _Reject(EMPTY_ROW)
    try:
        if '"' not in raw and '\r' not in raw and '\x00' not in raw:
            fields = raw.split(',')
        else:
            fields = next(csv.reader([raw]), [])
    except csv.Error:
        raise _Reject(MALFORMED_ROW)
    for i, name in enumerate(header):
        if i >= len(fields) or not fields[i].strip():
            report.null_counts[name] += 1
    if len(fields) != len(header):
        raise _Reject(MISSING_FIELD)
    return fields


def _timestamp(text: str):
    try:
        return validate_timestamp(text)
    except ValueError:
        raise _Reject(BAD_TIMESTAMP)


def _number(text: str) -> float:
    try:
        return validate_finite(text)
    except ValueError:
        raise _Reject(BAD_NUMBER)
