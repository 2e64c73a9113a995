"""Reference inputs of the load: product catalogue, unit-cost snapshot, customer demographics.

Unlike the gated ping and POS feeds these files are trusted master data, so any
bad row fails the whole file.
"""

import csv
from dataclasses import dataclass
from decimal import Decimal
from typing import Dict, List, Optional

from helpers.validation import validate_count, validate_money
from models.errors import IngestError
from models.star_schema import UNKNOWN
from pipeline.ingest import decode_lines

CATALOGUE_HEADER = ['sku_key', 'product_name', 'category', 'supplier_name', 'home_area_name', 'unit_price', 'stock_on_hand']
COST_HEADER = ['sku_key', 'unit_cost']
DEMOGRAPHICS_HEADER = ['customer_id', 'gender', 'age', 'location']
GENDERS = ('M', 'F')


@dataclass(frozen=True)
class CatalogueEntry:
    sku_key: str
    product_name: str
    category: str
    supplier_name: str
    home_area_name: str
    unit_price: Decimal
    stock_on_hand: int


@dataclass(frozen=True)
class Demographics:
    customer_id: str
    gender: str
    age: Optional[int]
    location: str


def parse_catalogue(data: bytes) -> List[CatalogueEntry]:
    entries = []
    for line_no, row in _records(data, CATALOGUE_HEADER):
        try:
            entries.append(CatalogueEntry(
                sku_key=_required(row['sku_key']),
                product_name=_required(row['product_name']),
                category=row['category'].strip() or UNKNOWN,
                supplier_name=_required(row['supplier_name']),
                home_area_name=_required(row['home_area_name']),
                unit_price=validate_money(row['unit_price']),
                stock_on_hand=validate_count(row['stock_on_hand']),
            ))
        except ValueError as e:
            raise IngestError('MALFORMED_ROW', f"catalogue line {line_no}: {e}", {'line_no': line_no})
    return entries


def parse_costs(data: bytes) -> Dict[str, Decimal]:
    costs: Dict[str, Decimal] = {}
    for line_no, row in _records(data, COST_HEADER):
        try:
            costs[_required(row['sku_key'])] = validate_money(row['unit_cost'])
        except ValueError as e:
            raise IngestError('MALFORMED_ROW', f"cost line {line_no}: {e}", {'line_no': line_no})
    return costs


def parse_demographics(data: bytes) -> List[Demographics]:
    people = []
    for line_no, row in _records(data, DEMOGRAPHICS_HEADER):
        try:
            gender = row['gender'].strip().upper()
            age_text = row['age'].strip()
            people.append(Demographics(
                customer_id=_required(row['customer_id']),
                gender=gender if gender in GENDERS else UNKNOWN,
                age=None if age_text in ('', UNKNOWN) else validate_count(age_text),
                location=row['location'].strip(),
            ))
        except ValueError as e:
            raise IngestError('MALFORMED_ROW', f"demographics line {line_no}: {e}", {'line_no': line_no})
    return people


def _required(text: str) -> str:
    value = (text or '').strip()
    if not value:
        raise ValueError("required field is empty")
    return value


def _records(data: bytes, header: List[str]):
    lines = decode_lines(data)
    if not lines:
        return
    try:
        rows = list(csv.reader(lines))
    except csv.Error as e:
        raise IngestError('MALFORMED_ROW', f"unreadable CSV: {e}")
    if [f.strip() for f in rows[0]] != header:
        raise IngestError('BAD_HEADER', f"expected header {','.join(header)}")
    for line_no, fields in enumerate(rows[1:], start=2):
        if not any(f.strip() for f in fields):
            continue
        if len(fields) != len(header):
            raise IngestError('MALFORMED_ROW', f"line {line_no}: expected {len(header)} fields, got {len(fields)}",
                              {'line_no': line_no})
        yield line_no, dict(zip(header, fields))
