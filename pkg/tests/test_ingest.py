import unittest
from datetime import datetime, timezone
from decimal import Decimal

import numpy as np

from models.errors import IngestError
from pipeline.ingest import (
    BAD_NUMBER, BAD_STATUS, BAD_TIMESTAMP, CONFLICTING_FIX, DUPLICATE, DUPLICATE_LINE, EMPTY_ROW, MISSING_FIELD,
    OUT_OF_BOUNDS, PINGS, POS, TOTAL_MISMATCH, detect_kind, parse_pings, parse_pos,
)
from pipeline.storemap import load_map

PING_HEADER = "customer_id,ts,x,y,status"
POS_HEADER = "customer_id,ts,receipt_id,sku_key,product_name,quantity,unit_price,line_total"


class TestParsePings(unittest.TestCase):

    def setUp(self):
        self.store_map = load_map("# bounds=0,0,20,10\narea_name,x0,y0,x1,y1,sequence_index\nA,0,0,10,5,1\n")

    def make_file(self, *rows):
        """Helper method to build ping file bytes."""
        return "\n".join([PING_HEADER, *rows, ""]).encode('utf-8')

    def reasons(self, result):
        return [(r.line_no, r.reason) for r in result.rejects]

    def test_clean_rows(self):
        result = parse_pings(self.make_file(
            "C1,2024-03-04T10:00:00+00:00,1.5,2.5,",
            "C1,2024-03-04T10:00:01+00:00,1.6,2.5,SUS",
        ))
        self.assertEqual(len(result.accepted), 2)
        self.assertEqual(result.accepted[1].status, 'SUS')
        self.assertIsNone(result.accepted[0].status)
        self.assertEqual(result.accepted[0].ts, datetime(2024, 3, 4, 10, 0, tzinfo=timezone.utc))

    def test_offsets_normalize_to_utc(self):
        result = parse_pings(self.make_file("C1,2024-03-04T13:00:00+03:00,1,1,"))
        self.assertEqual(result.accepted[0].ts, datetime(2024, 3, 4, 10, 0, tzinfo=timezone.utc))

    def test_each_reject_reason(self):
        result = parse_pings(self.make_file(
            "",
            "C1,2024-03-04T10:00:00+00:00,1,1",
            ",2024-03-04T10:00:00+00:00,1,1,",
            "C1,2024-03-04T10:00:00,1,1,",
            "C1,2024-03-04T10:00:00.500+00:00,1,1,",
            "C1,2024-03-04T10:00:00+00:00,abc,1,",
            "C1,2024-03-04T10:00:00+00:00,nan,1,",
            "C1,2024-03-04T10:00:00+00:00,1,1,LOST",
        ))
        self.assertEqual(self.reasons(result), [
            (2, EMPTY_ROW), (3, MISSING_FIELD), (4, MISSING_FIELD), (5, BAD_TIMESTAMP), (6, BAD_TIMESTAMP),
            (7, BAD_NUMBER), (8, BAD_NUMBER), (9, BAD_STATUS),
        ])
        self.assertEqual(result.report.rows_read, 8)
        self.assertEqual(result.report.rows_accepted, 0)

    def test_out_of_bounds_only_with_a_map(self):
        data = self.make_file("C1,2024-03-04T10:00:00+00:00,25,1,")
        self.assertEqual(len(parse_pings(data).accepted), 1)
        result = parse_pings(data, self.store_map)
        self.assertEqual(self.reasons(result), [(2, OUT_OF_BOUNDS)])
        self.assertEqual(result.report.out_of_bounds_count, 1)

    def test_duplicate_and_conflicting_fix(self):
        result = parse_pings(self.make_file(
            "C1,2024-03-04T10:00:00+00:00,1,1,",
            "C1,2024-03-04T10:00:00+00:00,1,1,",
            "C1,2024-03-04T10:00:00+00:00,2,1,",
            "C2,2024-03-04T10:00:00+00:00,2,1,",
        ))
        self.assertEqual(self.reasons(result), [(3, DUPLICATE), (4, CONFLICTING_FIX)])
        self.assertEqual(result.report.duplicate_count, 1)
        self.assertEqual(len(result.accepted), 2)

    def test_report_balances(self):
        result = parse_pings(self.make_file(
            "C1,2024-03-04T10:00:00+00:00,1,1,",
            "C1,bad,1,1,",
            "C1,2024-03-04T10:00:02+00:00,1,,",
        ))
        report = result.report
        self.assertTrue(report.is_balanced)
        self.assertEqual(report.rows_read, 3)
        self.assertEqual(report.reject_reasons, {BAD_TIMESTAMP: 1, BAD_NUMBER: 1})
        self.assertEqual(report.null_counts['y'], 1)
        self.assertEqual(report.null_counts['status'], 3)

    def test_rejects_keep_raw_line(self):
        result = parse_pings(self.make_file("C1,later,1,1,"))
        self.assertEqual(result.rejects[0].raw_line, "C1,later,1,1,")

    def test_empty_file_is_valid(self):
        result = parse_pings(b"")
        self.assertEqual(result.report.rows_read, 0)
        self.assertEqual(result.accepted, [])

    def test_bad_header(self):
        with self.assertRaises(IngestError) as ctx:
            parse_pings(b"customer,ts,x,y,status\nC1,2024-03-04T10:00:00+00:00,1,1,\n")
        self.assertEqual(ctx.exception.code, 'BAD_HEADER')

    def test_undecodable_input(self):
        with self.assertRaises(IngestError) as ctx:
            parse_pings(PING_HEADER.encode('utf-8') + b"\nC1,\xff\xfe,1,1,\n")
        self.assertEqual(ctx.exception.code, 'UNDECODABLE_INPUT')

    def test_crlf_and_bom(self):
        data = ("\ufeff" + PING_HEADER + "\r\nC1,2024-03-04T10:00:00+00:00,1,1,\r\n").encode('utf-8')
        self.assertEqual(len(parse_pings(data).accepted), 1)

    def test_non_ascii_digits_are_bad_numbers(self):
        result = parse_pings(self.make_file(
            "C1,2024-03-04T10:00:00+00:00,1_000,1,",
            "C1,2024-03-04T10:00:01+00:00,\u00b2,1,",
            "C1,2024-03-04T10:00:02+00:00,1,\u0661,",
            "C1,2024-03-04T10:00:03+00:00,1e0,-.5,",
        ))
        self.assertEqual(self.reasons(result), [(2, BAD_NUMBER), (3, BAD_NUMBER), (4, BAD_NUMBER)])
        self.assertEqual((result.accepted[0].x, result.accepted[0].y), (1.0, -0.5))


class TestParsePos(unittest.TestCase):

    def make_file(self, *rows):
        """Helper method to build POS file bytes."""
        return "\n".join([POS_HEADER, *rows, ""]).encode('utf-8')

    def test_clean_line(self):
        result = parse_pos(self.make_file("C1,2024-03-04T10:05:00+00:00,R1,SKU-A,Apples,2,1.50,3.00"))
        line = result.accepted[0]
        self.assertEqual(line.quantity, 2)
        self.assertEqual(line.unit_price, Decimal('1.50'))
        self.assertEqual(line.line_total, Decimal('3.00'))
        self.assertFalse(line.is_walk_in)

    def test_walk_in_receipt(self):
        result = parse_pos(self.make_file(",2024-03-04T10:05:00+00:00,W1,SKU-A,Apples,1,1.50,1.50"))
        self.assertTrue(result.accepted[0].is_walk_in)

    def test_each_reject_reason(self):
        result = parse_pos(self.make_file(
            "C1,2024-03-04T10:05:00+00:00,R1,SKU-A,Apples,2,1.50",
            "C1,2024-03-04T10:05:00+00:00,,SKU-A,Apples,2,1.50,3.00",
            "C1,2024-03-04,R1,SKU-A,Apples,2,1.50,3.00",
            "C1,2024-03-04T10:05:00+00:00,R1,SKU-A,Apples,two,1.50,3.00",
            "C1,2024-03-04T10:05:00+00:00,R1,SKU-A,Apples,0,1.50,0.00",
            "C1,2024-03-04T10:05:00+00:00,R1,SKU-A,Apples,2,1.505,3.01",
            "C1,2024-03-04T10:05:00+00:00,R1,SKU-A,Apples,2,1.50,3.01",
            "C1,2024-03-04T10:05:00+00:00,R1,SKU-A,Apples,2,1.50,3.00",
            "C1,2024-03-04T10:05:00+00:00,R1,SKU-A,Apples,1,1.50,1.50",
        ))
        self.assertEqual([(r.line_no, r.reason) for r in result.rejects], [
            (2, MISSING_FIELD), (3, MISSING_FIELD), (4, BAD_TIMESTAMP), (5, BAD_NUMBER), (6, BAD_NUMBER),
            (7, BAD_NUMBER), (8, TOTAL_MISMATCH), (10, DUPLICATE_LINE),
        ])
        self.assertEqual(len(result.accepted), 1)

    def test_quoted_product_name(self):
        result = parse_pos(self.make_file('C1,2024-03-04T10:05:00+00:00,R1,SKU-A,"Apples, red",1,1.50,1.50'))
        self.assertEqual(result.accepted[0].product_name, "Apples, red")

    def test_non_ascii_digits_are_bad_numbers(self):
        result = parse_pos(self.make_file(
            "C1,2024-03-04T10:05:00+00:00,R1,SKU-A,Apples,\u00b2,1.50,3.00",
            "C1,2024-03-04T10:05:00+00:00,R2,SKU-A,Apples,1_0,1.50,15.00",
            "C1,2024-03-04T10:05:00+00:00,R3,SKU-A,Apples,1,1_000.00,1000.00",
            "C1,2024-03-04T10:05:00+00:00,R4,SKU-A,Apples,\u0661,1.50,1.50",
            "C1,2024-03-04T10:05:00+00:00,R5,SKU-A,Apples,1,1.5e0,1.50",
            "C1,2024-03-04T10:05:00+00:00,R6,SKU-A,Apples,+1,1.50,1.50",
        ))
        self.assertEqual([(r.line_no, r.reason) for r in result.rejects],
                         [(2, BAD_NUMBER), (3, BAD_NUMBER), (4, BAD_NUMBER), (5, BAD_NUMBER), (6, BAD_NUMBER)])
        self.assertEqual(result.accepted[0].quantity, 1)


class TestMutatedFiles(unittest.TestCase):
    """Damaged data lines are rejected one by one; nothing else raises and no row goes missing."""

    PING_ROWS = [
        "C1,2024-03-04T10:00:00+00:00,1.5,2.5,",
        "C1,2024-03-04T10:00:01+00:00,1.6,2.5,SUS",
        "C2,2024-03-04T10:00:01+01:00,3.25,0.75,MIG",
        "C2,2024-03-04T09:00:02+00:00,-0.5,1e1,",
        "C3,2024-03-05T08:30:00Z,7,4,SUS",
    ]
    POS_ROWS = [
        "C1,2024-03-04T10:05:00+00:00,R1,SKU-A,Apples,2,1.50,3.00",
        "C1,2024-03-04T10:05:00+00:00,R1,SKU-B,\"Bread, rye\",1,2.25,2.25",
        ",2024-03-04T11:00:00+00:00,W1,SKU-A,Apples,3,1.50,4.50",
        "C2,2024-03-05T09:15:00+02:00,R2,SKU-C,Milk,1,0.99,0.99",
    ]
    NOISE = list(',"\r\n\x00 -+.:_eZx9é²')

    def mutate(self, rng, line):
        op = int(rng.integers(7))
        k = int(rng.integers(len(line) + 1))
        if op == 0:
            return line[:k] + line[k + 1:]
        if op == 1:
            return line[:k] + str(rng.choice(self.NOISE)) + line[k:]
        fields = line.split(',')
        if op == 2:
            del fields[int(rng.integers(len(fields)))]
            return ','.join(fields)
        if op == 3:
            n = int(rng.integers(len(fields)))
            return ','.join(fields[:n + 1] + fields[n:])
        if op == 4:
            return ''
        if op == 5:
            return line[:k] + '"' + line[k:] + '"'
        return line + '\r'

    def mutated_file(self, rng, header, rows):
        lines = [rows[int(rng.integers(len(rows)))] for _ in range(int(rng.integers(1, 12)))]
        for _ in range(int(rng.integers(1, 4))):
            k = int(rng.integers(len(lines)))
            lines[k] = self.mutate(rng, lines[k])
        text = "\n".join([header, *lines, ""])
        body = text.split('\n')
        if body[-1] == '':
            body.pop()
        return text.encode('utf-8'), len(body) - 1

    def test_rows_are_conserved(self):
        rng = np.random.default_rng(2024)
        for n in range(1000):
            if n % 2:
                data, expected_rows = self.mutated_file(rng, PING_HEADER, self.PING_ROWS)
                result = parse_pings(data)
            else:
                data, expected_rows = self.mutated_file(rng, POS_HEADER, self.POS_ROWS)
                result = parse_pos(data)
            report = result.report
            with self.subTest(file=n):
                self.assertEqual(report.rows_read, expected_rows)
                self.assertEqual(len(result.accepted) + len(result.rejects), report.rows_read)
                self.assertEqual(report.rows_accepted, len(result.accepted))
                self.assertEqual(report.rows_rejected, len(result.rejects))
                self.assertTrue(report.is_balanced)

    def test_damaged_header_fails_the_file(self):
        rng = np.random.default_rng(7)
        for n in range(100):
            header = self.mutate(rng, PING_HEADER)
            data = "\n".join([header, *self.PING_ROWS, ""]).encode('utf-8')
            try:
                parse_pings(data)
            except IngestError as e:
                self.assertEqual(e.code, 'BAD_HEADER')


class TestDetectKind(unittest.TestCase):

    def test_ping_and_pos_headers(self):
        self.assertEqual(detect_kind(f"{PING_HEADER}\n".encode('utf-8')), PINGS)
        self.assertEqual(detect_kind(f"{POS_HEADER}\n".encode('utf-8')), POS)

    def test_unknown_header(self):
        with self.assertRaises(IngestError) as ctx:
            detect_kind(b"sku_key,unit_cost\n")
        self.assertEqual(ctx.exception.code, 'BAD_HEADER')

    def test_empty_file_has_no_kind(self):
        with self.assertRaises(IngestError):
            detect_kind(b"")


if __name__ == '__main__':
    unittest.main()
