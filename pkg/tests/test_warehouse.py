import os
import tempfile
import unittest
from datetime import date
from decimal import Decimal
from unittest import mock

from models.config_model import AppConfig
from models.errors import IngestError, StagingError, WarehouseError
from models.staging_batch import LOADED, TRANSFORMED
from models.star_schema import (
    AREA, DM_CALENDAR, DM_CUSTOMERS, DM_MOVEMENT, DM_PRODUCTS, DM_SUPPLIES, FACT_CUST_BEHAVIOUR, FACT_SALES, TABLES,
)
from pipeline import reference
from pipeline.etl import run_load
from pipeline.ingest import parse_pings, parse_pos
from pipeline.staging import StagingStore
from pipeline.warehouse import Violation, Warehouse, compute_margin

from tests import sample_data


class TestComputeMargin(unittest.TestCase):

    def test_simple_ratio(self):
        self.assertEqual(compute_margin(Decimal('1.80'), Decimal('5.00')), Decimal('0.3600'))

    def test_no_revenue_is_zero(self):
        self.assertEqual(compute_margin(Decimal('0.00'), Decimal('0.00')), Decimal('0.0000'))

    def test_half_even_rounding(self):
        self.assertEqual(compute_margin(Decimal('0.01'), Decimal('200.00')), Decimal('0.0000'))
        self.assertEqual(compute_margin(Decimal('0.03'), Decimal('200.00')), Decimal('0.0002'))
        self.assertEqual(compute_margin(Decimal('1.00'), Decimal('3.00')), Decimal('0.3333'))


class TestReferenceFiles(unittest.TestCase):

    def test_catalogue(self):
        entries = reference.parse_catalogue(sample_data.PRODUCTS.encode('utf-8'))
        self.assertEqual([e.sku_key for e in entries], ['SKU-A', 'SKU-B', 'SKU-C'])
        self.assertEqual(entries[1].unit_price, Decimal('2.00'))
        self.assertEqual(entries[2].stock_on_hand, 0)

    def test_costs(self):
        costs = reference.parse_costs(sample_data.COSTS.encode('utf-8'))
        self.assertEqual(costs, {'SKU-A': Decimal('1.00'), 'SKU-B': Decimal('1.20'), 'SKU-C': Decimal('2.00')})

    def test_demographics_unknowns(self):
        people = reference.parse_demographics(sample_data.DEMOGRAPHICS.encode('utf-8'))
        c3 = people[2]
        self.assertEqual((c3.gender, c3.age, c3.location), ('UNKNOWN', None, ''))
        self.assertEqual(people[1].age, 70)

    def test_bad_money_is_malformed(self):
        with self.assertRaises(IngestError) as ctx:
            reference.parse_costs(b"sku_key,unit_cost\nSKU-A,cheap\n")
        self.assertEqual(ctx.exception.code, 'MALFORMED_ROW')

    def test_wrong_header(self):
        with self.assertRaises(IngestError) as ctx:
            reference.parse_catalogue(b"sku,name\nA,B\n")
        self.assertEqual(ctx.exception.code, 'BAD_HEADER')


class WorkspaceTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.workspace = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def run_load(self, config=None):
        """Helper method to load whatever is staged with the sample reference data."""
        return run_load(
            self.workspace,
            sample_data.store_map(),
            reference.parse_catalogue(sample_data.PRODUCTS.encode('utf-8')),
            reference.parse_costs(sample_data.COSTS.encode('utf-8')),
            reference.parse_demographics(sample_data.DEMOGRAPHICS.encode('utf-8')),
            config or AppConfig(),
        )


class TestRunLoad(WorkspaceTestCase):

    def test_summary_counts(self):
        summary = sample_data.load_sample(self.workspace)
        self.assertEqual(summary.generation, 1)
        self.assertEqual(summary.batches, [1, 2])
        self.assertEqual(summary.customer_days, 3)
        self.assertEqual(summary.segments, 5)
        self.assertEqual(summary.orphan_pings, 1)
        self.assertEqual(summary.late_pings, 0)
        self.assertEqual(summary.attribute_conflicts, 0)
        self.assertEqual(summary.table_rows, {
            AREA: 3, DM_SUPPLIES: 2, DM_PRODUCTS: 3, DM_CALENDAR: 3, DM_CUSTOMERS: 4, DM_MOVEMENT: 2,
            FACT_SALES: 4, FACT_CUST_BEHAVIOUR: 5,
        })
        self.assertEqual(summary.inserted, summary.table_rows)

    def test_load_without_staging(self):
        with self.assertRaises(StagingError) as ctx:
            self.run_load()
        self.assertEqual(ctx.exception.code, 'MISSING_STAGE')

    def test_batches_marked_transformed(self):
        sample_data.load_sample(self.workspace)
        staging = StagingStore(self.workspace)
        self.assertEqual(staging.list_batches(LOADED), [])
        self.assertEqual(len(staging.list_batches(TRANSFORMED)), 2)

    def test_reload_changes_nothing(self):
        sample_data.load_sample(self.workspace)
        again = self.run_load()
        self.assertEqual(again.generation, 1)
        self.assertEqual(again.batches, [])
        self.assertEqual(set(again.inserted.values()), {0})

    def test_late_pings_are_counted_not_loaded(self):
        sample_data.load_sample(self.workspace)
        late = sample_data.PING_HEADER + "C1,2024-03-04T10:10:00+00:00,5.0,2.5,\n"
        StagingStore(self.workspace).stage(parse_pings(late.encode('utf-8')), 'late.csv', 'late-checksum')
        summary = self.run_load()
        self.assertEqual(summary.late_pings, 1)
        self.assertEqual(summary.customer_days, 0)
        self.assertEqual(summary.inserted[FACT_CUST_BEHAVIOUR], 0)
        self.assertEqual(summary.generation, 2)

    def test_unknown_sku_aborts_load(self):
        sample_data.stage_sample(self.workspace)
        bad = sample_data.POS.split('\n')[0] + "\nC1,2024-03-06T09:00:00+00:00,R9,SKU-Z,Kiwi,1,1.00,1.00\n"
        StagingStore(self.workspace).stage(parse_pos(bad.encode('utf-8')), 'bad.csv', 'bad-checksum')
        with self.assertRaises(WarehouseError) as ctx:
            self.run_load()
        self.assertEqual(ctx.exception.code, 'UNRESOLVED_KEY')
        self.assertFalse(Warehouse.open(self.workspace).exists())
        self.assertEqual(len(StagingStore(self.workspace).list_batches(LOADED)), 3)

    def test_duplicate_receipt_line_across_batches_is_skipped(self):
        sample_data.load_sample(self.workspace)
        repeat = sample_data.POS.split('\n')[0] + "\n" + sample_data.POS.split('\n')[1] + "\n"
        StagingStore(self.workspace).stage(parse_pos(repeat.encode('utf-8')), 'again.csv', 'again-checksum')
        summary = self.run_load()
        self.assertEqual(summary.skipped_sales_lines, 1)
        self.assertEqual(summary.inserted[FACT_SALES], 0)

    def test_store_offset_moves_local_date(self):
        config = AppConfig(store_utc_offset='-11:00')
        summary = sample_data.load_sample(self.workspace, config)
        warehouse = Warehouse.open(self.workspace)
        days = sorted(row.date for row in warehouse.table(DM_CALENDAR))
        self.assertEqual(days, [date(2024, 3, 3), date(2024, 3, 5), date(2024, 4, 2)])
        self.assertEqual(summary.customer_days, 3)


class Crash(Exception):
    pass


class TestInterruptedLoad(WorkspaceTestCase):
    """A load killed part way and run again leaves the same files as one clean load."""

    def setUp(self):
        super().setUp()
        self.clean = tempfile.TemporaryDirectory()
        sample_data.load_sample(self.clean.name)

    def tearDown(self):
        self.clean.cleanup()
        super().tearDown()

    def snapshot(self, workspace):
        """Helper method reading every file under a workspace, keyed by relative path."""
        files = {}
        for root, _, names in os.walk(workspace):
            for name in names:
                path = os.path.join(root, name)
                with open(path, 'rb') as f:
                    files[os.path.relpath(path, workspace)] = f.read()
        return files

    def test_crash_before_the_manifest_swap(self):
        sample_data.stage_sample(self.workspace)
        with mock.patch('pipeline.warehouse.write_atomic', side_effect=Crash):
            with self.assertRaises(Crash):
                self.run_load()
        self.assertFalse(Warehouse.open(self.workspace).exists())
        self.assertEqual(len(StagingStore(self.workspace).list_batches(LOADED)), 2)

        summary = self.run_load()
        self.assertEqual(summary.generation, 1)
        self.assertEqual(self.snapshot(self.workspace), self.snapshot(self.clean.name))

    def test_crash_after_publish(self):
        sample_data.stage_sample(self.workspace)
        with mock.patch.object(StagingStore, 'mark_transformed', side_effect=Crash):
            with self.assertRaises(Crash):
                self.run_load()
        self.assertEqual(Warehouse.open(self.workspace).generation, 1)

        summary = self.run_load()
        self.assertEqual(summary.batches, [])
        self.assertEqual(summary.generation, 1)
        self.assertEqual(StagingStore(self.workspace).list_batches(LOADED), [])
        self.assertEqual(self.snapshot(self.workspace), self.snapshot(self.clean.name))


class TestWarehouseTables(WorkspaceTestCase):

    def setUp(self):
        super().setUp()
        sample_data.load_sample(self.workspace)
        self.warehouse = Warehouse.open(self.workspace)

    def sales_for(self, receipt_id):
        return [row for row in self.warehouse.table(FACT_SALES) if row.receipt_id == receipt_id]

    def test_reserved_rows(self):
        self.assertEqual(self.warehouse.key_for(AREA, 'UNZONED'), 0)
        self.assertEqual(self.warehouse.key_for(DM_CUSTOMERS, 'UNKNOWN'), 0)
        self.assertEqual(self.warehouse.key_for(DM_MOVEMENT, 'STOP'), 1)
        self.assertEqual(self.warehouse.key_for(DM_MOVEMENT, 'MOVE'), 2)

    def test_dimension_keys(self):
        self.assertEqual(self.warehouse.key_for(AREA, 'Produce'), 1)
        self.assertEqual(self.warehouse.key_for(AREA, 'Dairy'), 2)
        self.assertEqual(self.warehouse.key_for(DM_CUSTOMERS, 'C3'), 3)
        self.assertEqual(self.warehouse.row_for(DM_PRODUCTS, 'SKU-B').home_area_key, 2)

    def test_sales_rows(self):
        apples, milk = self.sales_for('R1')
        self.assertEqual((apples.quantity, apples.revenue, apples.cost, apples.profit),
                         (2, Decimal('3.00'), Decimal('2.00'), Decimal('1.00')))
        self.assertEqual(milk.margin, Decimal('0.4000'))
        self.assertEqual(apples.stock, 100)
        self.assertEqual(apples.date_key, 20240304)

    def test_walk_in_goes_to_unknown_customer(self):
        walk_in, = self.sales_for('W1')
        self.assertEqual(walk_in.customer_key, 0)
        self.assertEqual(walk_in.profit, Decimal('2.40'))

    def test_behaviour_rows(self):
        rows = [row for row in self.warehouse.table(FACT_CUST_BEHAVIOUR) if row.customer_key == 1]
        self.assertEqual([(r.area_key, r.movement_key, r.duration_s) for r in rows],
                         [(1, 1, 20.0), (0, 2, 8.0), (2, 1, 20.0)])
        self.assertEqual([r.visit_start for r in rows], [1, 1, 1])
        self.assertAlmostEqual(rows[1].distance_m, 20.0)
        self.assertAlmostEqual(rows[1].speed_m_s, 2.5)

    def test_integrity_clean(self):
        self.assertEqual(self.warehouse.integrity_check(), [])

    def test_integrity_flags_broken_identity(self):
        row = self.warehouse.rows[FACT_SALES][0]
        self.warehouse.rows[FACT_SALES][0] = type(row)(**{**row.__dict__, 'profit': Decimal('9.99')})
        violations = self.warehouse.integrity_check()
        self.assertIn(Violation(FACT_SALES, 1, 'PROFIT_IDENTITY',
                                f"profit 9.99 != revenue {row.revenue} - cost {row.cost}"), violations)

    def test_conflicting_attributes_keep_existing_row(self):
        key = self.warehouse.upsert_dimension(DM_CUSTOMERS, {
            'customer_id': 'C1', 'gender': 'M', 'age': 30, 'location': 'North',
        })
        self.assertEqual(key, 1)
        self.assertEqual(self.warehouse.row_for(DM_CUSTOMERS, 'C1').gender, 'F')
        self.assertEqual(len(self.warehouse.conflicts), 1)
        self.assertEqual(self.warehouse.conflicts[0].column, 'gender')

    def test_publish_without_changes_keeps_generation(self):
        self.assertEqual(self.warehouse.publish([1, 2]), 1)

    def test_pending_rows_invisible_until_published(self):
        self.warehouse.upsert_dimension(DM_SUPPLIES, {'supplier_name': 'New Co'})
        self.assertEqual(Warehouse.open(self.workspace).counts()[DM_SUPPLIES], 2)
        self.assertEqual(self.warehouse.publish(), 2)
        self.assertEqual(Warehouse.open(self.workspace).counts()[DM_SUPPLIES], 3)

    def test_export_tables(self):
        out_dir = os.path.join(self.workspace, 'export')
        paths = self.warehouse.export_tables(out_dir)
        self.assertEqual([os.path.basename(p) for p in paths], [f"{t}.csv" for t in TABLES])
        with open(os.path.join(out_dir, 'fact_sales.csv'), encoding='utf-8') as f:
            lines = f.read().splitlines()
        self.assertEqual(len(lines), 5)
        self.assertTrue(lines[0].startswith('product_key,customer_key,date_key,area_key,receipt_id'))


if __name__ == '__main__':
    unittest.main()
