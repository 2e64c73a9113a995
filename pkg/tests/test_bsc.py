import tempfile
import unittest
from datetime import date
from decimal import Decimal
from fractions import Fraction

from models.errors import BscError, ConfigError
from models.scorecard import AT_LEAST, AT_MOST, CUSTOMER, FINANCIAL, INTERNAL, OperationalInputs, Target
from pipeline.bsc import (
    compute_for_warehouse, compute_kpis, default_targets_text, evaluate, parse_inputs, parse_period, parse_targets,
    period_revenue,
)
from pipeline.warehouse import Warehouse

from tests import sample_data

INPUT_ROW = "2024-03,2024-04,1000.00,1250.00,400.00,100.00,1000.00,700.00,120,60,1000,980,4.0,4.8,990,1000,5,100,20,100"


class BscTestCase(unittest.TestCase):

    def make_inputs_file(self, *rows):
        """Helper method to build an operational inputs CSV."""
        return "\n".join([",".join(OperationalInputs.HEADER), *rows, ""]).encode('utf-8')

    def make_inputs(self, row=INPUT_ROW):
        return parse_inputs(self.make_inputs_file(row))[0]


class TestParseInputs(BscTestCase):

    def test_row_types(self):
        inputs = self.make_inputs()
        self.assertEqual(inputs.baseline_period, '2024-03')
        self.assertEqual(inputs.investment_cost, Decimal('1000.00'))
        self.assertEqual(inputs.survey_score_current, Decimal('4.8'))
        self.assertEqual(inputs.cc_orders_accurate, 980)

    def test_bad_header(self):
        with self.assertRaises(BscError) as ctx:
            parse_inputs(b"baseline_period,current_period\n2024-03,2024-04\n")
        self.assertEqual(ctx.exception.code, 'BAD_HEADER')

    def test_subcount_above_total(self):
        row = INPUT_ROW.replace(",1000,980,", ",1000,1001,")
        with self.assertRaises(BscError) as ctx:
            parse_inputs(self.make_inputs_file(row))
        self.assertEqual(ctx.exception.code, 'MALFORMED_ROW')

    def test_negative_money(self):
        row = INPUT_ROW.replace("2024-04,1000.00,", "2024-04,-1000.00,")
        with self.assertRaises(BscError) as ctx:
            parse_inputs(self.make_inputs_file(row))
        self.assertEqual(ctx.exception.code, 'MALFORMED_ROW')


class TestParsePeriod(unittest.TestCase):

    def test_period_shapes(self):
        self.assertEqual(parse_period('2024'), (date(2024, 1, 1), date(2024, 12, 31)))
        self.assertEqual(parse_period('2024-Q1'), (date(2024, 1, 1), date(2024, 3, 31)))
        self.assertEqual(parse_period('2024-02'), (date(2024, 2, 1), date(2024, 2, 29)))
        self.assertEqual(parse_period('2024-03-04'), (date(2024, 3, 4), date(2024, 3, 4)))

    def test_explicit_range(self):
        self.assertEqual(parse_period('2024-03..2024-Q2'), (date(2024, 3, 1), date(2024, 6, 30)))

    def test_bad_label(self):
        with self.assertRaises(BscError) as ctx:
            parse_period('March')
        self.assertEqual(ctx.exception.code, 'BAD_OPTION')

    def test_impossible_date(self):
        with self.assertRaises(BscError) as ctx:
            parse_period('2024-13')
        self.assertEqual(ctx.exception.code, 'BAD_OPTION')


class TestComputeKpis(BscTestCase):

    def setUp(self):
        self.kpis = compute_kpis(self.make_inputs(), Decimal('8.00'), Decimal('6.00'))

    def test_financial(self):
        self.assertEqual(self.kpis['roi'], Fraction(1, 4))
        self.assertEqual(self.kpis['sales_uplift'], Fraction(-1, 4))
        self.assertEqual(self.kpis['shrinkage_reduction'], Fraction(3, 4))
        self.assertEqual(self.kpis['ops_cost_reduction'], Fraction(3, 10))

    def test_customer(self):
        self.assertEqual(self.kpis['checkout_time_reduction'], Fraction(1, 2))
        self.assertEqual(self.kpis['cc_accuracy'], Fraction(98, 100))
        self.assertEqual(self.kpis['survey_improvement'], Fraction(1, 5))

    def test_internal(self):
        self.assertEqual(self.kpis['inventory_accuracy'], Fraction(99, 100))
        self.assertEqual(self.kpis['out_of_stock_rate'], Fraction(1, 20))
        self.assertEqual(self.kpis['out_of_stock_reduction'], Fraction(3, 4))

    def test_zero_baseline_is_named(self):
        inputs = self.make_inputs(INPUT_ROW.replace("2024-04,1000.00,", "2024-04,0.00,"))
        with self.assertRaises(BscError) as ctx:
            compute_kpis(inputs, Decimal('8.00'), Decimal('6.00'))
        self.assertEqual(ctx.exception.code, 'DIVISION_BY_ZERO_BASELINE')
        self.assertIn('investment_cost', str(ctx.exception))

    def test_zero_baseline_revenue(self):
        with self.assertRaises(BscError) as ctx:
            compute_kpis(self.make_inputs(), Decimal('0.00'), Decimal('6.00'))
        self.assertEqual(ctx.exception.code, 'DIVISION_BY_ZERO_BASELINE')


class TestTargets(unittest.TestCase):

    def test_shipped_targets(self):
        targets = parse_targets(default_targets_text())
        self.assertEqual(len(targets), 12)
        names = [t.name for t in targets]
        self.assertIn('out_of_stock_reduction@table', names)
        self.assertIn('out_of_stock_reduction@intro', names)
        self.assertIn(Target('cc_accuracy', '', AT_LEAST, Fraction(98, 100)), targets)

    def test_comments_and_blank_lines(self):
        targets = parse_targets("# heading\n\nroi = AT_MOST 1.5  # ceiling\n")
        self.assertEqual(targets, [Target('roi', '', AT_MOST, Fraction(3, 2))])

    def test_unknown_kpi(self):
        with self.assertRaises(BscError) as ctx:
            parse_targets("footfall = AT_LEAST 1\n")
        self.assertEqual(ctx.exception.code, 'UNKNOWN_KPI_IN_CONFIG')

    def test_duplicate_target(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_targets("roi = AT_LEAST 0.1\nroi = AT_MOST 0.5\n")
        self.assertEqual(ctx.exception.code, 'INVALID_CONFIG')

    def test_malformed_line(self):
        with self.assertRaises(ConfigError):
            parse_targets("roi >= 0.1\n")

    def test_thresholds_are_inclusive(self):
        self.assertTrue(Target('cc_accuracy', '', AT_LEAST, Fraction(98, 100)).is_met(Fraction(980, 1000)))
        self.assertTrue(Target('roi', '', AT_MOST, Fraction(3, 10)).is_met(Fraction(3, 10)))
        self.assertFalse(Target('roi', '', AT_MOST, Fraction(3, 10)).is_met(Fraction(31, 100)))


class TestEvaluate(BscTestCase):

    def setUp(self):
        kpis = compute_kpis(self.make_inputs(), Decimal('8.00'), Decimal('6.00'))
        self.card = evaluate(kpis, parse_targets(default_targets_text()), '2024-03', '2024-04')

    def test_unmet_targets(self):
        self.assertEqual(sorted(e.name for e in self.card.entries if not e.met),
                         ['out_of_stock_reduction@intro', 'sales_uplift'])
        self.assertFalse(self.card.all_met)

    def test_grouped_by_perspective(self):
        self.assertEqual([e.perspective for e in self.card.entries],
                         [FINANCIAL] * 6 + [CUSTOMER] * 3 + [INTERNAL] * 3)
        self.assertEqual([e.name for e in self.card.by_perspective(FINANCIAL)][:2], ['roi', 'roi@band_ceiling'])

    def test_document(self):
        document = self.card.to_dict()
        self.assertEqual((document['met'], document['total']), (10, 12))
        cc = document['perspectives'][CUSTOMER][1]
        self.assertEqual((cc['name'], cc['value'], cc['target'], cc['met']), ('cc_accuracy', '0.9800', '0.9800', True))

    def test_target_for_missing_kpi(self):
        with self.assertRaises(BscError) as ctx:
            evaluate({}, [Target('roi', '', AT_LEAST, Fraction(0))])
        self.assertEqual(ctx.exception.code, 'UNKNOWN_KPI_IN_CONFIG')


class TestWarehouseRevenue(BscTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        sample_data.load_sample(self.tmp.name)
        self.warehouse = Warehouse.open(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_period_revenue(self):
        self.assertEqual(period_revenue(self.warehouse, '2024-03'), Decimal('8.00'))
        self.assertEqual(period_revenue(self.warehouse, '2024-Q2'), Decimal('6.00'))

    def test_missing_period(self):
        with self.assertRaises(BscError) as ctx:
            period_revenue(self.warehouse, '2023')
        self.assertEqual(ctx.exception.code, 'MISSING_PERIOD')

    def test_uplift_from_warehouse(self):
        kpis = compute_for_warehouse(self.make_inputs(), self.warehouse)
        self.assertEqual(kpis['sales_uplift'], Fraction(-1, 4))


if __name__ == '__main__':
    unittest.main()
