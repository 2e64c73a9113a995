import csv
import io
from typing import Iterable, List

from helpers.formatting import format_value
from models.journey import JourneyProfile, ZoneConversion
from models.scorecard import Scorecard
from models.staging_batch import StagingBatch
from pipeline.cube import Heatmap, ResultTable
from pipeline.etl import LoadSummary
from pipeline.warehouse import Violation


class CsvExporter:
    """Renders query results and reports as CSV text (header row first, '\\n' line ends)."""

    @staticmethod
    def _write(fieldnames: List[str], records: Iterable[dict]) -> str:
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=fieldnames, lineterminator='\n')
        writer.writeheader()
        for record in records:
            writer.writerow({name: format_value(record.get(name)) for name in fieldnames})
        return out.getvalue()

    @staticmethod
    def export_result_table(table: ResultTable) -> str:
        return CsvExporter._write(list(table.header), table.to_records())

    @staticmethod
    def export_heatmap(heatmap: Heatmap) -> str:
        return CsvExporter._write(
            ['area_name', heatmap.measure],
            ({'area_name': name, heatmap.measure: value} for name, value in heatmap.zones),
        )

    @staticmethod
    def export_conversion(rows: List[ZoneConversion]) -> str:
        return CsvExporter._write(['area_name', 'visitors', 'buyers', 'conversion'], (r.to_dict() for r in rows))

    @staticmethod
    def export_profile(profile: JourneyProfile) -> str:
        """One row per purchased SKU, then one row per zone of in-store behaviour."""
        fieldnames = ['record', 'area_name', 'sku_key', 'product_name', 'quantity', 'revenue',
                      'dwell_s', 'stop_s', 'visit_count', 'distance_m']
        records = [dict(p.to_dict(), record='purchase') for p in profile.purchases]
        records += [dict(z.to_dict(), record='behaviour') for z in profile.behaviour]
        return CsvExporter._write(fieldnames, records)

    @staticmethod
    def export_scorecards(cards: List[Scorecard]) -> str:
        fieldnames = ['baseline_period', 'current_period', 'perspective', 'name', 'kpi', 'value',
                      'direction', 'target', 'met']
        records = (dict(entry.to_dict(), baseline_period=card.baseline_period, current_period=card.current_period)
                   for card in cards for entry in card.entries)
        return CsvExporter._write(fieldnames, records)

    @staticmethod
    def export_violations(violations: List[Violation]) -> str:
        return CsvExporter._write(['table', 'row', 'rule', 'detail'], (v.to_dict() for v in violations))

    @staticmethod
    def export_batches(batches: List[StagingBatch]) -> str:
        fieldnames = ['batch_id', 'kind', 'state', 'rows_accepted', 'rows_rejected', 'source_file', 'checksum']
        return CsvExporter._write(fieldnames, (b.to_dict() for b in batches))

    @staticmethod
    def export_quality(batches: List[StagingBatch], reports: list) -> str:
        """One row per (batch, reject reason); a clean batch gets a single row with an empty reason."""
        fieldnames = ['batch_id', 'kind', 'rows_read', 'rows_accepted', 'rows_rejected', 'reason', 'count']
        records = []
        for batch, report in zip(batches, reports):
            base = {'batch_id': batch.batch_id, 'kind': batch.kind, 'rows_read': report.rows_read,
                    'rows_accepted': report.rows_accepted, 'rows_rejected': report.rows_rejected}
            reasons = sorted(report.reject_reasons.items()) or [('', 0)]
            records += [dict(base, reason=reason, count=count) for reason, count in reasons]
        return CsvExporter._write(fieldnames, records)

    @staticmethod
    def export_load_summary(summary: LoadSummary) -> str:
        records = ({'table': name, 'inserted': summary.inserted.get(name, 0), 'rows': rows}
                   for name, rows in summary.table_rows.items())
        return CsvExporter._write(['table', 'inserted', 'rows'], records)
