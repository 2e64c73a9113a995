from .csv_exporter import CsvExporter
from .report_exporter import ReportExporter

__all__ = ['CsvExporter', 'ReportExporter']
