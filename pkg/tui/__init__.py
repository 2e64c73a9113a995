from .report_display import ReportDisplay

__all__ = ['ReportDisplay']
