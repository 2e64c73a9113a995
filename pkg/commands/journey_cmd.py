from typing import Annotated

import typer

from commands.common import (
    CSV, DEFAULT_WORKSPACE, REPORT, ConfigPath, DateFrom, DateTo, Format, Out, Workspace, console, emit,
    handle_errors, load_app_config, parse_date_option, resolve_format,
)
from exporters import CsvExporter, ReportExporter
from helpers.workspace_ops import workspace_lock
from models.errors import ConfigError
from pipeline import journey as journeys
from pipeline.warehouse import Warehouse
from tui import ReportDisplay


@handle_errors
def journey(
    customer_id: Annotated[str, typer.Argument(help="Loyalty id, e.g. C0001")],
    day: Annotated[str, typer.Argument(metavar="DATE", help="Store-local date, YYYY-MM-DD")],
    workspace: Workspace = DEFAULT_WORKSPACE,
    config_path: ConfigPath = None,
    fmt: Format = None,
    out: Out = None,
) -> None:
    """What one customer bought on a day next to where they spent their time."""
    config = load_app_config(config_path)
    fmt = resolve_format(fmt, config, out)
    visit_date = parse_date_option(day, 'DATE')
    if visit_date is None:
        raise ConfigError('BAD_OPTION', "DATE must not be empty")
    with workspace_lock(workspace):
        profile = journeys.build_profile(Warehouse.open(workspace), customer_id, visit_date)

    if fmt == REPORT:
        emit(ReportExporter.export_document(profile.to_dict()), out)
    elif fmt == CSV:
        emit(CsvExporter.export_profile(profile), out)
    else:
        ReportDisplay(console).display_profile(profile)


@handle_errors
def conversion(
    date_from: DateFrom = None,
    date_to: DateTo = None,
    workspace: Workspace = DEFAULT_WORKSPACE,
    config_path: ConfigPath = None,
    fmt: Format = None,
    out: Out = None,
) -> None:
    """Share of zone visitors who bought something from that zone."""
    config = load_app_config(config_path)
    fmt = resolve_format(fmt, config, out)
    first = parse_date_option(date_from, '--from')
    last = parse_date_option(date_to, '--to')
    with workspace_lock(workspace):
        rows = journeys.zone_conversion(Warehouse.open(workspace), first, last)

    if fmt == REPORT:
        emit(ReportExporter.export_document({'zones': [row.to_dict() for row in rows]}), out)
    elif fmt == CSV:
        emit(CsvExporter.export_conversion(rows), out)
    else:
        ReportDisplay(console).display_conversion(rows)
