from typing import Annotated, Optional

import typer

from commands.common import (
    CSV, DEFAULT_WORKSPACE, REPORT, ConfigPath, Format, Out, Workspace, console, emit, handle_errors,
    load_app_config, read_input, resolve_format,
)
from exporters import CsvExporter, ReportExporter
from helpers.workspace_ops import workspace_lock
from models.errors import IngestError
from pipeline import bsc as scorecards
from pipeline.warehouse import Warehouse
from tui import ReportDisplay


@handle_errors
def bsc(
    inputs: Annotated[str, typer.Option("--inputs", help="Operational inputs CSV, one row per period pair")],
    targets: Annotated[Optional[str], typer.Option("--targets", help="Targets file (default: the shipped targets)")] = None,
    workspace: Workspace = DEFAULT_WORKSPACE,
    config_path: ConfigPath = None,
    fmt: Format = None,
    out: Out = None,
) -> None:
    """Balanced scorecard: KPIs from warehouse revenue and operational inputs, checked against targets."""
    config = load_app_config(config_path)
    fmt = resolve_format(fmt, config, out)
    rows = scorecards.parse_inputs(read_input(inputs))
    goals = scorecards.parse_targets(_targets_text(targets))
    with workspace_lock(workspace):
        warehouse = Warehouse.open(workspace)
        cards = [
            scorecards.evaluate(scorecards.compute_for_warehouse(row, warehouse), goals,
                                row.baseline_period, row.current_period)
            for row in rows
        ]

    if fmt == REPORT:
        emit(ReportExporter.export_document({'scorecards': [card.to_dict() for card in cards]}), out)
    elif fmt == CSV:
        emit(CsvExporter.export_scorecards(cards), out)
    else:
        display = ReportDisplay(console)
        for card in cards:
            display.display_scorecard(card)


def _targets_text(path: Optional[str]) -> str:
    if not path:
        return scorecards.default_targets_text()
    try:
        return read_input(path).decode('utf-8-sig')
    except UnicodeDecodeError:
        raise IngestError('UNDECODABLE_INPUT', f"{path} is not UTF-8 text")
