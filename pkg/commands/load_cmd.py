from typing import Annotated

import typer

from commands.common import (
    CSV, DEFAULT_WORKSPACE, REPORT, ConfigPath, Format, Out, Workspace, console, emit, handle_errors,
    load_app_config, read_input, read_store_map, require_staging, resolve_format,
)
from exporters import CsvExporter, ReportExporter
from helpers.config_ops import config_digest
from helpers.workspace_ops import record_stage, workspace_lock
from models.errors import EXIT_VIOLATIONS, StagingError
from models.run_manifest import LOAD
from pipeline import reference
from pipeline.cube import Cube
from pipeline.etl import run_load
from pipeline.warehouse import Warehouse
from tui import ReportDisplay

Products = Annotated[str, typer.Option("--products", help="Product catalogue CSV")]
Costs = Annotated[str, typer.Option("--costs", help="Unit-cost snapshot CSV")]
Demographics = Annotated[str, typer.Option("--demographics", help="Customer demographics CSV")]
Zones = Annotated[str, typer.Option("--zones", help="Zone-definition CSV")]


@handle_errors
def load(
    products: Products,
    costs: Costs,
    demographics: Demographics,
    zones: Zones,
    workspace: Workspace = DEFAULT_WORKSPACE,
    config_path: ConfigPath = None,
    fmt: Format = None,
    out: Out = None,
) -> None:
    """Transform staged batches into the star-schema warehouse and publish a new generation."""
    config = load_app_config(config_path)
    fmt = resolve_format(fmt, config, out)
    with workspace_lock(workspace):
        require_staging(workspace)
        store_map = read_store_map(zones)
        catalogue = reference.parse_catalogue(read_input(products))
        unit_costs = reference.parse_costs(read_input(costs))
        people = reference.parse_demographics(read_input(demographics))
        summary = run_load(workspace, store_map, catalogue, unit_costs, people, config)
        record_stage(workspace, config_digest(config), LOAD, summary.batches, summary.table_rows)

    if fmt == REPORT:
        emit(ReportExporter.export_document(summary.to_dict()), out)
    elif fmt == CSV:
        emit(CsvExporter.export_load_summary(summary), out)
    else:
        ReportDisplay(console).display_load_summary(summary)


@handle_errors
def check(
    workspace: Workspace = DEFAULT_WORKSPACE,
    config_path: ConfigPath = None,
    fmt: Format = None,
    out: Out = None,
) -> None:
    """Verify referential integrity, sales identities and calendar drill-down consistency."""
    config = load_app_config(config_path)
    fmt = resolve_format(fmt, config, out)
    with workspace_lock(workspace):
        warehouse = _open_loaded(workspace)
        violations = warehouse.integrity_check()
        hierarchy = [] if warehouse.is_empty() else Cube(warehouse).calendar_consistency()

    broken = [report for report in hierarchy if not report.consistent]
    if fmt == REPORT:
        emit(ReportExporter.export_document({
            'violations': [v.to_dict() for v in violations],
            'hierarchy': [report.to_dict() for report in hierarchy],
            'consistent': not violations and not broken,
        }), out)
    elif fmt == CSV:
        emit(CsvExporter.export_violations(violations), out)
    else:
        ReportDisplay(console).display_integrity(violations, hierarchy)

    if violations or broken:
        count = len(violations) + sum(len(report.violations) for report in broken)
        typer.echo(f'error code=INTEGRITY_VIOLATIONS exit={EXIT_VIOLATIONS} message="{count} violations found"',
                   err=True)
        raise typer.Exit(EXIT_VIOLATIONS)


@handle_errors
def export(
    out: Annotated[str, typer.Option("--out", "-o", help="Directory for one CSV per warehouse table")],
    workspace: Workspace = DEFAULT_WORKSPACE,
) -> None:
    """Dump every warehouse table as CSV."""
    with workspace_lock(workspace):
        paths = _open_loaded(workspace).export_tables(out)
    for path in paths:
        console.print(f"[green]Wrote {path}[/green]", highlight=False)


def _open_loaded(workspace: str) -> Warehouse:
    warehouse = Warehouse.open(workspace)
    if not warehouse.exists():
        raise StagingError('MISSING_STAGE', f"nothing loaded in {workspace}; run load first")
    return warehouse
