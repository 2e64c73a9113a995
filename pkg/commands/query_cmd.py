from typing import Annotated, List, Optional

import typer

from commands.common import (
    CSV, DEFAULT_WORKSPACE, REPORT, ConfigPath, DateFrom, DateTo, Format, Out, Workspace, console, emit,
    handle_errors, load_app_config, parse_date_option, read_store_map, resolve_format, split_filters,
)
from exporters import CsvExporter, ReportExporter
from helpers.workspace_ops import write_atomic, workspace_lock
from models.errors import ConfigError, WorkspaceError
from pipeline.cube import Cube, CubeQuery, heatmap_raster
from pipeline.warehouse import Warehouse
from tui import ReportDisplay


@handle_errors
def query(
    measures: Annotated[List[str], typer.Option("--measure", "-m", help="Measure to aggregate (repeatable)")],
    group_by: Annotated[Optional[List[str]], typer.Option("--by", "-g", help="Level to group by (repeatable)")] = None,
    filters: Annotated[Optional[List[str]], typer.Option("--filter", help="level=value slice (repeatable)")] = None,
    date_from: DateFrom = None,
    date_to: DateTo = None,
    workspace: Workspace = DEFAULT_WORKSPACE,
    config_path: ConfigPath = None,
    fmt: Format = None,
    out: Out = None,
) -> None:
    """Roll up measures over any combination of dimension levels."""
    config = load_app_config(config_path)
    fmt = resolve_format(fmt, config, out)
    cube_query = CubeQuery(
        measures=tuple(measures),
        group_by=tuple(group_by or ()),
        filters=split_filters(filters),
        date_from=parse_date_option(date_from, '--from'),
        date_to=parse_date_option(date_to, '--to'),
    )
    cube_query.validate()
    with workspace_lock(workspace):
        result = Cube(Warehouse.open(workspace)).rollup(cube_query)

    if fmt == REPORT:
        emit(ReportExporter.export_document(result.to_dict()), out)
    elif fmt == CSV:
        emit(CsvExporter.export_result_table(result), out)
    else:
        ReportDisplay(console).display_result_table(result)


@handle_errors
def heatmap(
    measure: Annotated[str, typer.Option("--measure", "-m", help="dwell_s, visit_count or revenue")] = 'dwell_s',
    date_from: DateFrom = None,
    date_to: DateTo = None,
    zones: Annotated[Optional[str], typer.Option("--zones", help="Zone-definition CSV, needed for --raster")] = None,
    raster: Annotated[Optional[str], typer.Option("--raster", help="Write a 1 m grid of zone values here")] = None,
    workspace: Workspace = DEFAULT_WORKSPACE,
    config_path: ConfigPath = None,
    fmt: Format = None,
    out: Out = None,
) -> None:
    """Per-zone totals of one measure over a date range."""
    config = load_app_config(config_path)
    fmt = resolve_format(fmt, config, out)
    if raster and not zones:
        raise ConfigError('BAD_OPTION', "--raster needs --zones to know the floor geometry")
    first = parse_date_option(date_from, '--from')
    last = parse_date_option(date_to, '--to')
    store_map = read_store_map(zones) if zones else None
    with workspace_lock(workspace):
        result = Cube(Warehouse.open(workspace)).heatmap(measure, first, last)

    if fmt == REPORT:
        emit(ReportExporter.export_document(result.to_dict()), out)
    elif fmt == CSV:
        emit(CsvExporter.export_heatmap(result), out)
    else:
        ReportDisplay(console).display_heatmap(result)

    if raster:
        try:
            write_atomic(raster, ReportExporter.export_raster(heatmap_raster(result, store_map)))
        except OSError as e:
            raise WorkspaceError('STORAGE_FAILURE', f"cannot write {raster}: {e.strerror or e}")
        console.print(f"[green]Wrote {raster}[/green]", highlight=False)

