import logging
import os
from typing import Annotated, List, Optional

import typer

from commands.common import (
    CSV, DEFAULT_WORKSPACE, REPORT, ConfigPath, Format, Out, Workspace, checksum, console, emit, handle_errors,
    load_app_config, read_input, read_store_map, resolve_format,
)
from exporters import CsvExporter, ReportExporter
from helpers.config_ops import config_digest
from helpers.workspace_ops import record_stage, workspace_lock
from models.errors import ConfigError
from models.run_manifest import INGEST
from models.staging_batch import BATCH_STATES
from pipeline.ingest import PINGS, decode_lines, detect_kind, parse_pings, parse_pos
from pipeline.staging import StagingStore
from tui import ReportDisplay

logger = logging.getLogger(__name__)


@handle_errors
def ingest(
    files: Annotated[List[str], typer.Argument(help="Ping or POS CSV files; the kind is read from the header")],
    workspace: Workspace = DEFAULT_WORKSPACE,
    zones: Annotated[Optional[str], typer.Option("--zones", help="Zone file; pings outside its bounds are rejected")] = None,
    config_path: ConfigPath = None,
    fmt: Format = None,
    out: Out = None,
) -> None:
    """Validate raw files and stage the accepted rows. Re-ingesting identical bytes is a no-op."""
    config = load_app_config(config_path)
    fmt = resolve_format(fmt, config, out)
    store_map = read_store_map(zones) if zones else None
    with workspace_lock(workspace):
        staging = StagingStore(workspace)
        batches, reports = [], []
        for path in files:
            data = read_input(path)
            if not decode_lines(data):
                logger.warning("%s is empty; nothing to stage", path)
                continue
            kind = detect_kind(data)
            result = parse_pings(data, store_map) if kind == PINGS else parse_pos(data)
            batch = staging.stage(result, os.path.basename(path), checksum(data))
            batches.append(batch)
            reports.append(staging.load_report(batch))
        record_stage(workspace, config_digest(config), INGEST, [b.batch_id for b in batches], {
            'rows_accepted': sum(r.rows_accepted for r in reports),
            'rows_rejected': sum(r.rows_rejected for r in reports),
        })

    if fmt == REPORT:
        emit(ReportExporter.export_document({'batches': [
            dict(batch.to_dict(), quality=report.to_dict()) for batch, report in zip(batches, reports)
        ]}), out)
    elif fmt == CSV:
        emit(CsvExporter.export_quality(batches, reports), out)
    else:
        display = ReportDisplay(console)
        for batch, report in zip(batches, reports):
            display.display_quality(batch, report)


@handle_errors
def batches(
    workspace: Workspace = DEFAULT_WORKSPACE,
    state: Annotated[Optional[str], typer.Option("--state", help="Only batches in this state: LOADED or TRANSFORMED")] = None,
    config_path: ConfigPath = None,
    fmt: Format = None,
    out: Out = None,
) -> None:
    """List staging batches and their state."""
    config = load_app_config(config_path)
    fmt = resolve_format(fmt, config, out)
    if state is not None and state not in BATCH_STATES:
        raise ConfigError('BAD_OPTION', f"--state must be one of {', '.join(BATCH_STATES)}, got {state!r}")
    with workspace_lock(workspace):
        staging = StagingStore(workspace)
        found = staging.list_batches(state) if staging.exists() else []

    if fmt == REPORT:
        emit(ReportExporter.export_document({'batches': [b.to_dict() for b in found]}), out)
    elif fmt == CSV:
        emit(CsvExporter.export_batches(found), out)
    else:
        ReportDisplay(console).display_batches(found)
