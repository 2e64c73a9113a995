"""Options and plumbing shared by every command: error lines, output routing, input reading."""

import functools
import hashlib
import os
from datetime import date
from typing import Annotated, List, Optional

import typer
from rich.console import Console

from helpers.config_ops import resolve_config
from helpers.validation import validate_date_string
from helpers.workspace_ops import write_atomic
from models.config_model import AppConfig
from models.errors import ConfigError, IngestError, RfidmartError, StagingError, WorkspaceError
from models.zone import StoreMap
from pipeline.staging import StagingStore
from pipeline.storemap import load_map

console = Console()

DEFAULT_WORKSPACE = 'rfidmart_ws'
TABLE = 'table'
REPORT = 'report'
CSV = 'csv'
FORMATS = (TABLE, REPORT, CSV)

Workspace = Annotated[str, typer.Option("--workspace", "-w", help="Workspace directory (staging, warehouse, manifests)")]
ConfigPath = Annotated[Optional[str], typer.Option("--config", "-c", help="Pipeline config YAML (default rfidmart_config.yaml)")]
Format = Annotated[Optional[str], typer.Option("--format", "-f", help="Output format: table, report or csv")]
Out = Annotated[Optional[str], typer.Option("--out", "-o", help="Write the output to this file instead of stdout")]
DateFrom = Annotated[Optional[str], typer.Option("--from", help="First store-local date, YYYY-MM-DD")]
DateTo = Annotated[Optional[str], typer.Option("--to", help="Last store-local date, YYYY-MM-DD")]


def handle_errors(func):
    """Turn pipeline errors into one stderr line and the exit code of their class."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except RfidmartError as e:
            typer.echo(e.to_line(), err=True)
            raise typer.Exit(e.exit_code)
    return wrapper


def load_app_config(path: Optional[str]) -> AppConfig:
    if path and not os.path.exists(path):
        raise ConfigError('INVALID_CONFIG', f"config file {path} does not exist")
    return resolve_config(path)


def resolve_format(fmt: Optional[str], config: AppConfig, out: Optional[str] = None) -> str:
    chosen = fmt or config.default_format
    if chosen not in FORMATS:
        raise ConfigError('BAD_OPTION', f"--format must be one of {', '.join(FORMATS)}, got {chosen!r}")
    if out and chosen == TABLE:
        raise ConfigError('BAD_OPTION', "--out needs --format report or csv")
    return chosen


def parse_date_option(value: Optional[str], flag: str) -> Optional[date]:
    try:
        return validate_date_string(value)
    except ValueError as e:
        raise ConfigError('BAD_OPTION', f"{flag}: {e}")


def read_input(path: str) -> bytes:
    try:
        with open(path, 'rb') as f:
            return f.read()
    except OSError as e:
        raise IngestError('UNDECODABLE_INPUT', f"cannot read {path}: {e.strerror or e}")


def checksum(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def emit(text: str, out: Optional[str]) -> None:
    """Machine output goes to stdout unless --out names a file."""
    if out:
        try:
            write_atomic(out, text)
        except OSError as e:
            raise WorkspaceError('STORAGE_FAILURE', f"cannot write {out}: {e.strerror or e}")
        console.print(f"[green]Wrote {out}[/green]", highlight=False)
    else:
        typer.echo(text, nl=False)


def require_staging(workspace: str) -> StagingStore:
    staging = StagingStore(workspace)
    if not staging.exists():
        raise StagingError('MISSING_STAGE', f"nothing staged in {workspace}; run ingest first")
    return staging


def split_filters(filters: List[str]) -> dict:
    """'level=value' pairs from repeated --filter options."""
    parsed = {}
    for item in filters or []:
        level, sep, value = item.partition('=')
        if not sep or not level.strip():
            raise ConfigError('BAD_OPTION', f"--filter expects level=value, got {item!r}")
        parsed[level.strip()] = value.strip()
    return parsed


def read_store_map(path: str) -> StoreMap:
    return load_map(read_input(path))
