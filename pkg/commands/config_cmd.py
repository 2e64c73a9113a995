import os
from dataclasses import asdict, fields
from typing import Annotated

import typer
import yaml

from commands.common import ConfigPath, console, handle_errors, load_app_config
from helpers.config_ops import config_digest
from models.config_model import CONFIG_FILE, AppConfig, SegmentationConfig, save_config
from models.errors import ConfigError, WorkspaceError

config_app = typer.Typer(help="Pipeline configuration commands.", no_args_is_help=True)


@config_app.command("show")
@handle_errors
def show_config(config_path: ConfigPath = None):
    """Show the effective pipeline config and its digest."""
    config = load_app_config(config_path)
    source = config_path or CONFIG_FILE
    origin = source if os.path.exists(source) else "built-in defaults"
    console.print(f"[bold]Effective config[/bold] (from [cyan]{origin}[/cyan])")
    seg = config.segmentation
    console.print(f"  Stop radius: [cyan]{seg.stop_radius_m} m[/cyan]")
    console.print(f"  Minimum stop: [cyan]{seg.min_stop_duration_s} s[/cyan]")
    console.print(f"  Maximum gap: [cyan]{seg.max_gap_s} s[/cyan]")
    console.print(f"  Store UTC offset: [cyan]{config.store_utc_offset}[/cyan]")
    console.print(f"  Default format: [cyan]{config.default_format}[/cyan]")
    console.print(f"  Digest: [dim]{config_digest(config)}[/dim]")


@config_app.command("init")
@handle_errors
def init_config(
    path: Annotated[str, typer.Argument(help="Where to write the config")] = CONFIG_FILE,
    force: Annotated[bool, typer.Option("--force", help="Overwrite an existing file")] = False,
):
    """Write a config file holding the defaults."""
    if os.path.exists(path) and not force:
        raise ConfigError('BAD_OPTION', f"{path} already exists; pass --force to overwrite")
    _save(AppConfig(), path)
    console.print(f"[bold green]Wrote default config to {path}[/bold green]")


@config_app.command("set")
@handle_errors
def set_config(
    key: Annotated[str, typer.Argument(help="e.g. segmentation.stop_radius_m or default_format")],
    value: Annotated[str, typer.Argument(help="New value (YAML scalar)")],
    config_path: ConfigPath = None,
):
    """Change one setting and save the config file."""
    path = config_path or CONFIG_FILE
    data = asdict(load_app_config(config_path))
    section, _, name = key.rpartition('.')
    if section == 'segmentation':
        target, known = data['segmentation'], {f.name for f in fields(SegmentationConfig)}
    elif not section:
        target, known = data, {f.name for f in fields(AppConfig)} - {'segmentation'}
    else:
        target, known = {}, set()
    if name not in known:
        raise ConfigError('BAD_OPTION', f"unknown config key {key!r}")
    if isinstance(target[name], str):
        target[name] = value
    else:
        try:
            target[name] = yaml.safe_load(value)
        except yaml.YAMLError:
            raise ConfigError('BAD_OPTION', f"cannot read {value!r} as a value")
    config = AppConfig(**data)
    _save(config, path)
    console.print(f"[bold green]{key} set to {value} in {path}[/bold green]")


def _save(config: AppConfig, path: str) -> None:
    try:
        save_config(config, path)
    except OSError as e:
        raise WorkspaceError('STORAGE_FAILURE', f"cannot write {path}: {e.strerror or e}")
