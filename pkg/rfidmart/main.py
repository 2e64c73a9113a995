#!/usr/bin/env python3

import logging
from typing import Optional

import typer
from rich.console import Console
from rich.logging import RichHandler

from commands.bsc_cmd import bsc
from commands.config_cmd import config_app
from commands.generate_cmd import generate
from commands.ingest_cmd import batches, ingest
from commands.journey_cmd import conversion, journey
from commands.load_cmd import check, export, load
from commands.query_cmd import heatmap, query
from rfidmart import __version__

console = Console()


def version_callback(value: bool):
    if value:
        console.print(f"rfidmart version {__version__}")
        raise typer.Exit()


app = typer.Typer(
    short_help="RFID retail data mart",
    help="rfidmart - stage RFID pings and POS receipts, load a star-schema warehouse and report on it.",
    no_args_is_help=True)

app.command(name="generate")(generate)
app.command(name="ingest")(ingest)
app.command(name="batches")(batches)
app.command(name="load")(load)
app.command(name="check")(check)
app.command(name="export")(export)
app.command(name="query")(query)
app.command(name="heatmap")(heatmap)
app.command(name="journey")(journey)
app.command(name="conversion")(conversion)
app.command(name="bsc")(bsc)
app.add_typer(config_app, name="config")


def setup_logging(verbose: bool) -> None:
    handler = RichHandler(console=Console(stderr=True), show_path=False)
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format="%(message)s",
                        handlers=[handler], force=True)


@app.callback()
def main_callback(
    version: Optional[bool] = typer.Option(None, "--version", "-v", callback=version_callback, is_eager=True,
                                           help="Show version and exit"),
    verbose: bool = typer.Option(False, "--verbose", help="Log pipeline progress to stderr"),
):
    """Entry point for the rfidmart command."""
    _ = version
    setup_logging(verbose)


def main():
    """Entry point for setuptools and command line."""
    app()


if __name__ == "__main__":
    main()
