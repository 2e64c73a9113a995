import os
from dataclasses import replace
from typing import Annotated, Optional

import typer
from rich.table import Table

from commands.common import console, handle_errors
from models.sim_config import SimConfig, load_sim_config
from pipeline import simgen

DEFAULT_OUT_DIR = 'sim_out'


@handle_errors
def generate(
    sim_config: Annotated[Optional[str], typer.Argument(help="Simulation YAML (default: the built-in example store)")] = None,
    out: Annotated[str, typer.Option("--out", "-o", help="Directory for the generated files")] = DEFAULT_OUT_DIR,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Override the configured seed")] = None,
) -> None:
    """Generate a synthetic store: pings, POS lines, reference files and the ground truth."""
    config = load_sim_config(sim_config) if sim_config else SimConfig()
    if seed is not None:
        config = replace(config, seed=seed)
    output = simgen.generate(config)
    paths = simgen.write_outputs(output, out)

    table = Table(title=f"Generated with seed {config.seed} into {out}")
    table.add_column("File", style="bold yellow")
    table.add_column("Rows", justify="right")
    table.add_column("Bytes", justify="right", style="dim")
    for path in paths:
        text = output.files[os.path.basename(path)]
        data_lines = [line for line in text.splitlines() if line and not line.startswith('#')]
        rows = str(max(len(data_lines) - 1, 0)) if path.endswith('.csv') else ''
        table.add_row(path, rows, str(len(text.encode('utf-8'))))
    console.print(table)
    truth = output.ground_truth
    console.print(f"{len(truth.customer_days)} trips, {len(truth.receipts)} receipts, "
                  f"{len(truth.corrupted)} corrupted rows", highlight=False)
