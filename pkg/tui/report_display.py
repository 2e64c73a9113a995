from typing import List

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from helpers.formatting import format_money, format_percentage, format_range, format_seconds, format_value
from models.journey import JourneyProfile, ZoneConversion, ratio_text
from models.quality import QualityReport
from models.scorecard import PERSPECTIVES, Scorecard
from models.staging_batch import StagingBatch
from pipeline.cube import MEASURES, Heatmap, HierarchyReport, ResultTable
from pipeline.etl import LoadSummary
from pipeline.warehouse import Violation


class ReportDisplay:
    """Human-readable rendering of pipeline reports using Rich tables."""

    def __init__(self, console: Console = None):
        self.console = console or Console()

    def display_quality(self, batch: StagingBatch, report: QualityReport) -> None:
        """Data-quality profile of one staged file."""
        table = Table(title=f"Batch {batch.batch_id} ({batch.kind}) from {batch.source_file}", show_lines=False)
        table.add_column("Metric", style="bold yellow", no_wrap=True)
        table.add_column("Value", justify="right")
        table.add_row("Rows read", str(report.rows_read))
        table.add_row("Accepted", f"[green]{report.rows_accepted}[/green]")
        table.add_row("Rejected", f"[red]{report.rows_rejected}[/red]" if report.rows_rejected else "0")
        table.add_row("Duplicates", str(report.duplicate_count))
        table.add_row("Out of bounds", str(report.out_of_bounds_count))
        for reason, count in sorted(report.reject_reasons.items()):
            table.add_row(f"  {reason}", str(count), style="dim")
        nulls = {name: count for name, count in report.null_counts.items() if count}
        for name, count in sorted(nulls.items()):
            table.add_row(f"  empty {name}", str(count), style="dim")
        self.console.print(table)

    def display_batches(self, batches: List[StagingBatch]) -> None:
        if not batches:
            self.console.print("[yellow]No staging batches in this workspace.[/yellow]")
            return
        table = Table(title="Staging batches")
        table.add_column("Batch", style="bold", justify="right")
        table.add_column("Kind")
        table.add_column("State")
        table.add_column("Accepted", justify="right", style="green")
        table.add_column("Rejected", justify="right", style="red")
        table.add_column("Source", style="dim")
        for batch in batches:
            state = f"[cyan]{batch.state}[/cyan]" if batch.state == 'LOADED' else batch.state
            table.add_row(str(batch.batch_id), batch.kind, state, str(batch.rows_accepted),
                          str(batch.rows_rejected), batch.source_file)
        self.console.print(table)

    def display_load_summary(self, summary: LoadSummary) -> None:
        lines = [
            f"Generation: [bold]{summary.generation}[/bold]",
            f"Batches: {', '.join(str(b) for b in summary.batches) or 'none new'}",
            f"Customer-days: {summary.customer_days}   Segments: {summary.segments}",
        ]
        if summary.orphan_pings or summary.late_pings or summary.status_conflicts:
            lines.append(f"[yellow]Orphan pings: {summary.orphan_pings}   Late pings: {summary.late_pings}"
                         f"   Status conflicts: {summary.status_conflicts}[/yellow]")
        if summary.skipped_sales_lines or summary.attribute_conflicts:
            lines.append(f"[yellow]Skipped sales lines: {summary.skipped_sales_lines}"
                         f"   Attribute conflicts: {summary.attribute_conflicts}[/yellow]")
        self.console.print(Panel("\n".join(lines), title="Load", border_style="blue", padding=(1, 2)))

        table = Table(title="Warehouse tables")
        table.add_column("Table", style="bold yellow")
        table.add_column("Inserted", justify="right", style="green")
        table.add_column("Rows", justify="right")
        for name, rows in summary.table_rows.items():
            table.add_row(name, str(summary.inserted.get(name, 0)), str(rows))
        self.console.print(table)

    def display_result_table(self, result: ResultTable, title: str = "Query result") -> None:
        if not result.rows:
            self.console.print("[yellow]No rows match the query.[/yellow]")
            return
        table = Table(title=title)
        for name in result.header:
            if name not in MEASURES:
                table.add_column(name, style="bold yellow", no_wrap=True)
            else:
                table.add_column(name, justify="right")
        for row in result.rows:
            table.add_row(*(format_value(value) for value in row))
        self.console.print(table)

    def display_heatmap(self, heatmap: Heatmap) -> None:
        table = Table(title=f"{heatmap.measure} by zone, {format_range(heatmap.date_from, heatmap.date_to)}")
        table.add_column("Zone", style="bold yellow")
        table.add_column(heatmap.measure, justify="right")
        table.add_column("", no_wrap=True)
        peak = max((float(value) for _, value in heatmap.zones), default=0.0)
        for name, value in heatmap.zones:
            width = int(round(20 * float(value) / peak)) if peak > 0 else 0
            table.add_row(name, format_value(value), f"[red]{'█' * width}[/red]")
        self.console.print(table)

    def display_profile(self, profile: JourneyProfile) -> None:
        self.console.print(Panel(
            f"Customer [bold]{profile.customer_id}[/bold] on {profile.date.isoformat()}   "
            f"coverage: [cyan]{profile.coverage}[/cyan]",
            border_style="blue",
        ))
        purchases = Table(title="Purchases")
        purchases.add_column("SKU", style="bold")
        purchases.add_column("Product")
        purchases.add_column("Zone", style="yellow")
        purchases.add_column("Qty", justify="right")
        purchases.add_column("Revenue", justify="right", style="green")
        for item in profile.purchases:
            purchases.add_row(item.sku_key, item.product_name, item.area_name, str(item.quantity),
                              format_money(item.revenue))
        purchases.add_row("[bold]Total[/bold]", "", "", str(profile.total_items),
                          f"[bold]{format_money(profile.total_revenue)}[/bold]")
        self.console.print(purchases)

        behaviour = Table(title="In-store behaviour")
        behaviour.add_column("Zone", style="bold yellow")
        behaviour.add_column("Dwell", justify="right")
        behaviour.add_column("Stopped", justify="right")
        behaviour.add_column("Visits", justify="right")
        behaviour.add_column("Distance (m)", justify="right")
        for zone in profile.behaviour:
            behaviour.add_row(zone.area_name, format_seconds(zone.dwell_s), format_seconds(zone.stop_s),
                              str(zone.visit_count), f"{zone.distance_m:.1f}")
        behaviour.add_row("[bold]Total[/bold]", format_seconds(profile.total_movement_s),
                          format_seconds(profile.total_stop_s), str(profile.total_visits),
                          f"{profile.total_distance_m:.1f}")
        self.console.print(behaviour)

        if profile.conversions:
            flags = ", ".join(
                f"{c.area_name} {'[green]bought[/green]' if c.purchased_here else '[dim]browsed[/dim]'}"
                if c.visited else f"{c.area_name} [yellow]bought without a visit[/yellow]"
                for c in profile.conversions
            )
            self.console.print(f"Zones: {flags}")

    def display_conversion(self, rows: List[ZoneConversion]) -> None:
        table = Table(title="Zone conversion")
        table.add_column("Zone", style="bold yellow")
        table.add_column("Visitors", justify="right")
        table.add_column("Buyers", justify="right")
        table.add_column("Conversion", justify="right", style="green")
        for row in rows:
            conversion = ratio_text(row.conversion)
            if row.buyers_exceed_visitors:
                conversion = f"[red]{conversion}[/red]"
            table.add_row(row.area_name, str(row.visitors), str(row.buyers), conversion)
        self.console.print(table)

    def display_scorecard(self, card: Scorecard) -> None:
        table = Table(title=f"Balanced scorecard: {card.baseline_period} -> {card.current_period}", show_lines=False)
        table.add_column("Perspective", style="bold yellow", no_wrap=True)
        table.add_column("Target", style="bold")
        table.add_column("Value", justify="right")
        table.add_column("Goal", justify="right", style="dim")
        table.add_column("Met", justify="center")
        for perspective in PERSPECTIVES:
            for i, entry in enumerate(card.by_perspective(perspective)):
                goal = f"{'≥' if entry.direction == 'AT_LEAST' else '≤'} {format_percentage(entry.target)}"
                table.add_row(perspective if i == 0 else "", entry.name, format_percentage(entry.value), goal,
                              "[green]yes[/green]" if entry.met else "[red]no[/red]")
        self.console.print(table)
        met = sum(1 for entry in card.entries if entry.met)
        colour = "green" if card.all_met else "yellow"
        self.console.print(f"[{colour}]{met} of {len(card.entries)} targets met[/{colour}]")

    def display_integrity(self, violations: List[Violation], hierarchy: List[HierarchyReport]) -> None:
        broken = [report for report in hierarchy if not report.consistent]
        if not violations and not broken:
            self.console.print(f"[green]Integrity check passed[/green] "
                               f"({len(hierarchy)} drill-down checks consistent)")
            return
        if violations:
            table = Table(title=f"{len(violations)} integrity violations")
            table.add_column("Table", style="bold yellow")
            table.add_column("Row", justify="right")
            table.add_column("Rule", style="red")
            table.add_column("Detail", style="dim")
            for v in violations:
                table.add_row(v.table, str(v.row), v.rule, v.detail)
            self.console.print(table)
        for report in broken:
            self.console.print(f"[red]{report.measure}: {report.parent_level} -> {report.child_level} "
                               f"inconsistent for {len(report.violations)} groups[/red]")
