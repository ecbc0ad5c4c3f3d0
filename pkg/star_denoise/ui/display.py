import contextlib
import json
import sys

from typing import Any, Dict, List

from rich.console import Console
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

PANEL_WIDTH = 70


class Display:
    """Human output goes to stderr; machine records go to stdout, one JSON line each."""

    def __init__(self, console: Console = None):
        self.console = console or Console(stderr=True)
        self.panel_width = PANEL_WIDTH

    def emit(self, record: Dict[str, Any]):
        """Write one machine-readable record"""
        sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")
        sys.stdout.flush()

    def success(self, message: str):
        """Display success message"""
        self.console.print(f"[bold green]✓[/bold green] {message}")

    def warning(self, message: str):
        """Display warning message"""
        self.console.print(f"[bold yellow]⚠[/bold yellow] {message}")

    def info(self, message: str):
        """Display info message"""
        self.console.print(f"[bold blue]ℹ[/bold blue] {message}")

    @contextlib.contextmanager
    def spinner(self, message: str):
        """Context manager for spinner display"""
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=self.console,
            transient=True,
        ) as progress:
            progress.add_task(description=message, total=None)
            yield

    def show_metrics(self, report, title: str = "Quality"):
        table = Table(title=f"[bold blue]{title}[/bold blue]")
        table.add_column("Index", style="cyan", no_wrap=True)
        table.add_column("Value", justify="right")
        table.add_row("PSNR (dB)", f"{report.psnr:.4f}")
        table.add_row("SSIM", f"{report.ssim:.6f}")
        table.add_row("SAM (rad)", f"{report.sam:.6f}")
        table.add_row("ERGAS", f"{report.ergas:.4f}")
        table.add_row("Loss", f"{report.loss:.6g}")
        self.console.print(table)
        if report.ssim_fallback:
            self.warning("SSIM used a single full-image window (bands smaller than 11x11)")
        if report.sam_skipped:
            self.warning(f"SAM skipped {report.sam_skipped} zero-norm pixel(s)")
        if report.ergas_skipped:
            self.warning(f"ERGAS skipped {report.ergas_skipped} zero-mean band(s)")

    def show_solve_report(self, report):
        """Display a solve summary panel"""
        content = [
            f"[bold]Model:[/bold] {report.model}",
            f"[bold]Mode:[/bold] {report.mode}",
            f"[bold]Iterations:[/bold] {report.iterations} ({report.stopped_by})",
            f"[bold]Final residual:[/bold] "
            + (f"{report.residuals[-1]:.3e}" if report.residuals else "n/a"),
            f"[bold]Wall time:[/bold] {report.wall_ms:.0f} ms",
        ]
        if report.degenerate_a_updates:
            content.append(
                f"[bold yellow]Degenerate A-updates:[/bold yellow] {report.degenerate_a_updates}"
            )
        panel = Panel(
            "\n".join(content),
            title="[bold blue]Denoise[/bold blue]",
            border_style="blue",
            width=self.panel_width,
        )
        self.console.print(panel)

    def show_schedule(self, schedule):
        table = Table(title=f"[bold blue]{schedule.model} schedule, K={schedule.k}[/bold blue]")
        for column in ("Stage", "lambda", "gamma1", "gamma2", "beta", "mu", "l", "Dict"):
            table.add_column(column, justify="right")
        for index, stage in enumerate(schedule.stages):
            table.add_row(
                str(index),
                f"{stage.lam:g}",
                f"{stage.gamma1:g}",
                f"{stage.gamma2:g}",
                f"{stage.beta:g}",
                f"{stage.mu:g}",
                f"{stage.lipschitz:g}",
                "custom" if stage.dictionaries else "DCT",
            )
        self.console.print(table)

    def show_config(self, config):
        """Display configuration settings"""
        table = Table(title="[bold blue]Configuration[/bold blue]")
        table.add_column("Key", style="cyan", no_wrap=True)
        table.add_column("Value", style="white")

        for key, value in config.get_all().items():
            table.add_row(key, str(value))

        self.console.print(table)

    def show_benchmark(self, rows: List):
        table = Table(title="[bold blue]Noise-level sweep[/bold blue]")
        table.add_column("sigma", justify="right", style="cyan")
        table.add_column("Noisy PSNR", justify="right")
        table.add_column("PSNR", justify="right", style="green")
        table.add_column("SSIM", justify="right")
        table.add_column("SAM", justify="right")
        table.add_column("ERGAS", justify="right")
        table.add_column("Iters", justify="right")
        for row in rows:
            table.add_row(
                f"{row.sigma_255:g}",
                f"{row.noisy.psnr:.2f}",
                f"{row.denoised.psnr:.2f}",
                f"{row.denoised.ssim:.4f}",
                f"{row.denoised.sam:.4f}",
                f"{row.denoised.ergas:.2f}",
                str(row.iterations),
            )
        self.console.print(table)

