import json
import logging
import sys

from enum import Enum
from pathlib import Path
from typing import List, Optional

import click
import typer
from rich.console import Console
from rich.logging import RichHandler

from .commands import CommandHandlers
from .core.config import DEFAULT_STAGES, ConfigManager
from .core.errors import ParamError, StarError
from .ui.display import Display

app = typer.Typer(
    name="star-denoise",
    help="Sparse tensor-aided denoising of hyperspectral image cubes",
    rich_markup_mode="rich",
    add_completion=False,
)
config_app = typer.Typer(help="Show or change persistent defaults")
app.add_typer(config_app, name="config")


class ModelChoice(str, Enum):
    star = "star"
    star_s = "star-s"


class ModeChoice(str, Enum):
    classical = "classical"
    unrolled = "unrolled"


class TnnChoice(str, Enum):
    tsvd = "tsvd"
    mode3_unfold = "mode3-unfold"


class ASourceChoice(str, Enum):
    residual = "residual"
    observed = "observed"


def _value(choice: Optional[Enum]) -> Optional[str]:
    return choice.value if choice is not None else None


def _handlers() -> CommandHandlers:
    return CommandHandlers(Display(), ConfigManager())


def _setup_logging(verbose: bool):
    level = "DEBUG" if verbose else ConfigManager().get("log_level", "INFO")
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _parse_sigmas(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ParamError(f"--sigmas must be comma-separated numbers, got {text!r}") from e


def _show_version(value: bool):
    if value:
        from . import __version__

        sys.stdout.write(f"star-denoise version {__version__}\n")
        raise typer.Exit()


@app.callback()
def main_callback(
    verbose: bool = typer.Option(False, "--verbose", help="Log at DEBUG level"),
    version: bool = typer.Option(
        False, "--version", callback=_show_version, is_eager=True, help="Show version"
    ),
):
    """Sparse tensor-aided denoising of hyperspectral image cubes"""
    _setup_logging(verbose)


@app.command()
def simulate(
    input_path: Path = typer.Option(..., "--in", help="Clean cube (.htc)"),
    output_path: Path = typer.Option(..., "--out", help="Noisy cube to write"),
    gaussian: float = typer.Option(0.0, "--gaussian", help="Gaussian sigma on the 0-255 scale"),
    impulse: float = typer.Option(0.0, "--impulse", help="Salt-and-pepper pixel ratio per band"),
    deadlines: float = typer.Option(0.0, "--deadlines", help="Ratio of bands with dead columns"),
    seed: int = typer.Option(0, "--seed", help="Random seed"),
):
    """Corrupt a clean cube with synthetic noise"""
    _handlers().simulate(input_path, output_path, gaussian, impulse, deadlines, seed)


@app.command()
def denoise(
    input_path: Path = typer.Option(..., "--in", help="Noisy cube (.htc)"),
    output_path: Path = typer.Option(..., "--out", help="Denoised cube to write"),
    model: Optional[ModelChoice] = typer.Option(None, "--model", help="star or star-s"),
    mode: ModeChoice = typer.Option(ModeChoice.classical, "--mode"),
    schedule: Optional[Path] = typer.Option(None, "--schedule", help="Per-stage parameters (JSON)"),
    rank: Optional[int] = typer.Option(None, "--rank", help="Subspace rank n4"),
    patch: Optional[int] = typer.Option(None, "--patch", help="Patch side length"),
    stride: Optional[int] = typer.Option(None, "--stride", help="Patch stride"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Relative residual tolerance"),
    max_iters: Optional[int] = typer.Option(None, "--max-iters"),
    inner_iters: Optional[int] = typer.Option(None, "--inner-iters", help="ISTA steps per B-update"),
    tnn: Optional[TnnChoice] = typer.Option(None, "--tnn"),
    a_source: Optional[ASourceChoice] = typer.Option(None, "--a-source", help="STAR-S A-block data"),
    threads: Optional[int] = typer.Option(None, "--threads"),
    lam: Optional[float] = typer.Option(None, "--lambda", help="Classical mode: data weight"),
    gamma1: Optional[float] = typer.Option(None, "--gamma1", help="Classical mode: sparsity weight"),
    gamma2: Optional[float] = typer.Option(None, "--gamma2", help="Classical mode: low-rank weight"),
    beta: Optional[float] = typer.Option(None, "--beta", help="Classical mode: penalty"),
    mu: Optional[float] = typer.Option(None, "--mu", help="Classical mode: sparse-noise weight"),
    report: Optional[Path] = typer.Option(None, "--report", help="Write the solve report (JSON)"),
):
    """Denoise a cube"""
    _handlers().denoise(
        input_path,
        output_path,
        model=_value(model),
        mode=mode.value,
        schedule_path=schedule,
        report_path=report,
        rank=rank,
        stage_overrides={"lam": lam, "gamma1": gamma1, "gamma2": gamma2, "beta": beta, "mu": mu},
        patch=patch,
        stride=stride,
        tol=tol,
        max_iters=max_iters,
        inner_iters=inner_iters,
        tnn=_value(tnn),
        a_block_source=_value(a_source),
        threads=threads,
    )


@app.command()
def metrics(
    ref: Path = typer.Option(..., "--ref", help="Reference cube"),
    test: Path = typer.Option(..., "--test", help="Cube to score"),
):
    """Compare two cubes: PSNR, SSIM, SAM, ERGAS and loss"""
    _handlers().metrics(ref, test)


@app.command("init-schedule")
def init_schedule(
    output_path: Path = typer.Option(..., "--out", help="Schedule file to write"),
    model: ModelChoice = typer.Option(ModelChoice.star, "--model"),
    k: int = typer.Option(DEFAULT_STAGES, "--k", help="Number of stages"),
    patch: Optional[int] = typer.Option(None, "--patch", help="Embed DCT dictionaries of this size"),
    with_dictionaries: bool = typer.Option(False, "--with-dictionaries"),
):
    """Write a default schedule"""
    _handlers().init_schedule(output_path, model.value, k, patch, with_dictionaries)


@app.command()
def evaluate(
    input_path: Path = typer.Option(..., "--in", help="Clean cube (.htc)"),
    model: Optional[ModelChoice] = typer.Option(None, "--model"),
    mode: ModeChoice = typer.Option(ModeChoice.unrolled, "--mode"),
    schedule: Optional[Path] = typer.Option(None, "--schedule"),
    sigmas: str = typer.Option("10,30,50,70", "--sigmas", help="Comma-separated sigma ladder"),
    impulse: float = typer.Option(0.0, "--impulse"),
    deadlines: float = typer.Option(0.0, "--deadlines"),
    seed: int = typer.Option(0, "--seed"),
    output_path: Optional[Path] = typer.Option(None, "--out", help="Write rows as JSON"),
    rank: Optional[int] = typer.Option(None, "--rank"),
    patch: Optional[int] = typer.Option(None, "--patch"),
    stride: Optional[int] = typer.Option(None, "--stride"),
    tnn: Optional[TnnChoice] = typer.Option(None, "--tnn"),
    threads: Optional[int] = typer.Option(None, "--threads"),
):
    """Simulate, denoise and score a clean cube over a noise ladder"""
    _handlers().evaluate(
        input_path,
        model=_value(model),
        mode=mode.value,
        schedule_path=schedule,
        sigmas=_parse_sigmas(sigmas),
        impulse=impulse,
        deadlines=deadlines,
        seed=seed,
        output_path=output_path,
        rank=rank,
        patch=patch,
        stride=stride,
        tnn=_value(tnn),
        threads=threads,
    )


@config_app.command("show")
def config_show():
    """Show configuration"""
    _handlers().config_show()


@config_app.command("set")
def config_set(key: str, value: str):
    """Set a configuration value"""
    _handlers().config_set(key, value)


@config_app.command("reset")
def config_reset():
    """Reset configuration to defaults"""
    _handlers().config_reset()


def _diagnostic(record: dict):
    sys.stderr.write(json.dumps(record) + "\n")
    sys.stderr.flush()


def _exception_types(name: str) -> tuple:
    """``click`` exception class plus the copy vendored by newer ``typer`` releases."""
    types = [getattr(click.exceptions, name)]
    try:
        from typer._click import exceptions as vendored
    except ImportError:
        vendored = None
    if vendored is not None and getattr(vendored, name, None) not in (None, *types):
        types.append(getattr(vendored, name))
    return tuple(types)


USAGE_ERRORS = _exception_types("UsageError")
ABORTS = _exception_types("Abort")


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; 0 on success, 1 on usage error, 2 on data or numeric error."""
    try:
        result = app(args=argv, prog_name="star-denoise", standalone_mode=False)
    except USAGE_ERRORS as e:
        _diagnostic({"status": "error", "error": "UsageError", "message": e.format_message()})
        return 1
    except ABORTS:
        _diagnostic({"status": "error", "error": "Aborted", "message": "aborted"})
        return 1
    except StarError as e:
        logging.getLogger(__name__).debug("Command failed", exc_info=True)
        _diagnostic(e.to_record())
        return e.exit_code
    return result if isinstance(result, int) else 0


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
