import json
import logging

from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from .core.benchmark import sweep
from .core.config import DEFAULT_SIGMA_LADDER, DEFAULT_STAGES, ConfigManager
from .core.errors import FormatError, ParamError
from .core.htc import read_cube, write_cube
from .core import metrics, noise
from .core.schedule import (
    Schedule,
    default_schedule,
    load_schedule,
    normalize_model,
    save_schedule,
)
from .core.solver import SolverOptions, run
from .core.tensor import Cube
from .ui.display import Display

logger = logging.getLogger(__name__)


def _write_json(path: Path, record):
    try:
        with open(path, "w") as f:
            json.dump(record, f, indent=2)
    except OSError as e:
        raise FormatError(f"cannot write {path}: {e.strerror or e}") from e


class CommandHandlers:
    """One method per subcommand. Flags left as ``None`` fall back to the config file."""

    def __init__(self, display: Display = None, config: ConfigManager = None):
        self.display = display or Display()
        self.config = config or ConfigManager()

    def _setting(self, value, key: str):
        return value if value is not None else self.config.get(key)

    def _solver_options(self, y: Cube, rank: Optional[int] = None, **flags) -> SolverOptions:
        # An explicit rank is passed through so rank > n3 fails; the configured one is clamped
        if rank is None:
            rank = min(int(self.config.get("rank")), y.shape[2])
        settings = {key: self._setting(value, key) for key, value in flags.items()}
        try:
            return SolverOptions(rank=rank, **settings)
        except ValidationError as e:
            first = e.errors()[0]
            raise ParamError(f"{'.'.join(map(str, first['loc']))}: {first['msg']}") from e

    def _schedule(
        self, schedule_path: Optional[Path], model: Optional[str], k: int = DEFAULT_STAGES
    ) -> Schedule:
        if schedule_path is None:
            return default_schedule(model or "star", k)
        schedule = load_schedule(schedule_path)
        if model is not None and normalize_model(model) != schedule.model:
            raise ParamError(
                f"--model {model} does not match the schedule's model {schedule.model}"
            )
        return schedule

    def _classical_overrides(self, schedule: Schedule, overrides: dict) -> Schedule:
        given = {k: v for k, v in overrides.items() if v is not None}
        if not given:
            return schedule
        try:
            first = schedule.stages[0].model_copy(update=given)
            first = type(first).model_validate(first.model_dump(by_alias=True))
        except ValidationError as e:
            error = e.errors()[0]
            cause = error.get("ctx", {}).get("error")
            raise ParamError(str(cause or error["msg"])) from e
        return Schedule(model=schedule.model, stages=[first, *schedule.stages[1:]])

    def simulate(
        self,
        input_path: Path,
        output_path: Path,
        gaussian: float = 0.0,
        impulse: float = 0.0,
        deadlines: float = 0.0,
        seed: int = 0,
    ):
        """Corrupt a clean cube"""
        clean = read_cube(input_path)
        noisy = noise.simulate(clean, gaussian, impulse, deadlines, seed)
        write_cube(output_path, noisy)
        self.display.success(
            f"Wrote {output_path} (sigma={gaussian:g}, impulse={impulse:g}, "
            f"deadlines={deadlines:g}, seed={seed})"
        )
        self.display.emit(
            {"status": "ok", "command": "simulate", "out": str(output_path), "dims": list(clean.shape)}
        )

    def denoise(
        self,
        input_path: Path,
        output_path: Path,
        model: Optional[str] = None,
        mode: str = "classical",
        schedule_path: Optional[Path] = None,
        report_path: Optional[Path] = None,
        rank: Optional[int] = None,
        stage_overrides: Optional[dict] = None,
        **flags,
    ):
        """Denoise a cube with STAR or STAR-S"""
        y = read_cube(input_path)
        schedule = self._schedule(schedule_path, model)
        if mode == "classical":
            schedule = self._classical_overrides(schedule, stage_overrides or {})
        opts = self._solver_options(y, rank, **flags)

        with self.display.spinner(f"Denoising {input_path} ({schedule.model}, {mode})"):
            x, report = run(y, schedule, mode, opts)

        write_cube(output_path, x)
        if report_path is not None:
            _write_json(report_path, report.to_record())
            logger.info(f"Report written to {report_path}")

        self.display.show_solve_report(report)
        if report.stopped_by == "max_iters":
            self.display.warning(f"Stopped at max_iters={opts.max_iters} before reaching tol")
        self.display.emit(
            {
                "status": "ok",
                "command": "denoise",
                "out": str(output_path),
                "iterations": report.iterations,
                "stopped_by": report.stopped_by,
            }
        )

    def metrics(self, ref_path: Path, test_path: Path):
        """Score a test cube against a reference"""
        report = metrics.evaluate(read_cube(test_path), read_cube(ref_path))
        self.display.emit(report.model_dump())
        self.display.show_metrics(report)

    def init_schedule(
        self,
        output_path: Path,
        model: str = "star",
        k: int = DEFAULT_STAGES,
        patch: Optional[int] = None,
        with_dictionaries: bool = False,
    ):
        """Write a schedule with every scalar at its initial value"""
        patch_dims = (patch,) * 3 if patch is not None else None
        schedule = default_schedule(
            model, k, patch_dims=patch_dims, embed_dictionaries=with_dictionaries or patch is not None
        )
        save_schedule(schedule, output_path)
        self.display.show_schedule(schedule)
        self.display.success(f"Schedule written to {output_path}")
        self.display.emit(
            {"status": "ok", "command": "init-schedule", "out": str(output_path), "k": schedule.k}
        )

    def evaluate(
        self,
        input_path: Path,
        model: Optional[str] = None,
        mode: str = "unrolled",
        schedule_path: Optional[Path] = None,
        sigmas: Sequence[float] = DEFAULT_SIGMA_LADDER,
        impulse: float = 0.0,
        deadlines: float = 0.0,
        seed: int = 0,
        output_path: Optional[Path] = None,
        rank: Optional[int] = None,
        **flags,
    ):
        """Simulate, denoise and score a clean cube at several noise levels"""
        clean = read_cube(input_path)
        schedule = self._schedule(schedule_path, model)
        opts = self._solver_options(clean, rank, **flags)

        with self.display.spinner("Running noise-level sweep"):
            rows = sweep(
                clean,
                schedule,
                mode,
                opts,
                sigmas=sigmas,
                impulse_ratio=impulse,
                band_ratio=deadlines,
                seed=seed,
                progress=lambda sigma: self.display.info(f"sigma {sigma:g}/255"),
            )

        self.display.show_benchmark(rows)
        records = [row.model_dump() for row in rows]
        if output_path is not None:
            _write_json(output_path, records)
            self.display.success(f"Results written to {output_path}")
        self.display.emit({"status": "ok", "command": "evaluate", "rows": records})

    def config_show(self):
        self.display.show_config(self.config)

    def config_set(self, key: str, value: str):
        """Set a persistent default: config set <key> <value>"""
        self.config.set(key, value)
        self.display.success(f"Set {key} = {self.config.get(key)}")

    def config_reset(self):
        self.config.reset()
        self.display.success("Configuration reset to defaults")
