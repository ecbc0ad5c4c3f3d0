import logging

from typing import Callable, List, Optional, Sequence

from pydantic import BaseModel

from .config import DEFAULT_SIGMA_LADDER
from .metrics import MetricReport, evaluate
from .noise import simulate
from .schedule import Schedule
from .solver import SolverOptions, run
from .tensor import Cube

logger = logging.getLogger(__name__)


class BenchmarkRow(BaseModel):
    sigma_255: float
    impulse_ratio: float = 0.0
    band_ratio: float = 0.0
    noisy: MetricReport
    denoised: MetricReport
    iterations: int
    wall_ms: float


def sweep(
    clean: Cube,
    schedule: Schedule,
    mode: str = "unrolled",
    opts: Optional[SolverOptions] = None,
    sigmas: Sequence[float] = DEFAULT_SIGMA_LADDER,
    impulse_ratio: float = 0.0,
    band_ratio: float = 0.0,
    seed: int = 0,
    progress: Optional[Callable[[float], None]] = None,
) -> List[BenchmarkRow]:
    """Corrupt ``clean`` at each noise level, denoise it and score both versions."""
    rows = []
    for sigma in sigmas:
        if progress:
            progress(sigma)
        noisy = simulate(clean, sigma, impulse_ratio, band_ratio, seed)
        denoised, report = run(noisy, schedule, mode, opts)
        row = BenchmarkRow(
            sigma_255=sigma,
            impulse_ratio=impulse_ratio,
            band_ratio=band_ratio,
            noisy=evaluate(noisy, clean),
            denoised=evaluate(denoised, clean),
            iterations=report.iterations,
            wall_ms=report.wall_ms,
        )
        logger.info(
            f"sigma={sigma:g}: PSNR {row.noisy.psnr:.2f} -> {row.denoised.psnr:.2f} dB"
        )
        rows.append(row)
    return rows
