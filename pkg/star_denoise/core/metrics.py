"""Quality indexes for denoised cubes.

PSNR is averaged over bands with a peak of 1.0 and an MSE floor, so two
identical cubes score ``PSNR_CAP``. SSIM uses the Gaussian-window variant
(11x11, sigma 1.5, K1 0.01, K2 0.03, data range 1.0) averaged over bands.
SAM is the mean spectral angle in radians. ERGAS uses a resolution ratio
of 1.
"""

import logging

from typing import Tuple

import numpy as np
from pydantic import BaseModel
from skimage.metrics import structural_similarity

from .config import MSE_FLOOR
from .errors import DimsError, MetricUndefined
from .solver import reconstruction_loss
from .tensor import Cube

logger = logging.getLogger(__name__)

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


class MetricReport(BaseModel):
    psnr: float
    ssim: float
    sam: float
    ergas: float
    loss: float
    ssim_fallback: bool = False
    sam_skipped: int = 0
    ergas_skipped: int = 0


def _check_pair(x_hat: Cube, x_ref: Cube):
    if x_hat.shape != x_ref.shape or x_hat.ndim != 3:
        raise DimsError(f"metric inputs must be cubes of equal dims, got {x_hat.shape} and {x_ref.shape}")


def psnr(x_hat: Cube, x_ref: Cube) -> float:
    _check_pair(x_hat, x_ref)
    mse = np.mean((np.asarray(x_hat) - np.asarray(x_ref)) ** 2, axis=(0, 1))
    return float(np.mean(10.0 * np.log10(1.0 / np.maximum(mse, MSE_FLOOR))))


def ssim_uses_fallback(dims) -> bool:
    return min(dims[0], dims[1]) < SSIM_WINDOW


def _global_ssim(a: np.ndarray, b: np.ndarray) -> float:
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    mu_a, mu_b = a.mean(), b.mean()
    var_a, var_b = a.var(), b.var()
    cov = np.mean((a - mu_a) * (b - mu_b))
    return float(
        ((2 * mu_a * mu_b + c1) * (2 * cov + c2))
        / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2))
    )


def ssim(x_hat: Cube, x_ref: Cube) -> float:
    """Band-averaged SSIM; bands smaller than the window use one global window."""
    _check_pair(x_hat, x_ref)
    a = np.clip(np.asarray(x_hat, dtype=np.float64), 0.0, 1.0)
    b = np.clip(np.asarray(x_ref, dtype=np.float64), 0.0, 1.0)
    fallback = ssim_uses_fallback(a.shape)
    if fallback:
        logger.warning(
            f"Spatial dims {a.shape[:2]} are below the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window; "
            "using a single full-image window"
        )
    values = []
    for band in range(a.shape[2]):
        if fallback:
            values.append(_global_ssim(a[:, :, band], b[:, :, band]))
        else:
            values.append(
                structural_similarity(
                    a[:, :, band],
                    b[:, :, band],
                    data_range=1.0,
                    gaussian_weights=True,
                    sigma=SSIM_SIGMA,
                    use_sample_covariance=False,
                    K1=SSIM_K1,
                    K2=SSIM_K2,
                )
            )
    return float(np.mean(values))


def sam_with_skipped(x_hat: Cube, x_ref: Cube) -> Tuple[float, int]:
    _check_pair(x_hat, x_ref)
    u = np.asarray(x_hat, dtype=np.float64).reshape(-1, x_hat.shape[2], order="F")
    v = np.asarray(x_ref, dtype=np.float64).reshape(-1, x_ref.shape[2], order="F")
    norm_u = np.linalg.norm(u, axis=1, keepdims=True)
    norm_v = np.linalg.norm(v, axis=1, keepdims=True)
    valid = (norm_u[:, 0] > 0) & (norm_v[:, 0] > 0)
    if not np.any(valid):
        raise MetricUndefined("SAM is undefined: every spectral vector has zero norm")
    # Half-angle form stays exact for parallel vectors, unlike arccos of the cosine
    unit_u = u[valid] / norm_u[valid]
    unit_v = v[valid] / norm_v[valid]
    angles = 2.0 * np.arctan2(
        np.linalg.norm(unit_u - unit_v, axis=1), np.linalg.norm(unit_u + unit_v, axis=1)
    )
    return float(np.mean(angles)), int(np.count_nonzero(~valid))


def sam(x_hat: Cube, x_ref: Cube) -> float:
    return sam_with_skipped(x_hat, x_ref)[0]


def ergas_with_skipped(x_hat: Cube, x_ref: Cube) -> Tuple[float, int]:
    _check_pair(x_hat, x_ref)
    means = np.mean(x_ref, axis=(0, 1))
    valid = means != 0
    if not np.any(valid):
        raise MetricUndefined("ERGAS is undefined: every reference band has zero mean")
    rmse = np.sqrt(np.mean((np.asarray(x_hat) - np.asarray(x_ref)) ** 2, axis=(0, 1)))
    ratios = (rmse[valid] / means[valid]) ** 2
    return float(100.0 * np.sqrt(np.mean(ratios))), int(np.count_nonzero(~valid))


def ergas(x_hat: Cube, x_ref: Cube) -> float:
    return ergas_with_skipped(x_hat, x_ref)[0]


def evaluate(x_hat: Cube, x_ref: Cube) -> MetricReport:
    sam_value, sam_skipped = sam_with_skipped(x_hat, x_ref)
    ergas_value, ergas_skipped = ergas_with_skipped(x_hat, x_ref)
    return MetricReport(
        psnr=psnr(x_hat, x_ref),
        ssim=ssim(x_hat, x_ref),
        sam=sam_value,
        ergas=ergas_value,
        loss=reconstruction_loss(x_hat, x_ref),
        ssim_fallback=ssim_uses_fallback(x_ref.shape),
        sam_skipped=sam_skipped,
        ergas_skipped=ergas_skipped,
    )
