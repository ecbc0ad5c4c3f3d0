"""Proximal operators: soft-thresholding, matrix SVT and tensor SVT.

Tensor SVT uses the t-product convention: a unitary DFT along the third
axis, SVT of every frontal slice in the Fourier domain, inverse DFT. Because
the transform is unitary, thresholding each Fourier slice at ``tau`` is the
exact prox of ``tau * sum_k ||F_k||_*``, which for a single frontal slice is
the matrix nuclear norm. ``tnn="mode3-unfold"`` uses the nuclear norm of the
mode-3 unfolding instead.
"""

import numpy as np

from .config import TNN_CHOICES
from .errors import NumericError, ParamError
from .linalg import dft_mode3, svd
from .tensor import Matrix, fold, fro_norm, unfold

IMAG_TOLERANCE = 1e-8


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not np.isfinite(tau) or tau < 0:
        raise ParamError(f"threshold must be finite and >= 0, got {tau}")
    return tau


def _check_tnn(tnn: str) -> str:
    if tnn not in TNN_CHOICES:
        raise ParamError(f"tensor nuclear norm must be one of {TNN_CHOICES}, got {tnn!r}")
    return tnn


def soft_threshold(x: np.ndarray, tau: float) -> np.ndarray:
    tau = _check_tau(tau)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def matrix_svt(m: Matrix, tau: float) -> Matrix:
    tau = _check_tau(tau)
    result = svd(m)
    return (result.u * np.maximum(result.s - tau, 0.0)) @ result.v.conj().T


def _svt_stack(mats: np.ndarray, tau: float) -> np.ndarray:
    if not np.all(np.isfinite(mats)):
        raise NumericError("SVT input contains NaN or Inf")
    u, s, vh = np.linalg.svd(mats, full_matrices=False)
    return (u * np.maximum(s - tau, 0.0)[..., None, :]) @ vh


def _tsvd_threshold(t: np.ndarray, tau: float) -> np.ndarray:
    n3 = t.shape[-1]
    half = n3 // 2 + 1
    fourier = dft_mode3(t)
    # Frontal slices of the non-redundant half, as a stack of matrices
    slices = np.moveaxis(fourier[..., :half], -1, -3)
    slices[..., 0, :, :] = slices[..., 0, :, :].real
    shrunk = np.empty_like(fourier)
    shrunk[..., :half] = np.moveaxis(_svt_stack(slices, tau), -3, -1)
    for k in range(half, n3):
        shrunk[..., k] = np.conj(shrunk[..., n3 - k])
    out = dft_mode3(shrunk, inverse=True)
    residue = fro_norm(out.imag)
    if residue > IMAG_TOLERANCE * max(fro_norm(t), 1.0):
        raise NumericError(f"tensor SVT left an imaginary residue of {residue:.3g}")
    return np.ascontiguousarray(out.real)


def tensor_svt(t: np.ndarray, tau: float, tnn: str = "tsvd") -> np.ndarray:
    """Tensor SVT of a cube or of a stack of cubes (leading batch axes)."""
    tau = _check_tau(tau)
    tnn = _check_tnn(tnn)
    if tnn == "tsvd":
        return _tsvd_threshold(np.asarray(t, dtype=np.float64), tau)
    batch = np.asarray(t, dtype=np.float64).reshape((-1,) + t.shape[-3:])
    out = np.empty_like(batch)
    for index, cube in enumerate(batch):
        out[index] = fold(matrix_svt(unfold(cube, 3), tau), 3, cube.shape)
    return out.reshape(t.shape)


def nuclear_norm(t: np.ndarray, tnn: str = "tsvd") -> float:
    """Tensor nuclear norm matching ``tensor_svt``, summed over any batch axes."""
    tnn = _check_tnn(tnn)
    t = np.asarray(t, dtype=np.float64)
    if tnn == "tsvd":
        slices = np.moveaxis(dft_mode3(t), -1, -3)
        return float(np.sum(np.linalg.svd(slices, compute_uv=False)))
    batch = t.reshape((-1,) + t.shape[-3:])
    return float(
        sum(np.sum(np.linalg.svd(unfold(cube, 3), compute_uv=False)) for cube in batch)
    )
