import logging

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .config import LIPSCHITZ_SAFETY
from .errors import NumericError, ParamError
from .tensor import Cube, Matrix

logger = logging.getLogger(__name__)

LinearOperator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class SvdResult:
    u: Matrix
    s: np.ndarray
    v: Matrix

    def reconstruct(self) -> Matrix:
        return (self.u * self.s) @ self.v.conj().T


def svd(m: Matrix) -> SvdResult:
    """Thin SVD with a fixed sign convention.

    Each column of ``u`` is flipped so that its largest-magnitude entry is
    positive (first such entry on ties); ``v`` is flipped with it.
    """
    m = np.asarray(m)
    if not np.all(np.isfinite(m)):
        raise NumericError("svd input contains NaN or Inf")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    v = vh.conj().T
    if not np.iscomplexobj(u):
        pivots = np.argmax(np.abs(u), axis=0)
        signs = np.sign(u[pivots, np.arange(u.shape[1])])
        signs[signs == 0] = 1.0
        u = u * signs
        v = v * signs
    return SvdResult(u=u, s=s, v=v)


def spectral_norm(
    apply: LinearOperator,
    apply_adjoint: LinearOperator,
    probe_dims: Sequence[int],
    iters: int,
    seed: int = 0,
) -> float:
    """Power-iteration estimate of the operator norm, times the safety factor."""
    if iters < 1:
        raise ParamError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(tuple(probe_dims))
    x /= np.linalg.norm(x)
    sigma_sq = 0.0
    for _ in range(iters):
        z = apply_adjoint(apply(x))
        norm = float(np.linalg.norm(z))
        if norm == 0.0:
            return 0.0
        sigma_sq = norm
        x = z / norm
    estimate = float(np.sqrt(sigma_sq)) * LIPSCHITZ_SAFETY
    logger.debug(f"Spectral norm estimate {estimate:.6g} after {iters} iterations")
    return estimate


def dft_mode3(t: Cube, inverse: bool = False) -> np.ndarray:
    """Unitary DFT along the third axis of every tube ``t[i, j, :]``."""
    if inverse:
        return np.fft.ifft(t, axis=-1, norm="ortho")
    return np.fft.fft(t, axis=-1, norm="ortho")
