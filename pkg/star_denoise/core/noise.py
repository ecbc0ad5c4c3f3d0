"""Seeded synthetic corruption of cubes in the [0, 1] data range.

Gaussian sigma is given on the 0-255 scale. Every band draws from its own
generator, spawned from the caller's seed, so the result does not depend on
the order bands are processed in.
"""

import logging

from typing import List, Literal

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from .errors import ParamError
from .tensor import Cube

logger = logging.getLogger(__name__)

NoiseKind = Literal["gaussian", "impulse", "deadlines"]

MAX_DEAD_COLUMNS = 3


class NoiseSpec(BaseModel):
    kind: NoiseKind = "gaussian"
    sigma_255: float = Field(0.0, ge=0)
    impulse_ratio: float = Field(0.0, ge=0, le=1)
    band_ratio: float = Field(0.0, ge=0, le=1)
    seed: int = 0


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def _band_generators(seed: int, n_bands: int) -> List[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(n_bands)
    return [np.random.default_rng(child) for child in children]


def add_gaussian(x: Cube, sigma_255: float, seed: int) -> Cube:
    """``x + n`` with ``n ~ N(0, (sigma_255 / 255)^2)``; not clipped."""
    if sigma_255 < 0:
        raise ParamError(f"sigma must be >= 0, got {sigma_255}")
    y = np.array(x, dtype=np.float64)
    if sigma_255 == 0:
        return y
    sigma = sigma_255 / 255.0
    for band, rng in enumerate(_band_generators(seed, x.shape[2])):
        y[:, :, band] += rng.normal(0.0, sigma, size=x.shape[:2])
    return y


def add_impulse(x: Cube, ratio: float, seed: int) -> Cube:
    """Salt-and-pepper: per band, ``floor(ratio * n1 * n2 + 0.5)`` distinct pixels set to 1 or 0."""
    if not 0 <= ratio <= 1:
        raise ParamError(f"impulse ratio must be in [0, 1], got {ratio}")
    y = np.array(x, dtype=np.float64)
    n_pixels = x.shape[0] * x.shape[1]
    count = _round_half_up(ratio * n_pixels)
    if count == 0:
        return y
    for band, rng in enumerate(_band_generators(seed, x.shape[2])):
        chosen = rng.choice(n_pixels, size=count, replace=False)
        values = np.zeros(count)
        values[rng.permutation(count)[: count // 2]] = 1.0
        plane = y[:, :, band].reshape(-1, order="F")
        plane[chosen] = values
        y[:, :, band] = plane.reshape(x.shape[:2], order="F")
    return y


def add_dead_lines(x: Cube, band_ratio: float, seed: int) -> Cube:
    """Zero 1-3 full-height columns in ``floor(band_ratio * n3 + 0.5)`` bands."""
    if not 0 <= band_ratio <= 1:
        raise ParamError(f"band ratio must be in [0, 1], got {band_ratio}")
    y = np.array(x, dtype=np.float64)
    n_bands = x.shape[2]
    count = _round_half_up(band_ratio * n_bands)
    if count == 0:
        return y
    selector, *per_band = _band_generators(seed, n_bands + 1)
    bands = np.sort(selector.choice(n_bands, size=count, replace=False))
    for band in bands:
        rng = per_band[band]
        n_lines = int(rng.integers(1, min(MAX_DEAD_COLUMNS, x.shape[1]) + 1))
        columns = rng.choice(x.shape[1], size=n_lines, replace=False)
        y[:, columns, band] = 0.0
    logger.debug(f"Dead lines in bands {bands.tolist()}")
    return y


def simulate(
    x: Cube,
    sigma_255: float = 0.0,
    impulse_ratio: float = 0.0,
    band_ratio: float = 0.0,
    seed: int = 0,
) -> Cube:
    """Gaussian, then impulse, then dead lines, each with its own derived seed."""
    y = np.array(x, dtype=np.float64)
    for spec in spec_chain(sigma_255, impulse_ratio, band_ratio, seed):
        y = apply_spec(y, spec)
    return y


def apply_spec(x: Cube, spec: NoiseSpec) -> Cube:
    if spec.kind == "gaussian":
        return add_gaussian(x, spec.sigma_255, spec.seed)
    if spec.kind == "impulse":
        return add_impulse(x, spec.impulse_ratio, spec.seed)
    return add_dead_lines(x, spec.band_ratio, spec.seed)


def spec_chain(
    sigma_255: float = 0.0,
    impulse_ratio: float = 0.0,
    band_ratio: float = 0.0,
    seed: int = 0,
) -> List[NoiseSpec]:
    """Specs equivalent to ``simulate`` with the same arguments, in application order."""
    seeds = [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(seed).spawn(3)]
    try:
        return [
            NoiseSpec(kind="gaussian", sigma_255=sigma_255, seed=seeds[0]),
            NoiseSpec(kind="impulse", impulse_ratio=impulse_ratio, seed=seeds[1]),
            NoiseSpec(kind="deadlines", band_ratio=band_ratio, seed=seeds[2]),
        ]
    except ValidationError as e:
        first = e.errors()[0]
        raise ParamError(f"{first['loc'][0]}: {first['msg']}") from e
