"""HTC cube files.

Layout: 4-byte magic ``HTC1``, then ``n1, n2, n3`` as little-endian uint32,
then ``n1*n2*n3`` little-endian float32 samples with sample ``(i, j, k)`` at
index ``i + n1*j + n1*n2*k``.
"""

import logging

from pathlib import Path
from typing import Union

import numpy as np

from .errors import FormatError, NumericError
from .tensor import Cube, as_cube

logger = logging.getLogger(__name__)

MAGIC = b"HTC1"
HEADER = np.dtype([("magic", "S4"), ("dims", "<u4", (3,))])
SAMPLE = np.dtype("<f4")


def encode_cube(c: Cube) -> bytes:
    c = np.asarray(c)
    if c.ndim != 3:
        raise FormatError(f"only 3-D cubes can be written, got shape {c.shape}")
    header = np.zeros((), dtype=HEADER)
    header["magic"] = MAGIC
    header["dims"] = c.shape
    return header.tobytes() + c.astype(SAMPLE).tobytes(order="F")


def decode_cube(payload: bytes, source: str = "<bytes>") -> Cube:
    if len(payload) < HEADER.itemsize:
        raise FormatError(f"{source}: file too short for an HTC header")
    header = np.frombuffer(payload, dtype=HEADER, count=1)[0]
    if bytes(header["magic"]) != MAGIC:
        raise FormatError(f"{source}: bad magic {payload[:4]!r}, expected {MAGIC!r}")
    dims = tuple(int(n) for n in header["dims"])
    if min(dims) < 1:
        raise FormatError(f"{source}: zero-size dimension in header {dims}")
    expected = HEADER.itemsize + SAMPLE.itemsize * int(np.prod(dims))
    if len(payload) != expected:
        raise FormatError(
            f"{source}: payload is {len(payload)} bytes, header {dims} needs {expected}"
        )
    samples = np.frombuffer(payload, dtype=SAMPLE, offset=HEADER.itemsize)
    if not np.all(np.isfinite(samples)):
        raise NumericError(f"{source}: payload contains NaN or Inf samples")
    return as_cube(samples.reshape(dims, order="F").astype(np.float64))


def read_cube(path: Union[str, Path]) -> Cube:
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror or e}") from e
    cube = decode_cube(payload, str(path))
    logger.debug(f"Read {cube.shape} cube from {path}")
    return cube


def write_cube(path: Union[str, Path], c: Cube):
    payload = encode_cube(c)
    try:
        Path(path).write_bytes(payload)
    except OSError as e:
        raise FormatError(f"cannot write {path}: {e.strerror or e}") from e
    logger.debug(f"Wrote {np.shape(c)} cube to {path}")
