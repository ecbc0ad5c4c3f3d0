"""Dense 3-D cube algebra.

A cube is a float64 ``numpy.ndarray`` of shape ``(n1, n2, n3)``. Sample
``(i, j, k)`` sits at flat offset ``i + n1*j + n1*n2*k``, i.e. Fortran order.

Unfoldings follow the Kolda-Bader convention: the mode-``m`` unfolding has
``n_m`` rows and the remaining indices enumerate its columns with the lower
mode varying fastest. For a cube of dims ``(n1, n2, n3)`` the column of
element ``(i, j, k)`` is ``j + n2*k`` (mode 1), ``i + n1*k`` (mode 2) and
``i + n1*j`` (mode 3).
"""

from typing import Sequence, Tuple, Union

import numpy as np

from .errors import DimsError, NumericError

Cube = np.ndarray
Matrix = np.ndarray
Dims = Tuple[int, int, int]

MODES = (1, 2, 3)
ELEMENTWISE_OPS = ("add", "sub", "hadamard", "scale")


def as_cube(data) -> Cube:
    """Validate ``data`` as a finite 3-D cube and return a read-only float64 copy."""
    cube = np.array(data, dtype=np.float64)
    if cube.ndim != 3:
        raise DimsError(f"a cube must be 3-D, got shape {cube.shape}")
    if min(cube.shape) < 1:
        raise DimsError(f"zero-size dimension in {cube.shape}")
    if not np.all(np.isfinite(cube)):
        raise NumericError("cube contains NaN or Inf samples")
    cube.flags.writeable = False
    return cube


def _check_dims(dims: Sequence[int]) -> Dims:
    if len(dims) != 3 or any(int(n) < 1 for n in dims):
        raise DimsError(f"dims must be three positive integers, got {tuple(dims)}")
    return tuple(int(n) for n in dims)


def _check_mode(mode: int) -> int:
    if mode not in MODES:
        raise DimsError(f"mode must be 1, 2 or 3, got {mode}")
    return mode - 1


def unfold(t: Cube, mode: int) -> Matrix:
    axis = _check_mode(mode)
    return np.reshape(np.moveaxis(t, axis, 0), (t.shape[axis], -1), order="F")


def fold(m: Matrix, mode: int, dims: Sequence[int]) -> Cube:
    axis = _check_mode(mode)
    dims = _check_dims(dims)
    rest = [n for a, n in enumerate(dims) if a != axis]
    expected = (dims[axis], rest[0] * rest[1])
    if m.ndim != 2 or m.shape != expected:
        raise DimsError(
            f"cannot fold a {m.shape} matrix along mode {mode} into {dims}; "
            f"expected {expected}"
        )
    moved = np.reshape(m, (dims[axis], rest[0], rest[1]), order="F")
    return np.moveaxis(moved, 0, axis)


def mode_product(t: Cube, m: Matrix, mode: int) -> Cube:
    """Mode-``mode`` product ``t x_mode m``."""
    axis = _check_mode(mode)
    if m.ndim != 2 or m.shape[1] != t.shape[axis]:
        raise DimsError(
            f"mode-{mode} product needs a matrix with {t.shape[axis]} columns, "
            f"got {m.shape}"
        )
    dims = list(t.shape)
    dims[axis] = m.shape[0]
    return fold(m @ unfold(t, mode), mode, dims)


def elementwise(a: Cube, b: Union[Cube, float], op: str) -> Cube:
    if op not in ELEMENTWISE_OPS:
        raise DimsError(f"unknown elementwise op {op!r}")
    if op == "scale":
        if not np.isscalar(b):
            raise DimsError("scale takes a scalar operand")
        return a * float(b)
    if np.isscalar(b):
        raise DimsError(f"{op} takes a cube operand")
    if a.shape != b.shape:
        raise DimsError(f"dims mismatch: {a.shape} vs {b.shape}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    return a * b


def fro_norm(t: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(t) ** 2)))


def inner(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise DimsError(f"dims mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a * b))
