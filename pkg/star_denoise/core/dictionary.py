from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import DimsError
from .tensor import Matrix


def dct_basis(n: int) -> Matrix:
    """Orthonormal DCT-II matrix; row ``k`` is frequency ``k``, row 0 is ``1/sqrt(n)``."""
    if n < 1:
        raise DimsError(f"DCT size must be >= 1, got {n}")
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    basis = np.cos(np.pi * (2 * i + 1) * k / (2 * n)) * np.sqrt(2.0 / n)
    basis[0, :] = 1.0 / np.sqrt(n)
    return basis


@dataclass(frozen=True, eq=False)
class DictionarySet:
    d1: Matrix
    d2: Matrix
    d3: Matrix

    @classmethod
    def dct(cls, sizes: Sequence[int] = (9, 9, 9)) -> "DictionarySet":
        return cls(*(dct_basis(int(n)) for n in sizes))

    @classmethod
    def from_lists(cls, d1, d2, d3) -> "DictionarySet":
        """Build from row-major nested lists, checking only that each is square."""
        mats = []
        for name, rows in (("d1", d1), ("d2", d2), ("d3", d3)):
            mat = np.asarray(rows, dtype=np.float64)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
                raise DimsError(f"dictionary {name} must be a square matrix, got {mat.shape}")
            mats.append(mat)
        return cls(*mats)

    @property
    def atom_dims(self) -> Tuple[int, int, int]:
        """Code dims accepted by the forward operator"""
        return (self.d1.shape[1], self.d2.shape[1], self.d3.shape[1])

    @property
    def signal_dims(self) -> Tuple[int, int, int]:
        return (self.d1.shape[0], self.d2.shape[0], self.d3.shape[0])

    def matrices(self) -> Tuple[Matrix, Matrix, Matrix]:
        return (self.d1, self.d2, self.d3)

    def to_lists(self):
        return {name: mat.tolist() for name, mat in zip(("d1", "d2", "d3"), self.matrices())}


def tucker_apply(b: np.ndarray, d: DictionarySet, adjoint: bool = False) -> np.ndarray:
    """``b x1 D1 x2 D2 x3 D3`` (or the transposed product when ``adjoint``).

    The last three axes of ``b`` are the patch axes; any leading axes are a
    batch of patches.
    """
    expected = d.signal_dims if adjoint else d.atom_dims
    if b.ndim < 3 or b.shape[-3:] != expected:
        raise DimsError(f"Tucker operand dims {b.shape[-3:]} do not match dictionaries {expected}")
    d1, d2, d3 = (m.T if adjoint else m for m in d.matrices())
    out = np.einsum("...abc,ia->...ibc", b, d1)
    out = np.einsum("...abc,jb->...ajc", out, d2)
    return np.einsum("...abc,kc->...abk", out, d3)
