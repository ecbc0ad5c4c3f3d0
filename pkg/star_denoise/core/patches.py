import itertools

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimsError, ParamError
from .tensor import Cube, Dims


def _axis_origins(n: int, p: int, s: int) -> List[int]:
    origins = list(range(0, n - p + 1, s))
    if origins[-1] != n - p:
        origins.append(n - p)
    return origins


@dataclass(frozen=True, eq=False)
class PatchLayout:
    """Origins of the overlapping patches ``R_i`` over a source cube."""

    patch_dims: Dims
    stride: Dims
    origins: np.ndarray
    source_dims: Dims
    counts: np.ndarray = field(repr=False)

    @property
    def n_patches(self) -> int:
        return int(self.origins.shape[0])

    def slices(self, index: int) -> Tuple[slice, slice, slice]:
        return tuple(
            slice(int(o), int(o) + p) for o, p in zip(self.origins[index], self.patch_dims)
        )


def plan_patches(
    source_dims: Sequence[int], patch_dims: Sequence[int], stride: Sequence[int]
) -> PatchLayout:
    source_dims = tuple(int(n) for n in source_dims)
    patch_dims = tuple(int(p) for p in patch_dims)
    stride = tuple(int(s) for s in stride)
    if len(source_dims) != 3 or len(patch_dims) != 3 or len(stride) != 3:
        raise DimsError("source, patch and stride must each have three entries")
    if any(s < 1 for s in stride):
        raise ParamError(f"stride must be >= 1, got {stride}")
    if any(p < 1 or p > n for p, n in zip(patch_dims, source_dims)):
        raise DimsError(f"patch {patch_dims} does not fit in source {source_dims}")

    # A stride wider than the patch would leave gaps
    stride = tuple(min(s, p) for s, p in zip(stride, patch_dims))
    per_axis = [_axis_origins(n, p, s) for n, p, s in zip(source_dims, patch_dims, stride)]
    origins = np.array(list(itertools.product(*per_axis)), dtype=np.int64).reshape(-1, 3)

    counts = np.zeros(source_dims, dtype=np.int64)
    for i, j, k in origins:
        counts[i : i + patch_dims[0], j : j + patch_dims[1], k : k + patch_dims[2]] += 1
    counts.flags.writeable = False
    origins.flags.writeable = False

    return PatchLayout(
        patch_dims=patch_dims,
        stride=stride,
        origins=origins,
        source_dims=source_dims,
        counts=counts,
    )


def extract(g: Cube, layout: PatchLayout) -> np.ndarray:
    """Stack of patches, shape ``(n_patches, p1, p2, p3)``."""
    if tuple(g.shape) != layout.source_dims:
        raise DimsError(f"cube dims {g.shape} do not match layout {layout.source_dims}")
    windows = sliding_window_view(g, layout.patch_dims)
    o = layout.origins
    return np.array(windows[o[:, 0], o[:, 1], o[:, 2]], dtype=np.float64)


def aggregate(patches: np.ndarray, layout: PatchLayout) -> Cube:
    """``sum_i R_i^T patches[i]``; overlaps add, accumulated in patch order."""
    if patches.shape != (layout.n_patches,) + layout.patch_dims:
        raise DimsError(
            f"patch stack {patches.shape} does not match layout "
            f"{(layout.n_patches,) + layout.patch_dims}"
        )
    out = np.zeros(layout.source_dims, dtype=np.float64)
    for index in range(layout.n_patches):
        out[layout.slices(index)] += patches[index]
    return out


def coverage_weights(layout: PatchLayout, lam: float) -> Cube:
    """Diagonal of ``(I + lam * sum_i R_i^T R_i)^-1``."""
    if not lam >= 0:
        raise ParamError(f"lambda must be >= 0, got {lam}")
    return 1.0 / (1.0 + lam * layout.counts)
