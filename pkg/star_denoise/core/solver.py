"""ADMM solver for the STAR and STAR-S denoising models.

Each stage updates the blocks in the order G, S (STAR-S only), B, L, A, P.
Classical mode repeats one parameter set until both the relative primal
residual ``||L - B||_F / max(1, ||B||_F)`` and the relative dual residual
``beta ||L - L_prev||_F / max(1, ||B||_F)`` drop below ``tol``; unrolled mode
runs exactly one stage per schedule entry with a single ISTA step per stage.
"""

import logging
import time

from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from .config import (
    CLASSICAL_INNER_ITERS,
    DEFAULT_A_SOURCE,
    DEFAULT_MAX_ITERS,
    DEFAULT_PATCH,
    DEFAULT_RANK,
    DEFAULT_STRIDE,
    DEFAULT_TNN,
    DEFAULT_TOL,
    LIPSCHITZ_FLOOR,
    LIPSCHITZ_SEED,
    POWER_ITERS,
    UNROLLED_INNER_ITERS,
)
from .dictionary import DictionarySet, tucker_apply
from .errors import DimsError, ModeError, NumericError, ParamError
from .linalg import spectral_norm, svd
from .patches import PatchLayout, aggregate, coverage_weights, extract, plan_patches
from .prox import nuclear_norm, soft_threshold, tensor_svt
from .schedule import Schedule, StageParams
from .tensor import Cube, Matrix, as_cube, fro_norm, mode_product, unfold
from .worker_pool import PatchWorkerPool

logger = logging.getLogger(__name__)

Triple = Union[int, Sequence[int]]


def _triple(value: Triple) -> Tuple[int, int, int]:
    if isinstance(value, (int, np.integer)):
        return (int(value),) * 3
    value = tuple(int(v) for v in value)
    if len(value) != 3:
        raise ParamError(f"expected one or three integers, got {value}")
    return value


class SolverOptions(BaseModel):
    rank: Optional[int] = None
    patch: Triple = DEFAULT_PATCH
    stride: Triple = DEFAULT_STRIDE
    tol: float = Field(DEFAULT_TOL, ge=0)
    max_iters: int = Field(DEFAULT_MAX_ITERS, ge=1)
    inner_iters: int = Field(CLASSICAL_INNER_ITERS, ge=1)
    threads: int = Field(1, ge=1)
    tnn: Literal["tsvd", "mode3-unfold"] = DEFAULT_TNN
    a_block_source: Literal["residual", "observed"] = DEFAULT_A_SOURCE
    estimate_lipschitz: bool = True
    track_objective: bool = True


class SolveReport(BaseModel):
    model: str
    mode: str
    iterations: int = 0
    residuals: List[float] = []
    dual_residuals: List[float] = []
    objective: List[float] = []
    wall_ms: float = 0.0
    stopped_by: Literal["tol", "max_iters", "stages"] = "stages"
    degenerate_a_updates: int = 0
    lipschitz: List[float] = []

    def to_record(self) -> dict:
        return self.model_dump()


@dataclass(eq=False)
class RciState:
    g: Cube
    a: Matrix
    b: np.ndarray
    l_aux: np.ndarray
    p: np.ndarray
    s: Optional[Cube]
    layout: PatchLayout
    weights: Cube
    dictionaries: DictionarySet
    model: str = "star"
    tnn: str = DEFAULT_TNN
    a_block_source: str = DEFAULT_A_SOURCE
    weights_lambda: float = 0.0
    degenerate_a_updates: int = 0

    @property
    def n_patches(self) -> int:
        return self.layout.n_patches

    def reconstruction(self) -> Cube:
        return mode_product(self.g, self.a, 3)


def effective_patch_dims(source_dims: Sequence[int], patch: Triple) -> Tuple[int, int, int]:
    """Clamp the requested patch to the RCI dims."""
    return tuple(min(int(p), int(n)) for p, n in zip(_triple(patch), source_dims))


def init_state(
    y: Cube,
    n4: int,
    patch: Triple = DEFAULT_PATCH,
    stride: Triple = DEFAULT_STRIDE,
    model: str = "star",
    dictionaries: Optional[DictionarySet] = None,
    tnn: str = DEFAULT_TNN,
    a_block_source: str = DEFAULT_A_SOURCE,
) -> RciState:
    y = as_cube(y)
    n3 = y.shape[2]
    if not 1 <= n4 <= n3:
        raise ParamError(f"subspace rank must satisfy 1 <= rank <= {n3}, got {n4}")

    a = svd(unfold(y, 3)).u[:, :n4]
    g = mode_product(y, a.T, 3)

    patch_dims = effective_patch_dims(g.shape, patch)
    layout = plan_patches(g.shape, patch_dims, _triple(stride))
    if dictionaries is None:
        dictionaries = DictionarySet.dct(patch_dims)
    _check_dictionaries(dictionaries, patch_dims)

    codes = np.zeros((layout.n_patches,) + patch_dims)
    logger.debug(
        f"Initialized {model} state: RCI {g.shape}, {layout.n_patches} patches of {patch_dims}"
    )
    return RciState(
        g=g,
        a=a,
        b=codes,
        l_aux=codes.copy(),
        p=codes.copy(),
        s=np.zeros(y.shape) if model == "star_s" else None,
        layout=layout,
        weights=coverage_weights(layout, 0.0),
        dictionaries=dictionaries,
        model=model,
        tnn=tnn,
        a_block_source=a_block_source,
    )


def _check_dictionaries(dictionaries: DictionarySet, patch_dims: Sequence[int]):
    if dictionaries.atom_dims != tuple(patch_dims) or dictionaries.signal_dims != tuple(patch_dims):
        raise DimsError(
            f"dictionaries of size {dictionaries.signal_dims} do not match patches {tuple(patch_dims)}"
        )


def _stage_dictionaries(state: RciState, params: StageParams) -> DictionarySet:
    override = params.dictionary_set()
    if override is None:
        return state.dictionaries
    _check_dictionaries(override, state.layout.patch_dims)
    return override


def _effective_observation(state: RciState, y: Cube) -> Cube:
    return y - state.s if state.s is not None else y


def g_update(state: RciState, y: Cube, params: StageParams) -> Cube:
    if tuple(y.shape[:2]) != state.g.shape[:2] or y.shape[2] != state.a.shape[0]:
        raise DimsError(f"observation {y.shape} does not match the state")
    dictionaries = _stage_dictionaries(state, params)
    if state.weights_lambda != params.lam:
        state.weights = coverage_weights(state.layout, params.lam)
        state.weights_lambda = params.lam
    coded = aggregate(tucker_apply(state.b, dictionaries), state.layout)
    data = mode_product(_effective_observation(state, y), state.a.T, 3)
    return state.weights * (params.lam * coded + data)


def _gram(codes: np.ndarray, dictionaries: DictionarySet, lam: float, beta: float) -> np.ndarray:
    """``(beta*I + lam*T^T T) codes`` with ``T`` the Tucker synthesis operator."""
    synthesized = tucker_apply(codes, dictionaries)
    return beta * codes + lam * tucker_apply(synthesized, dictionaries, adjoint=True)


def _ista_chunk(
    codes: np.ndarray,
    target: np.ndarray,
    dictionaries: DictionarySet,
    lam: float,
    beta: float,
    step: float,
    threshold: float,
    inner_iters: int,
) -> np.ndarray:
    for _ in range(inner_iters):
        gradient = _gram(codes, dictionaries, lam, beta) - target
        codes = soft_threshold(codes - step * gradient, threshold)
    return codes


def b_update(
    state: RciState,
    params: StageParams,
    inner_iters: int,
    lipschitz: Optional[float] = None,
    pool: Optional[PatchWorkerPool] = None,
) -> np.ndarray:
    """ISTA on the per-patch code subproblem

    ``lam/2 ||R_i G - T B_i||^2 + lam*gamma1 ||B_i||_1 + beta/2 ||B_i - L_i - P_i/beta||^2``.

    The smooth part has gradient ``(beta*I + lam*T^T T) B_i - theta_i`` with
    ``theta_i = lam * T^T R_i G + beta * L_i + P_i``.
    """
    l = params.lipschitz if lipschitz is None else lipschitz
    if not l > 0:
        raise ParamError(f"Lipschitz constant must be > 0, got {l}")
    if inner_iters < 1:
        raise ParamError(f"inner_iters must be >= 1, got {inner_iters}")
    dictionaries = _stage_dictionaries(state, params)

    analysed = tucker_apply(extract(state.g, state.layout), dictionaries, adjoint=True)
    target = params.lam * analysed + params.beta * state.l_aux + state.p
    # Pack codes and targets so one chunk carries both
    stacked = np.stack([state.b, target], axis=1)

    def run_chunk(chunk: np.ndarray) -> np.ndarray:
        return _ista_chunk(
            chunk[:, 0],
            chunk[:, 1],
            dictionaries,
            params.lam,
            params.beta,
            1.0 / l,
            params.lam * params.gamma1 / l,
            inner_iters,
        )

    pool = pool or PatchWorkerPool(1)
    return pool.map_chunks(run_chunk, stacked)


def l_update(
    state: RciState, params: StageParams, pool: Optional[PatchWorkerPool] = None
) -> np.ndarray:
    if not params.beta > 0:
        raise ParamError(f"beta must be > 0, got {params.beta}")
    shifted = state.b - state.p / params.beta
    tau = params.lam * params.gamma2 / params.beta
    if tau == 0.0:
        return shifted
    pool = pool or PatchWorkerPool(1)
    return pool.map_chunks(tensor_svt, shifted, tau=tau, tnn=state.tnn)


def a_update(state: RciState, y: Cube) -> Matrix:
    """Procrustes step ``A = U V^T`` from the SVD of ``unfold(y, 3) unfold(G, 3)^T``.

    STAR-S uses ``y - S`` unless ``a_block_source`` is ``"observed"``. A zero
    cross-product leaves ``A`` unchanged and is counted on the state.
    """
    source = y
    if state.s is not None and state.a_block_source == "residual":
        source = y - state.s
    cross = unfold(source, 3) @ unfold(state.g, 3).T
    if fro_norm(cross) == 0.0:
        state.degenerate_a_updates += 1
        logger.warning("Degenerate A-update (zero cross-product); keeping previous basis")
        return state.a
    result = svd(cross)
    return result.u @ result.v.T


def p_update(state: RciState, params: StageParams) -> np.ndarray:
    return state.p + params.beta * (state.l_aux - state.b)


def s_update(state: RciState, y: Cube, params: StageParams) -> Cube:
    if state.s is None:
        raise ModeError("the S-block only exists in the star_s model")
    return soft_threshold(y - state.reconstruction(), params.mu)


def objective_value(state: RciState, y: Cube, params: StageParams) -> float:
    """STAR / STAR-S objective with ``L_i`` standing in for ``B_i`` in the nuclear term."""
    dictionaries = _stage_dictionaries(state, params)
    residual = y - state.reconstruction()
    value = 0.0
    if state.s is not None:
        residual = residual - state.s
        value += params.mu * float(np.sum(np.abs(state.s)))
    value += 0.5 * fro_norm(residual) ** 2

    fit = extract(state.g, state.layout) - tucker_apply(state.b, dictionaries)
    prior = 0.5 * fro_norm(fit) ** 2 + params.gamma1 * float(np.sum(np.abs(state.b)))
    if params.gamma2 != 0.0:
        prior += params.gamma2 * nuclear_norm(state.l_aux, state.tnn)
    return value + params.lam * prior


def reconstruction_loss(x_hat: Cube, x_ref: Cube) -> float:
    if x_hat.shape != x_ref.shape:
        raise DimsError(f"dims mismatch: {x_hat.shape} vs {x_ref.shape}")
    return fro_norm(x_hat - x_ref) ** 2


def estimate_lipschitz(
    params: StageParams, dictionaries: DictionarySet, seed: int = LIPSCHITZ_SEED
) -> float:
    """Safety-factored norm of ``beta*I + lam*T^T T``, floored away from zero."""

    def gram(x):
        return _gram(x, dictionaries, params.lam, params.beta)

    norm = spectral_norm(gram, gram, dictionaries.atom_dims, POWER_ITERS, seed)
    return max(norm, LIPSCHITZ_FLOOR)


def primal_residual(state: RciState) -> float:
    return fro_norm(state.l_aux - state.b)


def _check_finite(value: np.ndarray, block: str, stage: int):
    if not np.all(np.isfinite(value)):
        raise NumericError(f"non-finite values in the {block}-block at stage {stage}", stage=stage)


def run_stage(
    state: RciState,
    y: Cube,
    params: StageParams,
    inner_iters: int,
    lipschitz: float,
    pool: PatchWorkerPool,
    stage: int,
):
    """One ADMM sweep, updating ``state`` in place."""
    state.g = g_update(state, y, params)
    _check_finite(state.g, "G", stage)
    if state.s is not None:
        state.s = s_update(state, y, params)
        _check_finite(state.s, "S", stage)
    state.b = b_update(state, params, inner_iters, lipschitz, pool)
    _check_finite(state.b, "B", stage)
    state.l_aux = l_update(state, params, pool)
    _check_finite(state.l_aux, "L", stage)
    state.a = a_update(state, y)
    _check_finite(state.a, "A", stage)
    state.p = p_update(state, params)
    _check_finite(state.p, "P", stage)


def run(
    y: Cube,
    schedule: Schedule,
    mode: str = "classical",
    opts: Optional[SolverOptions] = None,
) -> Tuple[Cube, SolveReport]:
    """Denoise ``y``; returns ``G x3 A`` and the solve report."""
    opts = opts or SolverOptions()
    if mode not in ("classical", "unrolled"):
        raise ParamError(f"mode must be classical or unrolled, got {mode!r}")
    y = as_cube(y)
    rank = opts.rank if opts.rank is not None else min(DEFAULT_RANK, y.shape[2])

    started = time.perf_counter()
    state = init_state(
        y,
        rank,
        patch=opts.patch,
        stride=opts.stride,
        model=schedule.model,
        tnn=opts.tnn,
        a_block_source=opts.a_block_source,
    )
    report = SolveReport(model=schedule.model, mode=mode)
    logger.info(
        f"Solving {schedule.model} ({mode}) on {y.shape} with rank {rank}, "
        f"{state.n_patches} patches, {opts.threads} thread(s)"
    )

    with PatchWorkerPool(opts.threads) as pool:
        if mode == "unrolled":
            _run_unrolled(state, y, schedule, opts, pool, report)
        else:
            _run_classical(state, y, schedule.stages[0], opts, pool, report)

    x = state.reconstruction()
    report.degenerate_a_updates = state.degenerate_a_updates
    report.wall_ms = (time.perf_counter() - started) * 1000.0
    logger.info(
        f"Finished after {report.iterations} iteration(s) ({report.stopped_by}) "
        f"in {report.wall_ms:.0f} ms"
    )
    return x, report


def _record(state, y, params, opts, report):
    report.iterations += 1
    report.residuals.append(primal_residual(state))
    if opts.track_objective:
        report.objective.append(objective_value(state, y, params))


def _run_unrolled(state, y, schedule, opts, pool, report):
    for index, params in enumerate(schedule.stages):
        run_stage(state, y, params, UNROLLED_INNER_ITERS, params.lipschitz, pool, index)
        report.lipschitz.append(params.lipschitz)
        _record(state, y, params, opts, report)
        logger.debug(f"Stage {index}: residual {report.residuals[-1]:.3e}")
    report.stopped_by = "stages"


def _run_classical(state, y, params, opts, pool, report):
    if opts.estimate_lipschitz:
        lipschitz = estimate_lipschitz(params, _stage_dictionaries(state, params))
    else:
        lipschitz = params.lipschitz
    report.lipschitz.append(lipschitz)

    report.stopped_by = "max_iters"
    for index in range(opts.max_iters):
        previous = state.l_aux
        run_stage(state, y, params, opts.inner_iters, lipschitz, pool, index)
        _record(state, y, params, opts, report)
        report.dual_residuals.append(params.beta * fro_norm(state.l_aux - previous))
        scale = max(1.0, fro_norm(state.b))
        primal, dual = report.residuals[-1] / scale, report.dual_residuals[-1] / scale
        logger.debug(f"Iteration {index}: relative residuals {primal:.3e} (primal), {dual:.3e} (dual)")
        if primal < opts.tol and dual < opts.tol:
            report.stopped_by = "tol"
            break
    if report.stopped_by == "max_iters":
        logger.warning(f"Classical solve hit max_iters={opts.max_iters} before tol={opts.tol}")
