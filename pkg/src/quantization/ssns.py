"""
Single-shot noise shaping (SSNS).

Preprocessing walks z inside the l_inf ball of radius c along directions of the
restricted kernel ker_J(X) = {b : Xb = 0, b_i = 0 for i in J} until all but at
most r coordinates sit on the boundary. Two engines are provided:

- reference: one (r+1)-column null vector per boundary hit, O(r^3 N) overall
- fast: blocks of 2r free columns, one null-space factorization per block whose
  vectors are recycled by rank-one elimination after every hit, O(r^2 N) overall

`ssns_quantize` chains eigendecomposition, preprocessing and MSQ.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, NamedTuple, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from config.settings import SSNS_CONFIG
from .quantizer import Alphabet, make_alphabet_B, msq_vector
from ..spectral.basis import SpectralBasis, brickwall_apply, eig_smallest
from ..utils.exceptions import InvalidParameterError, PreprocessingError

logger = logging.getLogger(__name__)

StepHook = Callable[[int, int, float], None]


class Engine(Enum):
    """Preprocessing implementations"""
    REFERENCE = "reference"
    FAST = "fast"


@dataclass(frozen=True, eq=False)
class PreprocessResult:
    """Output of the kernel walk: f_hat, the saturated set J and diagnostics"""
    reshaped: np.ndarray
    saturated: np.ndarray
    iterations: int
    spectral_residual: float
    c: float
    steps: int
    engine: Engine

    @property
    def unsaturated(self) -> np.ndarray:
        mask = np.ones(self.reshaped.size, dtype=bool)
        mask[self.saturated] = False
        return np.flatnonzero(mask)


@dataclass(frozen=True, eq=False)
class KernelDirection:
    """Unit vector b in ker_J(X)"""
    vector: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.vector)


class BoundaryStep(NamedTuple):
    alpha: float
    hit: np.ndarray
    z: np.ndarray


@dataclass(frozen=True, eq=False)
class SSNSResult:
    """q in A_B^N, its filtered representative fq = L_r q and the preprocessing record"""
    q: np.ndarray
    fq: np.ndarray
    preprocess: PreprocessResult
    alphabet: Alphabet
    basis: SpectralBasis

    @property
    def reshaped(self) -> np.ndarray:
        return self.preprocess.reshaped


def _saturation_tolerance(c: float) -> float:
    return SSNS_CONFIG["saturation_tolerance"] * c


def _validate_inputs(X, z0, c: float) -> Tuple[np.ndarray, np.ndarray, float]:
    X = np.asarray(X, dtype=float)
    z0 = np.asarray(getattr(z0, "values", z0), dtype=float)
    if X.ndim != 2:
        raise InvalidParameterError(f"X must be an r x N matrix, got shape {X.shape}")
    r, n = X.shape
    if z0.ndim != 1 or z0.size != n:
        raise InvalidParameterError(f"z0 must have length {n}, got shape {z0.shape}")
    if not 1 <= r < n:
        raise InvalidParameterError(f"preprocessing needs 1 <= r < N, got r={r}, N={n}")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(z0)):
        raise InvalidParameterError("X and z0 must be finite")
    c = float(c)
    sup = float(np.max(np.abs(z0)))
    if not c > 0 or c < sup:
        raise InvalidParameterError(f"bound c={c} must be positive and at least ||z0||_inf={sup}")
    return X, z0, c


def _initial_state(X: np.ndarray, z0: np.ndarray, c: float) -> Tuple[np.ndarray, np.ndarray]:
    """Push coordinates of zero columns to +c (b_i = c - z0_i) and mark boundary coordinates"""
    z = z0.copy()
    tol = SSNS_CONFIG["zero_column_tolerance"]
    zero_columns = np.max(np.abs(X), axis=0) <= tol
    z[zero_columns] = c
    saturated = np.abs(z) >= c - _saturation_tolerance(c)
    z[saturated] = np.sign(z[saturated]) * c
    return z, saturated


def _null_vector(columns: np.ndarray) -> np.ndarray:
    """Unit null vector of an r x m matrix via full QR of its transpose"""
    q, _ = scipy.linalg.qr(columns.T)
    b = q[:, -1]
    residual = np.linalg.norm(columns @ b)
    if residual > SSNS_CONFIG["kernel_residual_tolerance"]:
        raise PreprocessingError(
            f"restricted kernel is trivial: {columns.shape[0]}x{columns.shape[1]} block has full column rank "
            f"(residual {residual:.3e})"
        )
    return b


def kernel_vector(X, J, active) -> KernelDirection:
    """Unit b in ker_J(X) supported on `active` (normally the r+1 lowest free columns)"""
    X = np.asarray(X, dtype=float)
    active = np.asarray(active, dtype=int)
    J = np.asarray(J, dtype=int)
    if active.size == 0:
        raise InvalidParameterError("active column set is empty")
    if np.intersect1d(active, J).size:
        raise InvalidParameterError("active columns must be disjoint from the saturated set J")
    vector = np.zeros(X.shape[1])
    vector[active] = _null_vector(X[:, active])
    return KernelDirection(vector)


def step_to_boundary(z, b, c: float) -> BoundaryStep:
    """Smallest alpha > 0 with ||z + alpha b||_inf = c; coordinates reaching +-c are snapped exactly"""
    z = np.asarray(z, dtype=float)
    b = np.asarray(getattr(b, "vector", b), dtype=float)
    support = np.flatnonzero(b)
    if support.size == 0:
        raise PreprocessingError("kernel direction is zero")

    b_s = b[support]
    z_s = z[support]
    roots = np.where(b_s > 0, (c - z_s) / b_s, (-c - z_s) / b_s)
    positive = roots > 0
    if not positive.any():
        raise PreprocessingError("no positive step reaches the boundary; z is not strictly inside along b")
    candidates = np.where(positive, roots, np.inf)
    first = int(np.argmin(candidates))
    alpha = float(candidates[first])

    moved = z_s + alpha * b_s
    reached = np.abs(moved) >= c - _saturation_tolerance(c)
    reached[first] = True
    moved[reached] = np.sign(moved[reached]) * c

    z_next = z.copy()
    z_next[support] = moved
    return BoundaryStep(alpha, support[reached], z_next)


def _finalize(X: np.ndarray, z0: np.ndarray, z: np.ndarray, c: float, saturated: np.ndarray,
              iterations: int, steps: int, engine: Engine) -> PreprocessResult:
    r = X.shape[0]
    residual = float(np.linalg.norm(X @ (z - z0)))
    sup = float(np.max(np.abs(z)))
    free = int(np.count_nonzero(~saturated))

    if abs(sup - c) > 1e-10 * c:
        raise PreprocessingError(f"||f_hat||_inf = {sup!r} differs from c = {c!r}")
    if free > r:
        raise PreprocessingError(f"{free} unsaturated coordinates remain (at most r={r} allowed)")
    if residual > 1e-8 * (1.0 + np.linalg.norm(z0)):
        raise PreprocessingError(f"spectral content drifted: ||X(f_hat - z0)|| = {residual:.3e}")

    logger.debug(f"{engine.value} preprocessing done: iterations={iterations}, steps={steps}, "
                 f"|J|={saturated.size - free}, residual={residual:.3e}")
    z.setflags(write=False)
    return PreprocessResult(reshaped=z, saturated=np.flatnonzero(saturated), iterations=iterations,
                            spectral_residual=residual, c=c, steps=steps, engine=engine)


def preprocess_reference(X, z0, c: float, hook: Optional[StepHook] = None) -> PreprocessResult:
    """Kernel walk with one null vector of the r+1 lowest free columns per boundary hit"""
    X, z0, c = _validate_inputs(X, z0, c)
    r, n = X.shape
    z, saturated = _initial_state(X, z0, c)
    n_saturated = int(np.count_nonzero(saturated))

    iterations = 0
    while n - n_saturated > r:
        if iterations >= n:
            raise PreprocessingError(f"iteration cap {n} exceeded with {n - n_saturated} free coordinates")
        active = np.flatnonzero(~saturated)[: r + 1]
        b = _null_vector(X[:, active])
        step = step_to_boundary(z[active], b, c)
        z[active] = step.z
        newly = active[step.hit]
        saturated[newly] = True
        n_saturated += newly.size
        iterations += 1
        if hook is not None:
            hook(iterations, n_saturated, step.alpha)

    return _finalize(X, z0, z, c, saturated, iterations, iterations, Engine.REFERENCE)


def _block_kernel(X: np.ndarray, columns: np.ndarray, size: int, local: np.ndarray) -> np.ndarray:
    """Null-space basis of X[:, columns] embedded at rows `local` of a size-row array; sup-normalized"""
    null = scipy.linalg.null_space(X[:, columns])
    basis = np.zeros((size, null.shape[1]))
    basis[local] = null
    if basis.shape[1]:
        basis /= np.max(np.abs(basis), axis=0)
    return basis


def _recycle(used: np.ndarray, remaining: np.ndarray, hit: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Eliminate each newly saturated coordinate from the unused kernel vectors.

    The first hit uses the vector just walked along as pivot,
    b_j <- b - (b_i / (b_j)_i) b_j; later simultaneous hits pivot on the remaining
    vector with the largest entry there. Vectors already vanishing at i are carried over.
    Returns the updated set and whether it lost numerical independence.
    """
    pivot_tol = SSNS_CONFIG["pivot_tolerance"]
    independence_tol = SSNS_CONFIG["independence_tolerance"]
    vectors = remaining.copy()
    stale = False
    pivot: Optional[np.ndarray] = used

    for i in np.sort(hit):
        if vectors.shape[1] == 0:
            break
        scale = np.max(np.abs(vectors), axis=0)
        if pivot is None:
            j = int(np.argmax(np.abs(vectors[i]) / scale))
            if abs(vectors[i, j]) <= pivot_tol * scale[j]:
                continue
            pivot = vectors[:, j].copy()
            vectors = np.delete(vectors, j, axis=1)
            scale = np.delete(scale, j)

        entries = vectors[i]
        live = np.abs(entries) > pivot_tol * scale
        if live.any():
            ratio = pivot[i] / entries[live]
            updated = pivot[:, None] - vectors[:, live] * ratio[None, :]
            magnitude = np.maximum(np.max(np.abs(pivot)), np.abs(ratio) * scale[live])
            if np.any(np.max(np.abs(updated), axis=0) < independence_tol * magnitude):
                stale = True
            vectors[:, live] = updated
        vectors[i] = 0.0
        pivot = None

    if vectors.shape[1]:
        norms = np.max(np.abs(vectors), axis=0)
        nonzero = norms > 0
        if not nonzero.all():
            stale = True
        vectors = vectors[:, nonzero] / norms[nonzero]
    return vectors, stale


def preprocess_fast(X, z0, c: float, hook: Optional[StepHook] = None) -> PreprocessResult:
    """Block kernel walk: 2r free columns per block, kernel vectors recycled after each hit"""
    X, z0, c = _validate_inputs(X, z0, c)
    r, n = X.shape
    z, saturated = _initial_state(X, z0, c)
    n_saturated = int(np.count_nonzero(saturated))
    residual_tol = SSNS_CONFIG["kernel_residual_tolerance"]

    iterations = 0
    steps = 0
    refreshes = 0
    while n - n_saturated > r:
        if iterations >= n:
            raise PreprocessingError(f"iteration cap {n} exceeded with {n - n_saturated} free coordinates")
        block = np.flatnonzero(~saturated)[: 2 * r]
        X_block = X[:, block]
        local_saturated = np.zeros(block.size, dtype=bool)
        all_local = np.arange(block.size)
        basis = _block_kernel(X, block, block.size, all_local)

        while basis.shape[1] and not local_saturated.all():
            b = basis[:, 0]
            stale = np.linalg.norm(X_block @ b) > residual_tol * np.linalg.norm(b)
            if not stale:
                try:
                    step = step_to_boundary(z[block], b, c)
                except PreprocessingError:
                    stale = True
            if stale:
                free_local = np.flatnonzero(~local_saturated)
                basis = _block_kernel(X, block[free_local], block.size, free_local)
                refreshes += 1
                logger.debug(f"Recomputed kernel basis for block {iterations} ({basis.shape[1]} vectors)")
                continue

            z[block] = step.z
            local_saturated[step.hit] = True
            newly = block[step.hit]
            saturated[newly] = True
            n_saturated += newly.size
            steps += 1
            if hook is not None:
                hook(steps, n_saturated, step.alpha)

            basis, stale = _recycle(b, basis[:, 1:], step.hit)
            basis[local_saturated] = 0.0
            if stale:
                free_local = np.flatnonzero(~local_saturated)
                basis = _block_kernel(X, block[free_local], block.size, free_local)
                refreshes += 1
                logger.debug(f"Recycled vectors lost independence in block {iterations}; refactorized")
        iterations += 1

    if refreshes:
        logger.debug(f"fast preprocessing used {refreshes} kernel refreshes")
    return _finalize(X, z0, z, c, saturated, iterations, steps, Engine.FAST)


_ENGINES: Dict[Engine, Callable[..., PreprocessResult]] = {
    Engine.REFERENCE: preprocess_reference,
    Engine.FAST: preprocess_fast,
}


def preprocess(X, z0, c: float, engine: Union[Engine, str] = SSNS_CONFIG["default_engine"],
               hook: Optional[StepHook] = None) -> PreprocessResult:
    return _ENGINES[Engine(engine)](X, z0, c, hook=hook)


def ssns_quantize(L: Optional[np.ndarray], f, B: int, r: int,
                  engine: Union[Engine, str] = SSNS_CONFIG["default_engine"],
                  basis: Optional[SpectralBasis] = None,
                  hook: Optional[StepHook] = None) -> SSNSResult:
    """B-bit SSNS of f (||f||_inf = 1) at bandwidth r.

    Pass a precomputed `basis` (with at least r columns) to skip the eigendecomposition of L.
    """
    values = np.asarray(getattr(f, "values", f), dtype=float)
    sup = float(np.max(np.abs(values))) if values.size else 0.0
    if abs(sup - 1.0) > SSNS_CONFIG["norm_tolerance"]:
        raise InvalidParameterError(f"SSNS expects ||f||_inf = 1, got {sup!r}; normalize the signal first")

    if basis is None:
        if L is None:
            raise InvalidParameterError("either a Laplacian or a spectral basis is required")
        basis = eig_smallest(L, r)
    elif basis.r < r:
        raise InvalidParameterError(f"basis has {basis.r} columns, bandwidth r={r} requested")
    elif basis.r > r:
        basis = basis.truncate(r)
    if basis.n != values.size:
        raise InvalidParameterError(f"signal length {values.size} does not match basis size {basis.n}")

    result = preprocess(basis.vectors.T, values, 1.0, engine=engine, hook=hook)
    alphabet = make_alphabet_B(B)
    q = msq_vector(result.reshaped, alphabet)
    fq = brickwall_apply(basis, q)
    return SSNSResult(q=q, fq=fq, preprocess=result, alphabet=alphabet, basis=basis)
