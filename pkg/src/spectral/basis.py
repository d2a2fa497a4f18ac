"""
Eigendecomposition of the normalized Laplacian, GFT, brick-wall filtering and
the geometric diagnostics (incoherence, data complexity) of the retained subspace
"""
import itertools
import logging
from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.linalg

from config.settings import SPECTRAL_CONFIG
from ..utils.exceptions import InvalidParameterError, ProblemSizeError, SpectralError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Eigenpairs (lambda_i, x_i) sorted non-decreasingly; `vectors` is N x r"""
    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def r(self) -> int:
        return self.vectors.shape[1]

    @property
    def is_complete(self) -> bool:
        return self.r == self.n

    def truncate(self, r: int) -> "SpectralBasis":
        """First r columns, i.e. the basis of X_r"""
        if not 1 <= r <= self.r:
            raise InvalidParameterError(f"cannot truncate a basis with {self.r} columns to r={r}")
        return SpectralBasis(self.eigenvalues[:r], self.vectors[:, :r])


def _normalize_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive (first index on ties)"""
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _order_clusters(eigenvalues: np.ndarray, vectors: np.ndarray, gap: float) -> np.ndarray:
    """Column permutation: ascending eigenvalue, lexicographic coefficients inside repeated clusters"""
    order = []
    start = 0
    m = eigenvalues.size
    while start < m:
        stop = start + 1
        while stop < m and eigenvalues[stop] - eigenvalues[stop - 1] < gap:
            stop += 1
        cluster = list(range(start, stop))
        if len(cluster) > 1:
            cluster.sort(key=lambda j: tuple(vectors[:, j]))
        order.extend(cluster)
        start = stop
    return np.array(order, dtype=int)


def eig_smallest(L: np.ndarray, r: int) -> SpectralBasis:
    """The r smallest eigenpairs of a symmetric matrix under a deterministic order and sign convention.

    Uses the dense symmetric LAPACK solver on the full spectrum so that eigenvalue
    clusters straddling position r are ordered consistently.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {L.shape}")
    n = L.shape[0]
    if not 1 <= r <= n:
        raise InvalidParameterError(f"bandwidth r must satisfy 1 <= r <= {n}, got {r}")
    asymmetry = np.max(np.abs(L - L.T)) if n else 0.0
    if asymmetry > SPECTRAL_CONFIG["symmetry_tolerance"]:
        raise SpectralError(f"matrix is not symmetric (max |L - L^T| = {asymmetry:.3e})")

    logger.debug(f"Dense eigendecomposition of a {n}x{n} matrix (keeping r={r})")
    try:
        eigenvalues, vectors = scipy.linalg.eigh(L)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise SpectralError(f"eigensolver failed: {e}") from e

    vectors = _normalize_signs(vectors)
    order = _order_clusters(eigenvalues, vectors, SPECTRAL_CONFIG["cluster_gap"])
    eigenvalues = eigenvalues[order][:r].copy()
    vectors = vectors[:, order][:, :r].copy()

    residual = np.linalg.norm(L @ vectors - vectors * eigenvalues, axis=0).max()
    if residual > SPECTRAL_CONFIG["residual_tolerance"]:
        raise SpectralError(f"eigenpair residual {residual:.3e} exceeds tolerance")
    gram_error = np.max(np.abs(vectors.T @ vectors - np.eye(r)))
    if gram_error > SPECTRAL_CONFIG["orthonormality_tolerance"]:
        raise SpectralError(f"eigenvectors not orthonormal (max deviation {gram_error:.3e})")

    eigenvalues.setflags(write=False)
    vectors.setflags(write=False)
    return SpectralBasis(eigenvalues, vectors)


def _as_vector(values, n: int) -> np.ndarray:
    v = np.asarray(getattr(values, "values", values), dtype=float)
    if v.ndim != 1 or v.size != n:
        raise InvalidParameterError(f"expected a vector of length {n}, got shape {v.shape}")
    return v


def gft(basis: SpectralBasis, f) -> np.ndarray:
    """Graph Fourier coefficients X^T f"""
    return basis.vectors.T @ _as_vector(f, basis.n)


def igft(basis: SpectralBasis, coefficients) -> np.ndarray:
    """Inverse transform X c"""
    c = _as_vector(coefficients, basis.r)
    return basis.vectors @ c


def brickwall_apply(basis: SpectralBasis, v) -> np.ndarray:
    """Brick-wall filter L_r v = X_r (X_r^T v)"""
    v = _as_vector(v, basis.n)
    return basis.vectors @ (basis.vectors.T @ v)


def norm_2inf(basis: SpectralBasis) -> float:
    """Largest row l2 norm of X_r"""
    return float(np.max(np.linalg.norm(basis.vectors, axis=1)))


def incoherence(basis: SpectralBasis) -> float:
    """mu(X_r) = (N/r) max_i ||P e_i||^2, with ||P e_i|| the i-th row norm of X_r"""
    row_norms_sq = np.einsum("ij,ij->i", basis.vectors, basis.vectors)
    return float(basis.n / basis.r * row_norms_sq.max())


def spectral_norm_bound(basis: SpectralBasis) -> float:
    """||X_r||, an upper bound for the data complexity parameter"""
    return float(np.linalg.norm(basis.vectors, 2))


def gamma_complexity(basis: SpectralBasis) -> float:
    """Gamma(X_r): largest spectral norm over all r x r row-submatrices of X_r (exhaustive)"""
    n, r = basis.n, basis.r
    if n > SPECTRAL_CONFIG["gamma_max_n"] or r > SPECTRAL_CONFIG["gamma_max_r"]:
        raise ProblemSizeError(
            f"exhaustive Gamma limited to N <= {SPECTRAL_CONFIG['gamma_max_n']} and "
            f"r <= {SPECTRAL_CONFIG['gamma_max_r']} (got N={n}, r={r}); "
            f"use the bound Gamma <= ||X_r|| = {spectral_norm_bound(basis):.6g} instead"
        )
    logger.debug(f"Enumerating {comb(n, r)} subsets for Gamma")
    best = 0.0
    for subset in itertools.combinations(range(n), r):
        best = max(best, float(np.linalg.norm(basis.vectors[list(subset), :], 2)))
    return best
