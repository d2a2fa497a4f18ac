"""
Error functionals and theoretical bound curves for graph signal quantization
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, NamedTuple, Optional

import numpy as np

from ..quantization.quantizer import make_alphabet_B
from ..spectral.basis import SpectralBasis, _as_vector, incoherence
from .exceptions import InvalidParameterError

logger = logging.getLogger(__name__)


class BoundCurves(NamedTuple):
    """Bound expressions with the absolute constant taken as 1"""
    thm31: float
    eq5: float
    eq6: float


@dataclass(frozen=True)
class ErrorReport:
    """Filtered error of one quantization with the bound values for its (N, r, B, mu)"""
    qe: float
    relative: float
    bound_explicit: float
    bound_thm31: float
    bound_eq5: float
    bound_eq6: float

    @property
    def within_explicit_bound(self) -> bool:
        return self.qe <= self.bound_explicit

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def _difference(basis: SpectralBasis, f, q) -> np.ndarray:
    f = np.asarray(getattr(f, "values", f), dtype=float)
    q = np.asarray(getattr(q, "values", q), dtype=float)
    if f.shape != q.shape:
        raise InvalidParameterError(f"dimension mismatch: f has shape {f.shape}, q has shape {q.shape}")
    return _as_vector(f - q, basis.n)


def qe_filtered(basis: SpectralBasis, f, q) -> float:
    """||L_r (f - q)||_2, evaluated as ||X_r^T (f - q)||_2"""
    return float(np.linalg.norm(basis.vectors.T @ _difference(basis, f, q)))


def qe_filtered_direct(basis: SpectralBasis, f, q) -> float:
    """||L_r (f - q)||_2 with L_r (f - q) formed explicitly"""
    d = _difference(basis, f, q)
    return float(np.linalg.norm(basis.vectors @ (basis.vectors.T @ d)))


def relative_error(basis: SpectralBasis, f, q) -> float:
    """||L_r (f - q)||_2 / ||f||_2"""
    norm = float(np.linalg.norm(np.asarray(getattr(f, "values", f), dtype=float)))
    if norm == 0:
        raise InvalidParameterError("relative error undefined for the zero signal")
    return qe_filtered(basis, f, q) / norm


def bound_curves(N: int, r: int, B: int, mu: float) -> BoundCurves:
    """thm31 = mu r 2^-B / sqrt(N); eq5 = mu r ln r / sqrt(N ln N); eq6 = mu r / (sqrt(N) ln N)"""
    if not (N > r >= 1):
        raise InvalidParameterError(f"bound curves need N > r >= 1, got N={N}, r={r}")
    if B < 1:
        raise InvalidParameterError(f"bit count must be >= 1, got {B}")
    if mu < 1 - 1e-9:
        raise InvalidParameterError(f"incoherence is at least 1, got {mu}")

    sqrt_n = math.sqrt(N)
    log_n = math.log(N)
    thm31 = mu * r * 2.0 ** (-B) / sqrt_n
    if r < 2:
        logger.warning(f"log-r curve degenerate for r={r}; reported as 0")
        eq5 = 0.0
    else:
        eq5 = mu * r * math.log(r) / math.sqrt(N * log_n)
    eq6 = mu * r / (sqrt_n * log_n)
    return BoundCurves(thm31=thm31, eq5=eq5, eq6=eq6)


def explicit_bound(r: int, B: int) -> float:
    """sqrt(r) * Delta_B / 2: sqrt(r)/(2^B - 1) for B >= 2, sqrt(r) for B = 1"""
    return math.sqrt(r) * make_alphabet_B(B).spacing / 2.0


def norm_lower_bound(N: int, r: int, mu: float) -> float:
    """sqrt(N/r) / mu, a lower bound on ||f||_2 for bandlimited f with ||f||_inf = 1"""
    return math.sqrt(N / r) / mu


def error_report(basis: SpectralBasis, f, q, B: int, mu: Optional[float] = None) -> ErrorReport:
    mu = incoherence(basis) if mu is None else float(mu)
    qe = qe_filtered(basis, f, q)
    curves = bound_curves(basis.n, basis.r, B, mu)
    return ErrorReport(
        qe=qe,
        relative=relative_error(basis, f, q),
        bound_explicit=explicit_bound(basis.r, B),
        bound_thm31=curves.thm31,
        bound_eq5=curves.eq5,
        bound_eq6=curves.eq6,
    )
