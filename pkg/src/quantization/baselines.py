"""
Comparison quantizers: direct MSQ and the sequential noise shaper behind the
SSS-R (sketch) and SDW baselines.

The sequential engine is a first-order noise shaper: a scalar state u carries the
accumulated quantization error, q_t = msq(f_i + beta u) and u <- u + f_i - q_t.
Entries visited several times are averaged, which yields values in the augmented
alphabet of visit-count averages.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from config.settings import SSNS_CONFIG, SSSR_CONFIG
from .quantizer import make_alphabet_B, msq, msq_vector
from ..spectral.basis import SpectralBasis
from ..utils.exceptions import InvalidParameterError, UnsupportedConfigurationError

logger = logging.getLogger(__name__)

SSSR_LABEL = "SSS-R (sketch)"
SDW_LABEL = "SDW"

SeedLike = Union[None, int, np.random.SeedSequence]


@dataclass(frozen=True, eq=False)
class AugmentedQuantization:
    """Visit-averaged quantization: values[i] is the mean of the levels emitted at vertex i"""
    values: np.ndarray
    visits: np.ndarray
    M: int
    method: str = SSSR_LABEL

    @property
    def distinct_values(self) -> int:
        return int(np.unique(self.values).size)


def _signal_values(f) -> np.ndarray:
    values = np.asarray(getattr(f, "values", f), dtype=float)
    if values.ndim != 1:
        raise InvalidParameterError(f"signal must be a vector, got shape {values.shape}")
    if values.size and np.max(np.abs(values)) > 1.0 + SSNS_CONFIG["norm_tolerance"]:
        raise InvalidParameterError(f"signal must satisfy ||f||_inf <= 1, got {np.max(np.abs(values))!r}")
    return values


def msq_direct(f, B: int) -> np.ndarray:
    """Entry-wise MSQ onto A_B without preprocessing"""
    return msq_vector(_signal_values(f), make_alphabet_B(B))


def default_sample_count(n: int) -> int:
    """M = ceil(N ln N), never below N"""
    return max(n, int(math.ceil(n * math.log(n)))) if n > 1 else n


def _noise_shape(values: np.ndarray, basis: SpectralBasis, B: int, order: np.ndarray,
                 beta: float, method: str) -> AugmentedQuantization:
    n = values.size
    if basis.n != n:
        raise InvalidParameterError(f"signal length {n} does not match basis size {basis.n}")

    alphabet = make_alphabet_B(B)
    visits = np.bincount(order, minlength=n)

    totals = np.zeros(n)
    # Unvisited vertices keep their plain MSQ value
    unvisited = visits == 0
    totals[unvisited] = msq_vector(values[unvisited], alphabet)

    state = 0.0
    for i in order:
        level = msq(values[i] + beta * state, alphabet)
        totals[i] += level
        state += values[i] - level

    averaged = np.where(unvisited, totals, totals / np.maximum(visits, 1))
    logger.debug(f"{method}: M={order.size}, visited={int(np.count_nonzero(~unvisited))}/{n}, "
                 f"final state={state:.3e}")
    return AugmentedQuantization(values=averaged, visits=visits, M=int(order.size), method=method)


def sssr_quantize(f, basis: SpectralBasis, B: int, M: Optional[int] = None, seed: SeedLike = None,
                  round_robin: bool = False, beta: float = SSSR_CONFIG["beta"]) -> AugmentedQuantization:
    """SSS-R (sketch): M vertices drawn uniformly with replacement, greedily noise shaped.

    `round_robin=True` visits vertices in index order instead (deterministic test mode).
    """
    if B == 1:
        raise UnsupportedConfigurationError("SSS-R is not available for 1-bit quantization (B=1)")
    values = _signal_values(f)
    n = values.size
    M = default_sample_count(n) if M is None else int(M)
    if M < n:
        raise InvalidParameterError(f"sample count M={M} must be at least N={n}")

    if round_robin:
        order = np.arange(M) % n
    else:
        rng = np.random.default_rng(seed)
        order = rng.integers(0, n, size=M)
    return _noise_shape(values, basis, B, order, float(beta), SSSR_LABEL)


def sdw_quantize(f, basis: SpectralBasis, B: int, beta: float = SSSR_CONFIG["beta"]) -> AugmentedQuantization:
    """SDW: one round-robin noise-shaping sweep (M = N); 1-bit output allowed"""
    values = _signal_values(f)
    return _noise_shape(values, basis, B, np.arange(values.size), float(beta), SDW_LABEL)
