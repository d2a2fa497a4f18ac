"""
Midrise alphabets and the memoryless scalar quantizer (MSQ)
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config.settings import QUANTIZER_CONFIG
from ..utils.exceptions import InvalidParameterError


@dataclass(frozen=True, eq=False)
class Alphabet:
    """Uniform midrise level set, symmetric about 0 with an even number of levels"""
    levels: np.ndarray
    spacing: float
    bits: Optional[int] = None

    def __post_init__(self):
        levels = np.array(self.levels, dtype=float)
        if levels.ndim != 1 or levels.size < 2 or levels.size % 2:
            raise InvalidParameterError(f"midrise alphabet needs an even number (>= 2) of levels, got {levels.size}")
        if np.any(np.diff(levels) <= 0):
            raise InvalidParameterError("alphabet levels must be strictly increasing")
        if not np.array_equal(levels, -levels[::-1]):
            raise InvalidParameterError("alphabet levels must be symmetric about 0")
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    @property
    def K(self) -> int:
        return self.levels.size // 2

    @property
    def size(self) -> int:
        return self.levels.size

    def contains(self, values) -> np.ndarray:
        """Exact membership test, entry-wise"""
        return np.isin(np.asarray(values, dtype=float), self.levels)


def _mirrored(upper: np.ndarray, spacing: float, bits: Optional[int] = None) -> Alphabet:
    # Build the positive half and mirror it so the level set is exactly its own negation
    return Alphabet(levels=np.concatenate([-upper[::-1], upper]), spacing=spacing, bits=bits)


def make_alphabet_B(B: int) -> Alphabet:
    """A_B = {-1 + 2j/(2^B - 1) : j = 0..2^B-1}; endpoints exactly +-1, spacing 2/(2^B - 1)"""
    if not isinstance(B, (int, np.integer)) or B < 1:
        raise InvalidParameterError(f"bit count must be a positive integer, got {B!r}")
    if B > QUANTIZER_CONFIG["max_bits"]:
        raise InvalidParameterError(f"bit count {B} exceeds supported maximum {QUANTIZER_CONFIG['max_bits']}")
    count = 2 ** int(B)
    j = np.arange(count // 2, count)
    upper = -1.0 + 2.0 * j / (count - 1)
    upper[-1] = 1.0
    return _mirrored(upper, spacing=2.0 / (count - 1), bits=int(B))


def make_midrise_alphabet(K: int, delta: float) -> Alphabet:
    """Midrise levels {+-(k - 1/2) delta : 1 <= k <= K}"""
    if K < 1:
        raise InvalidParameterError(f"K must be >= 1, got {K}")
    if not delta > 0:
        raise InvalidParameterError(f"level spacing must be positive, got {delta}")
    upper = (np.arange(1, K + 1) - 0.5) * delta
    return _mirrored(upper, spacing=float(delta))


def msq_vector(z, a: Alphabet) -> np.ndarray:
    """Entry-wise nearest level; equidistant inputs go to the larger level.

    The closed-form bin index only selects candidates; the final choice compares
    |z - p| exactly as an exhaustive argmin would, so both agree bit for bit.
    """
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise InvalidParameterError("MSQ input must be finite")
    flat = z.reshape(-1)
    levels = a.levels
    top = levels.size - 1

    clipped = np.clip(flat, levels[0], levels[-1])
    base = np.floor((clipped - levels[0]) / a.spacing).astype(np.int64)
    candidates = np.clip(base[:, None] + np.arange(-1, 3)[None, :], 0, top)
    distances = np.abs(flat[:, None] - levels[candidates])
    # Scan candidates from the largest so that ties resolve upward
    reversed_pick = np.argmin(distances[:, ::-1], axis=1)
    chosen = candidates[np.arange(flat.size), candidates.shape[1] - 1 - reversed_pick]
    return levels[chosen].reshape(z.shape)


def msq(z: float, a: Alphabet) -> float:
    """Q(z) = argmin_{p in A} |z - p|, ties toward the larger element"""
    return float(msq_vector(np.array([z], dtype=float), a)[0])
