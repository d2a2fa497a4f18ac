"""
Graph signals: random bandlimited draws, mesh height signals and seed streams
"""
import logging
import zlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .point_cloud import PointCloud
from ..spectral.basis import SpectralBasis
from ..utils.exceptions import InvalidParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GraphSignal:
    """Real values over the vertices; `bandwidth_hint` records r for bandlimited draws"""
    values: np.ndarray
    bandwidth_hint: Optional[int] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise InvalidParameterError(f"graph signal must be a vector, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("graph signal contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @property
    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.values))


def trial_seed(master_seed: int, graph_id: str, r: int, bits: int, trial: int) -> np.random.SeedSequence:
    """Seed stream for one trial: SeedSequence([master_seed, crc32(graph_id), r, bits, trial])"""
    graph_key = zlib.crc32(graph_id.encode("utf-8"))
    return np.random.SeedSequence([int(master_seed), graph_key, int(r), int(bits), int(trial)])


def random_bandlimited(basis: SpectralBasis, seed) -> GraphSignal:
    """f = X_r alpha with standard Gaussian alpha, scaled so that ||f||_inf = 1 exactly.

    `seed` is an int or a SeedSequence; a zero draw is retried with an advanced stream.
    """
    if basis.r < 1:
        raise InvalidParameterError("bandlimited signals need r >= 1")

    sequence = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    attempt = 0
    while True:
        rng = np.random.default_rng(sequence if attempt == 0 else sequence.spawn(1)[0])
        alpha = rng.standard_normal(basis.r)
        f = basis.vectors @ alpha
        peak = np.max(np.abs(f))
        if peak > 0:
            break
        attempt += 1
        logger.warning(f"Degenerate bandlimited draw (f = 0); redrawing (attempt {attempt})")

    return GraphSignal(f / peak, bandwidth_hint=basis.r)


def mesh_z_signal(cloud: PointCloud) -> GraphSignal:
    """z-coordinates mapped affinely onto [-1, 1] (min -> -1, max -> +1)"""
    if len(cloud) == 0:
        raise InvalidParameterError("point cloud is empty")
    z = cloud.z
    z_min, z_max = float(z.min()), float(z.max())
    if z_max == z_min:
        raise InvalidParameterError("z-coordinate is constant; cannot build a halftoning signal")
    return GraphSignal(2.0 * (z - z_min) / (z_max - z_min) - 1.0)


def to_unit_interval(values) -> np.ndarray:
    """Map [-1, 1] back to [0, 1] for display"""
    return (np.asarray(getattr(values, "values", values), dtype=float) + 1.0) / 2.0
