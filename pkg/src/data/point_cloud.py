"""
Point clouds for k-NN graph construction: swiss-roll sampling and text/PLY loaders
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from config.settings import GRAPH_CONFIG
from ..utils.exceptions import GraphParseError, InvalidParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Ordered 3D positions; vertex i of a derived graph is points[i]"""
    points: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3:
            raise InvalidParameterError(f"point cloud must have shape (n, 3), got {points.shape}")
        if not np.all(np.isfinite(points)):
            raise InvalidParameterError("point cloud contains non-finite coordinates")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def z(self) -> np.ndarray:
        return self.points[:, 2]


def make_swiss_roll(n: int = GRAPH_CONFIG["swiss_roll"]["n"],
                    seed: int = GRAPH_CONFIG["swiss_roll"]["seed"]) -> PointCloud:
    """Sample (t cos t, y, t sin t) with t ~ U[1.5 pi, 4.5 pi] and y ~ U[0, 20]"""
    if n < 1:
        raise InvalidParameterError(f"swiss roll needs n >= 1, got {n}")
    roll_config = GRAPH_CONFIG["swiss_roll"]
    t_low, t_high = roll_config["t_range"]
    rng = np.random.default_rng(seed)
    t = np.pi * rng.uniform(t_low, t_high, size=n)
    y = rng.uniform(0.0, roll_config["height"], size=n)
    return PointCloud(np.column_stack([t * np.cos(t), y, t * np.sin(t)]))


def load_point_cloud(path: Union[str, Path]) -> PointCloud:
    """Load whitespace "x y z" lines or an ASCII PLY file (faces are ignored)"""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise GraphParseError(f"cannot read point cloud: {e}", path=path) from e

    first = next((line.strip() for line in lines if line.strip()), "")
    if first == "ply":
        points = _parse_ply(lines, path)
    else:
        points = _parse_xyz(lines, path)

    if not points:
        raise GraphParseError("no vertices found", path=path)
    cloud = PointCloud(np.asarray(points, dtype=float))
    logger.info(f"Loaded {len(cloud)} points from {path}")
    return cloud


def _parse_xyz(lines: List[str], path: Path) -> List[Tuple[float, float, float]]:
    points = []
    for line_number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) < 3:
            raise GraphParseError(f"expected 'x y z', got {raw!r}", path=path, line_number=line_number)
        try:
            points.append((float(fields[0]), float(fields[1]), float(fields[2])))
        except ValueError:
            raise GraphParseError(f"non-numeric coordinate in {raw!r}", path=path,
                                  line_number=line_number) from None
    return points


def _parse_ply(lines: List[str], path: Path) -> List[Tuple[float, float, float]]:
    elements = []  # [name, count, property names]
    header_end = None
    for line_number, raw in enumerate(lines, start=1):
        fields = raw.split()
        if not fields:
            continue
        keyword = fields[0]
        if keyword == "format":
            if len(fields) < 2 or fields[1] != "ascii":
                raise GraphParseError("only ASCII PLY files are supported", path=path,
                                      line_number=line_number)
        elif keyword == "element":
            try:
                elements.append([fields[1], int(fields[2]), []])
            except (IndexError, ValueError):
                raise GraphParseError(f"malformed element line {raw!r}", path=path,
                                      line_number=line_number) from None
        elif keyword == "property":
            if not elements:
                raise GraphParseError("property before any element", path=path, line_number=line_number)
            elements[-1][2].append(fields[-1])
        elif keyword == "end_header":
            header_end = line_number
            break

    if header_end is None:
        raise GraphParseError("PLY header has no end_header", path=path)

    line_number = header_end
    points = []
    for name, count, properties in elements:
        if name != "vertex":
            line_number += count
            continue
        try:
            columns = [properties.index(axis) for axis in ("x", "y", "z")]
        except ValueError:
            raise GraphParseError("vertex element lacks x, y, z properties", path=path) from None
        for _ in range(count):
            line_number += 1
            if line_number > len(lines):
                raise GraphParseError("file ends before all vertices were read", path=path,
                                      line_number=line_number)
            fields = lines[line_number - 1].split()
            try:
                points.append(tuple(float(fields[c]) for c in columns))
            except (IndexError, ValueError):
                raise GraphParseError(f"malformed vertex line {lines[line_number - 1]!r}",
                                      path=path, line_number=line_number) from None
        break
    return points
