"""
Weighted undirected graphs, standard topologies and the normalized Laplacian
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from sklearn.neighbors import NearestNeighbors

from config.settings import GRAPH_CONFIG
from .point_cloud import PointCloud, make_swiss_roll
from ..utils.exceptions import GraphParseError, InvalidParameterError, IsolatedVertexError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph G = (V, E, W) with symmetric nonnegative weights and zero diagonal.

    Build instances with `Graph.from_weights` or the `build_*` functions; both
    enforce exact symmetry, zero the diagonal and freeze the degree vector.
    """
    weights: sparse.csr_matrix
    degrees: np.ndarray
    name: str = "graph"

    @classmethod
    def from_weights(cls, weights, name: str = "graph") -> "Graph":
        W = sparse.csr_matrix(weights, dtype=float)
        if W.shape[0] != W.shape[1]:
            raise InvalidParameterError(f"adjacency must be square, got {W.shape}")
        if W.nnz and not np.all(np.isfinite(W.data)):
            raise InvalidParameterError("adjacency contains non-finite weights")
        if W.nnz and W.data.min() < 0:
            raise InvalidParameterError("negative edge weights are not supported")

        asymmetry = abs(W - W.T)
        if asymmetry.nnz and asymmetry.max() > GRAPH_CONFIG["symmetry_tolerance"]:
            raise InvalidParameterError(f"adjacency is not symmetric (max deviation {asymmetry.max():.3e})")

        # a + b == b + a in floating point, so this is exactly symmetric
        W = ((W + W.T) * 0.5).tocsr()
        W = (W - sparse.diags(W.diagonal())).tocsr()
        W.eliminate_zeros()
        W.sort_indices()

        degrees = np.asarray(W.sum(axis=1)).ravel()
        degrees.setflags(write=False)
        return cls(weights=W, degrees=degrees, name=name)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def edge_count(self) -> int:
        return self.weights.nnz // 2

    def is_connected(self) -> bool:
        n_components, _ = connected_components(self.weights, directed=False)
        return n_components == 1

    def summary(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "n": self.n,
            "edges": self.edge_count,
            "min_degree": float(self.degrees.min()) if self.n else 0.0,
            "max_degree": float(self.degrees.max()) if self.n else 0.0,
            "connected": self.is_connected(),
        }


def _log_construction(graph: Graph) -> Graph:
    info = graph.summary()
    logger.info(f"Built {info['name']}: n={info['n']}, edges={info['edges']}, connected={info['connected']}")
    if not info["connected"]:
        logger.warning(f"{info['name']} is not connected")
    return graph


def _from_edges(n: int, rows: np.ndarray, cols: np.ndarray, values: np.ndarray, name: str) -> Graph:
    W = sparse.coo_matrix((values, (rows, cols)), shape=(n, n)).tocsr()
    W = W.maximum(W.T)
    return Graph.from_weights(W, name=name)


def build_ring(n: int) -> Graph:
    """Cycle graph on n vertices with unit weights"""
    if n < 3:
        raise InvalidParameterError(f"ring graph needs n >= 3, got {n}")
    i = np.arange(n)
    j = (i + 1) % n
    return _log_construction(_from_edges(n, i, j, np.ones(n), name=f"ring-{n}"))


def build_grid(h: int, w: int) -> Graph:
    """4-neighbour lattice with h rows and w columns; vertex (i, j) has index i*w + j"""
    if h < 2 or w < 2:
        raise InvalidParameterError(f"grid graph needs h, w >= 2, got {h}x{w}")
    index = np.arange(h * w).reshape(h, w)
    horizontal = (index[:, :-1].ravel(), index[:, 1:].ravel())
    vertical = (index[:-1, :].ravel(), index[1:, :].ravel())
    rows = np.concatenate([horizontal[0], vertical[0]])
    cols = np.concatenate([horizontal[1], vertical[1]])
    return _log_construction(_from_edges(h * w, rows, cols, np.ones(rows.size), name=f"grid-{h}x{w}"))


def _knn_edges(points: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Directed k-NN edges with Gaussian weights exp(-d^2 / (2 sigma^2))"""
    n = points.shape[0]
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    if k >= n:
        raise InvalidParameterError(f"k must be smaller than the number of points ({n}), got {k}")

    neighbors = NearestNeighbors(n_neighbors=k + 1).fit(points)
    distances, indices = neighbors.kneighbors(points)

    # Drop the query point itself; with duplicate points it may not come first
    is_self = indices == np.arange(n)[:, None]
    no_self = ~is_self.any(axis=1)
    is_self[no_self, -1] = True
    keep = ~is_self
    distances = distances[keep].reshape(n, k)
    indices = indices[keep].reshape(n, k)

    sigma = float(np.mean(distances[:, -1]))
    if sigma > 0:
        values = np.exp(-distances ** 2 / (2.0 * sigma ** 2))
    else:
        values = np.ones_like(distances)
    rows = np.repeat(np.arange(n), k)
    return rows, indices.ravel(), values.ravel()


def build_knn_from_points(cloud: PointCloud, k: int, name: Optional[str] = None) -> Graph:
    """Symmetrized (union) k-NN graph with Gaussian weights"""
    rows, cols, values = _knn_edges(cloud.points, k)
    graph_name = name or f"knn-{len(cloud)}-k{k}"
    return _log_construction(_from_edges(len(cloud), rows, cols, values, name=graph_name))


def build_sensor(n: int = GRAPH_CONFIG["sensor"]["n"],
                 k: int = GRAPH_CONFIG["sensor"]["k"],
                 seed: int = GRAPH_CONFIG["sensor"]["seed"]) -> Graph:
    """Random sensor network: n uniform points in the unit square joined by their k nearest neighbours"""
    if k >= n:
        raise InvalidParameterError(f"sensor graph needs n > k, got n={n}, k={k}")
    rng = np.random.default_rng(seed)
    planar = rng.random((n, 2))
    rows, cols, values = _knn_edges(planar, k)
    return _log_construction(_from_edges(n, rows, cols, values, name=f"sensor-{n}-k{k}-s{seed}"))


def build_swiss_roll_graph(n: int = GRAPH_CONFIG["swiss_roll"]["n"],
                           k: int = GRAPH_CONFIG["swiss_roll"]["k"],
                           seed: int = GRAPH_CONFIG["swiss_roll"]["seed"]) -> Graph:
    return build_knn_from_points(make_swiss_roll(n, seed), k, name=f"swissroll-{n}-k{k}-s{seed}")


def load_edge_list(path: Union[str, Path]) -> Graph:
    """Read "i j [w]" lines (0-based, '#' comments); repeated edges keep the last weight"""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise GraphParseError(f"cannot read edge list: {e}", path=path) from e

    edges: Dict[Tuple[int, int], float] = {}
    n = 0
    for line_number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (2, 3):
            raise GraphParseError(f"expected 'i j [w]', got {raw!r}", path=path, line_number=line_number)
        try:
            i, j = int(fields[0]), int(fields[1])
            weight = float(fields[2]) if len(fields) == 3 else 1.0
        except ValueError:
            raise GraphParseError(f"cannot parse {raw!r}", path=path, line_number=line_number) from None
        if i < 0 or j < 0:
            raise GraphParseError(f"negative vertex index in {raw!r}", path=path, line_number=line_number)
        if not np.isfinite(weight) or weight < 0:
            raise GraphParseError(f"weight must be finite and nonnegative, got {weight}", path=path,
                                  line_number=line_number)
        n = max(n, i + 1, j + 1)
        if i == j:
            logger.warning(f"{path} line {line_number}: ignoring self loop on vertex {i}")
            continue
        edges[(min(i, j), max(i, j))] = weight

    if n == 0:
        raise GraphParseError("edge list contains no edges", path=path)

    if edges:
        pairs = np.array(list(edges.keys()), dtype=int)
        rows, cols = pairs[:, 0], pairs[:, 1]
        values = np.array(list(edges.values()), dtype=float)
    else:
        rows = cols = np.zeros(0, dtype=int)
        values = np.zeros(0)
    W = sparse.coo_matrix((np.concatenate([values, values]),
                           (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                          shape=(n, n)).tocsr()
    return _log_construction(Graph.from_weights(W, name=path.stem))


def normalized_laplacian(g: Graph) -> np.ndarray:
    """Dense L = D^{-1/2} (D - W) D^{-1/2}; unit diagonal, spectrum in [0, 2]"""
    isolated = np.flatnonzero(g.degrees <= 0)
    if isolated.size:
        raise IsolatedVertexError(int(isolated[0]))

    inv_sqrt = 1.0 / np.sqrt(g.degrees)
    scaled = sparse.diags(inv_sqrt) @ g.weights @ sparse.diags(inv_sqrt)
    L = np.eye(g.n) - scaled.toarray()
    L = 0.5 * (L + L.T)
    np.fill_diagonal(L, 1.0)
    return L
