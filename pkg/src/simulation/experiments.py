"""
Experiment runners for graph signal quantization: bandwidth sweeps, bit-depth
scaling, SSNS vs SSS-R (sketch) comparison and mesh halftoning.

Every trial draws its signal from a seed derived from
SeedSequence([master_seed, crc32(graph_id), r, bits, trial]), so results do not
depend on execution order or on the number of workers.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import yaml
from tqdm import tqdm

from config.settings import EXPERIMENT_CONFIG, GRAPH_CONFIG, QUANTIZER_CONFIG, RESULTS_DIR
from ..data.graph import (
    Graph, build_grid, build_knn_from_points, build_ring, build_sensor, load_edge_list,
    normalized_laplacian,
)
from ..data.point_cloud import PointCloud, load_point_cloud, make_swiss_roll
from ..data.signal import mesh_z_signal, random_bandlimited, to_unit_interval, trial_seed
from ..quantization.baselines import SDW_LABEL, SSSR_LABEL, msq_direct, sdw_quantize, sssr_quantize
from ..quantization.quantizer import make_alphabet_B, msq_vector
from ..quantization.ssns import Engine, preprocess, ssns_quantize
from ..spectral.basis import SpectralBasis, eig_smallest, gamma_complexity, incoherence
from ..utils.exceptions import ConfigurationError, GraphQuantizationError
from ..utils.metrics import bound_curves, explicit_bound, norm_lower_bound, qe_filtered

logger = logging.getLogger(__name__)

EXPERIMENTS = ("sweep", "bitdepth", "compare", "halftone")
GRAPH_FAMILIES = ("ring", "grid", "sensor", "swissroll", "edgelist", "mesh")
CONFIG_KEYS = ("graph", "n", "k", "r", "bits", "trials", "seed", "engine", "out", "path",
               "grid_shape", "timing", "workers")

SWEEP_COLUMNS = ["graph", "n", "r", "bits", "trial", "trial_seed", "rel_error", "qe", "signal_norm",
                 "bound_explicit", "bound_thm31", "incoherence"]
BITDEPTH_COLUMNS = ["graph", "n", "r", "bits", "trial", "trial_seed", "rel_error", "bound_explicit"]
COMPARE_COLUMNS = ["graph", "n", "r", "bits", "trial", "trial_seed", "method", "rel_error"]
HALFTONE_COLUMNS = ["graph", "n", "r", "method", "proxy_error"]
RECONSTRUCTION_COLUMNS = ["vertex", "f", "fq", "abs_error"]
SSNS_LABEL = "SSNS"
MSQ_LABEL = "MSQ"


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def parse_int_list(value: Any, key: str = "value") -> List[int]:
    """Comma lists ("15,25") and inclusive ranges ("15:155:10"); lists and ints pass through"""
    if value is None:
        return []
    if isinstance(value, bool):
        raise ConfigurationError(f"{key}: expected integers, got {value!r}")
    if isinstance(value, (int, np.integer)):
        return [int(value)]
    if isinstance(value, (list, tuple)):
        return [item for v in value for item in parse_int_list(v, key)]

    result: List[int] = []
    try:
        for part in str(value).split(","):
            part = part.strip()
            if not part:
                continue
            if ":" in part:
                pieces = [int(p) for p in part.split(":")]
                if len(pieces) not in (2, 3):
                    raise ValueError(part)
                start, stop = pieces[0], pieces[1]
                step = pieces[2] if len(pieces) == 3 else 1
                if step <= 0:
                    raise ValueError(part)
                result.extend(range(start, stop + 1, step))
            else:
                result.append(int(part))
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {value!r} as integers (use 'a,b,c' or 'start:stop:step')")
    return result


def _parse_graphs(value: Any) -> List[str]:
    if isinstance(value, (list, tuple)):
        names = [str(v).strip() for v in value]
    else:
        names = [v.strip() for v in str(value).split(",")]
    names = [name for name in names if name]
    unknown = [name for name in names if name not in GRAPH_FAMILIES]
    if unknown:
        raise ConfigurationError(f"graph: unknown famil{'ies' if len(unknown) > 1 else 'y'} {unknown}; "
                                 f"choose from {list(GRAPH_FAMILIES)}")
    return names


def _parse_grid_shape(value: Any) -> Optional[Tuple[int, int]]:
    if value is None:
        return None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        h, w = value
    else:
        try:
            h, w = str(value).lower().split("x")
        except ValueError:
            raise ConfigurationError(f"grid_shape: expected HxW, got {value!r}")
    try:
        return int(h), int(w)
    except (TypeError, ValueError):
        raise ConfigurationError(f"grid_shape: expected HxW, got {value!r}")


def _as_int(value: Any, key: str, optional: bool = False) -> Optional[int]:
    if value is None and optional:
        return None
    if isinstance(value, bool):
        raise ConfigurationError(f"{key}: expected an integer, got {value!r}")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key}: expected an integer, got {value!r}")


def _as_bool(value: Any, key: str) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"{key}: expected a boolean, got {value!r}")


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Flat `key: value` file mirroring the CLI flags"""
    path = Path(path)
    try:
        with open(path) as fh:
            # Scalars stay strings: "5:15:5" must not resolve as a base-60 integer
            data = yaml.load(fh, Loader=yaml.BaseLoader)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except yaml.YAMLError as e:
        raise ConfigurationError(f"config file {path} is not a valid key-value file: {e}")

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must contain 'key: value' lines")

    values = {}
    for raw_key, value in data.items():
        key = str(raw_key).replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"unknown config key '{raw_key}' in {path}")
        if isinstance(value, dict):
            raise ConfigurationError(f"config key '{raw_key}' must be flat, got a nested mapping")
        values[key] = None if value in ("", "~", "null", "Null", "NULL") else value
    return values


@dataclass
class ExperimentConfig:
    """Resolved configuration of one experiment run"""
    experiment: str
    graphs: List[str]
    bandwidths: List[int]
    bits: List[int]
    trials: int
    seed: int
    engine: str
    out: Path
    n: Optional[int] = None
    k: Optional[int] = None
    path: Optional[Path] = None
    grid_shape: Optional[Tuple[int, int]] = None
    timing: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(f"unknown experiment '{self.experiment}'")
        if not self.graphs:
            raise ConfigurationError("at least one graph family is required")
        if not self.bandwidths or any(r < 1 for r in self.bandwidths):
            raise ConfigurationError(f"bandwidths must be positive integers, got {self.bandwidths}")
        if any(b < 1 or b > QUANTIZER_CONFIG["max_bits"] for b in self.bits):
            raise ConfigurationError(f"bits must lie in 1..{QUANTIZER_CONFIG['max_bits']}, got {self.bits}")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if self.engine not in {e.value for e in Engine}:
            raise ConfigurationError(f"engine must be 'reference' or 'fast', got '{self.engine}'")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if self.n is not None and self.n < 2:
            raise ConfigurationError(f"n must be >= 2, got {self.n}")
        if self.k is not None and self.k < 1:
            raise ConfigurationError(f"k must be >= 1, got {self.k}")
        if self.grid_shape is not None and min(self.grid_shape) < 1:
            raise ConfigurationError(f"grid shape must be positive, got {self.grid_shape}")
        self.out = Path(self.out)
        if self.path is not None:
            self.path = Path(self.path)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "graphs": list(self.graphs),
            "bandwidths": list(self.bandwidths),
            "bits": list(self.bits),
            "trials": self.trials,
            "seed": self.seed,
            "engine": self.engine,
            "n": self.n,
            "k": self.k,
            "path": str(self.path) if self.path is not None else None,
            "grid_shape": list(self.grid_shape) if self.grid_shape else None,
            "timing": self.timing,
            "workers": self.workers,
        }


def build_config(experiment: str, config_file: Optional[Union[str, Path]] = None,
                 overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Defaults, then the config file, then explicit overrides (None values are ignored)"""
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(f"unknown experiment '{experiment}'")
    defaults = EXPERIMENT_CONFIG[experiment]
    values: Dict[str, Any] = {
        "graph": defaults["graphs"],
        "n": defaults["n"],
        "k": None,
        "r": defaults["bandwidths"],
        "bits": defaults["bits"],
        "trials": defaults["trials"],
        "seed": EXPERIMENT_CONFIG["seed"],
        "engine": EXPERIMENT_CONFIG["engine"],
        "workers": EXPERIMENT_CONFIG["workers"],
        "out": RESULTS_DIR,
        "path": None,
        "grid_shape": None,
        "timing": False,
    }
    if config_file is not None:
        values.update(load_config_file(config_file))
    if overrides:
        unknown = set(overrides) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigurationError(f"unknown option(s) {sorted(unknown)}")
        values.update({key: value for key, value in overrides.items() if value is not None})

    return ExperimentConfig(
        experiment=experiment,
        graphs=_parse_graphs(values["graph"]),
        bandwidths=parse_int_list(values["r"], "r"),
        bits=parse_int_list(values["bits"], "bits"),
        trials=_as_int(values["trials"], "trials"),
        seed=_as_int(values["seed"], "seed"),
        engine=str(values["engine"]),
        out=Path(values["out"]),
        n=_as_int(values["n"], "n", optional=True),
        k=_as_int(values["k"], "k", optional=True),
        path=Path(values["path"]) if values["path"] is not None else None,
        grid_shape=_parse_grid_shape(values["grid_shape"]),
        timing=_as_bool(values["timing"], "timing"),
        workers=_as_int(values["workers"], "workers"),
    )


# ---------------------------------------------------------------------------
# Graphs and trials
# ---------------------------------------------------------------------------

def make_graph(family: str, n: Optional[int] = None, k: Optional[int] = None,
               path: Optional[Path] = None,
               grid_shape: Optional[Tuple[int, int]] = None) -> Tuple[Graph, Optional[PointCloud]]:
    """Graph for an experiment family; point-based families also return their coordinates"""
    if family == "ring":
        return build_ring(n or EXPERIMENT_CONFIG["sweep"]["n"]), None

    if family == "grid":
        if grid_shape is not None:
            h, w = grid_shape
        else:
            size = n or EXPERIMENT_CONFIG["sweep"]["n"]
            side = math.isqrt(size)
            if side * side != size:
                raise ConfigurationError(f"grid with n={size} needs a perfect square or --grid-shape HxW")
            h = w = side
        return build_grid(h, w), None

    if family == "sensor":
        return build_sensor(n or GRAPH_CONFIG["sensor"]["n"], k or GRAPH_CONFIG["sensor"]["k"],
                            GRAPH_CONFIG["sensor"]["seed"]), None

    if family == "swissroll":
        size = n or GRAPH_CONFIG["swiss_roll"]["n"]
        neighbours = k or GRAPH_CONFIG["swiss_roll"]["k"]
        seed = GRAPH_CONFIG["swiss_roll"]["seed"]
        cloud = make_swiss_roll(size, seed)
        return build_knn_from_points(cloud, neighbours, name=f"swissroll-{size}-k{neighbours}-s{seed}"), cloud

    if family == "edgelist":
        if path is None:
            raise ConfigurationError("graph family 'edgelist' needs --path")
        return load_edge_list(path), None

    if family == "mesh":
        neighbours = k or GRAPH_CONFIG["mesh_k"]
        if path is None:
            size = n or GRAPH_CONFIG["swiss_roll"]["n"]
            logger.warning(f"No mesh file given; using a {size}-point swiss roll as the surface")
            cloud = make_swiss_roll(size, GRAPH_CONFIG["swiss_roll"]["seed"])
            name = f"mesh-swissroll-{size}-k{neighbours}"
        else:
            cloud = load_point_cloud(path)
            name = f"mesh-{Path(path).stem}-k{neighbours}"
        return build_knn_from_points(cloud, neighbours, name=name), cloud

    raise ConfigurationError(f"unknown graph family '{family}'")


def trial_seed_value(master_seed: int, graph_id: str, r: int, bits: int, trial: int) -> int:
    """32-bit integer seed of one trial, as written to the trial_seed column"""
    return int(trial_seed(master_seed, graph_id, r, bits, trial).generate_state(1)[0])


def bit_budget(n: int) -> int:
    """ceil(log2(log2(N))), at least 1"""
    return max(1, math.ceil(math.log2(math.log2(n))))


class TrialTask(NamedTuple):
    graph: str
    n: int
    r: int
    bits: int
    trial: int
    seed_value: int
    basis: SpectralBasis
    mu: float
    engine: str


def _timed(fn: Callable, *args, **kwargs):
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, (time.perf_counter() - start) * 1000.0


def _ssns_trial(task: TrialTask) -> Dict[str, Any]:
    f = random_bandlimited(task.basis, task.seed_value)
    result, runtime_ms = _timed(ssns_quantize, None, f, task.bits, task.r, engine=task.engine, basis=task.basis)
    qe = qe_filtered(task.basis, f, result.q)
    bound = explicit_bound(task.r, task.bits)
    if qe > bound:
        logger.error(f"explicit bound violated on {task.graph} r={task.r} B={task.bits} "
                     f"trial={task.trial}: {qe!r} > {bound!r}")
    return {
        "graph": task.graph,
        "n": task.n,
        "r": task.r,
        "bits": task.bits,
        "trial": task.trial,
        "trial_seed": task.seed_value,
        "rel_error": qe / f.l2_norm,
        "qe": qe,
        "signal_norm": f.l2_norm,
        "bound_explicit": bound,
        "bound_thm31": bound_curves(task.n, task.r, task.bits, task.mu).thm31,
        "incoherence": task.mu,
        "runtime_ms": runtime_ms,
    }


def _compare_trial(task: TrialTask) -> List[Dict[str, Any]]:
    f = random_bandlimited(task.basis, task.seed_value)
    base = {"graph": task.graph, "n": task.n, "r": task.r, "bits": task.bits, "trial": task.trial,
            "trial_seed": task.seed_value, "signal_norm": f.l2_norm}

    ssns, ssns_ms = _timed(ssns_quantize, None, f, task.bits, task.r, engine=task.engine, basis=task.basis)
    rows = [dict(base, method=SSNS_LABEL, rel_error=qe_filtered(task.basis, f, ssns.q) / f.l2_norm,
                 runtime_ms=ssns_ms)]

    if task.bits >= 2:
        # Sampling stream is a child of the trial seed so the signal draw is unaffected
        sampling = np.random.SeedSequence(task.seed_value).spawn(1)[0]
        sssr, sssr_ms = _timed(sssr_quantize, f, task.basis, task.bits, seed=sampling)
        rows.append(dict(base, method=SSSR_LABEL, rel_error=qe_filtered(task.basis, f, sssr.values) / f.l2_norm,
                         runtime_ms=sssr_ms))
    return rows


@dataclass
class ExperimentResult:
    """Per-trial rows, aggregated summary and extra per-vertex exports of one experiment"""
    name: str
    rows: pd.DataFrame
    summary: pd.DataFrame
    exports: Dict[str, pd.DataFrame] = field(default_factory=dict)


class ExperimentRunner:
    """Runs the four experiments for one resolved configuration"""

    def __init__(self, config: ExperimentConfig, progress: bool = False):
        self.config = config
        self.progress = progress
        self.logger = logging.getLogger(__name__)
        self._graphs: Dict[str, Tuple[Graph, Optional[PointCloud]]] = {}
        self._bases: Dict[str, SpectralBasis] = {}
        self._bandwidths: Dict[str, List[int]] = {}

    def graph(self, family: str) -> Tuple[Graph, Optional[PointCloud]]:
        if family not in self._graphs:
            cfg = self.config
            self._graphs[family] = make_graph(family, cfg.n, cfg.k, cfg.path, cfg.grid_shape)
        return self._graphs[family]

    def bandwidths(self, family: str) -> List[int]:
        """Configured bandwidths below N; the rest are skipped with a warning"""
        if family not in self._bandwidths:
            graph = self.graph(family)[0]
            valid = []
            for r in self.config.bandwidths:
                if r >= graph.n:
                    self.logger.warning(f"Skipping r={r} on {graph.name}: bandwidth must be < N={graph.n}")
                else:
                    valid.append(r)
            self._bandwidths[family] = valid
        return self._bandwidths[family]

    def basis(self, family: str, r: int) -> SpectralBasis:
        # One eigendecomposition per graph at the largest bandwidth, truncated per r
        if family not in self._bases:
            graph = self.graph(family)[0]
            largest = max(self.bandwidths(family), default=r)
            self._bases[family] = eig_smallest(normalized_laplacian(graph), max(largest, r))
        return self._bases[family].truncate(r)

    def _map(self, fn: Callable, tasks: Sequence, desc: str) -> List:
        with tqdm(total=len(tasks), desc=desc, disable=not self.progress) as bar:
            if self.config.workers > 1:
                with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                    results = []
                    for item in pool.map(fn, tasks):
                        results.append(item)
                        bar.update(1)
                    return results
            results = []
            for task in tasks:
                results.append(fn(task))
                bar.update(1)
            return results

    def _tasks(self, bits_for: Callable[[int], List[int]]) -> List[TrialTask]:
        tasks = []
        for family in self.config.graphs:
            graph = self.graph(family)[0]
            for r in self.bandwidths(family):
                basis = self.basis(family, r)
                mu = incoherence(basis)
                for bits in bits_for(graph.n):
                    for trial in range(self.config.trials):
                        seed_value = trial_seed_value(self.config.seed, graph.name, r, bits, trial)
                        tasks.append(TrialTask(graph.name, graph.n, r, bits, trial, seed_value, basis, mu,
                                               self.config.engine))
        return tasks

    def _columns(self, columns: List[str]) -> List[str]:
        return columns + ["runtime_ms"] if self.config.timing else columns

    def run_bandwidth_sweep(self) -> ExperimentResult:
        tasks = self._tasks(lambda n: self.config.bits)
        self.logger.info(f"Bandwidth sweep: {len(tasks)} trials")
        rows = pd.DataFrame(self._map(_ssns_trial, tasks, "sweep"),
                            columns=SWEEP_COLUMNS + ["runtime_ms"])

        summary = (
            rows.assign(bound_explicit_rel=rows["bound_explicit"] / rows["signal_norm"])
            .groupby(["graph", "r", "bits"], sort=False)
            .agg(trials=("trial", "count"),
                 mean_rel_error=("rel_error", "mean"),
                 mean_bound_explicit_rel=("bound_explicit_rel", "mean"),
                 bound_thm31=("bound_thm31", "first"))
            .reset_index()
        )
        return ExperimentResult("sweep", rows[self._columns(SWEEP_COLUMNS)], summary)

    def run_bitdepth_scaling(self) -> ExperimentResult:
        tasks = self._tasks(lambda n: self.config.bits)
        self.logger.info(f"Bit-depth scaling: {len(tasks)} trials")
        rows = pd.DataFrame(self._map(_ssns_trial, tasks, "bitdepth"),
                            columns=SWEEP_COLUMNS + ["runtime_ms"])

        summary = (
            rows.groupby(["graph", "r", "bits"], sort=False)
            .agg(trials=("trial", "count"),
                 mean_rel_error=("rel_error", "mean"),
                 bound_explicit=("bound_explicit", "first"))
            .reset_index()
        )
        summary.insert(5, "reference_2_pow_minus_b", np.power(2.0, -summary["bits"].astype(float)))

        for (graph, r), group in summary.groupby(["graph", "r"], sort=False):
            means = group["mean_rel_error"].to_numpy()
            if np.any(np.diff(means) > 0):
                self.logger.info(f"Mean error not monotone in bits on {graph} r={r}: {means.tolist()}")
        return ExperimentResult("bitdepth", rows[self._columns(BITDEPTH_COLUMNS)], summary)

    def run_comparison(self) -> ExperimentResult:
        def bits_for(n: int) -> List[int]:
            return self.config.bits or [bit_budget(n)]

        if 1 in self.config.bits:
            self.logger.warning("SSS-R (sketch) is not available for B=1; those rows are omitted")
        tasks = self._tasks(bits_for)
        self.logger.info(f"Comparison: {len(tasks)} trials")
        records = [row for rows in self._map(_compare_trial, tasks, "compare") for row in rows]
        rows = pd.DataFrame(records, columns=COMPARE_COLUMNS + ["signal_norm", "runtime_ms"])

        mu_by_key = {(t.graph, t.r): (t.n, t.mu) for t in tasks}
        summary_rows = []
        grouped = rows.groupby(["graph", "r", "bits", "method"], sort=False)
        for (graph, r, bits, method), group in grouped:
            n, mu = mu_by_key[(graph, r)]
            curves = bound_curves(n, r, bits, mu)
            mean_error = float(group["rel_error"].mean())
            summary_rows.append({
                "graph": graph,
                "r": r,
                "bits": bits,
                "method": method,
                "mean_rel_error": mean_error,
                "bound_eq5": curves.eq5,
                "bound_eq6": curves.eq6,
                "bound_explicit_rel": float((explicit_bound(r, bits) / group["signal_norm"]).mean()),
                "bound_to_error_ratio": curves.eq6 / mean_error if mean_error > 0 else float("inf"),
            })
        summary = pd.DataFrame(summary_rows, columns=["graph", "r", "bits", "method", "mean_rel_error",
                                                      "bound_eq5", "bound_eq6", "bound_explicit_rel",
                                                      "bound_to_error_ratio"])
        return ExperimentResult("compare", rows[self._columns(COMPARE_COLUMNS)], summary)

    def run_halftone(self) -> ExperimentResult:
        cfg = self.config
        if len(cfg.bits) != 1:
            raise ConfigurationError(f"halftoning takes a single bit depth, got {cfg.bits}")
        bits = cfg.bits[0]

        summary_rows = []
        exports: Dict[str, pd.DataFrame] = {}
        for family in cfg.graphs:
            graph, cloud = self.graph(family)
            if cloud is None:
                raise ConfigurationError(f"halftoning needs vertex coordinates; graph family '{family}' has none "
                                         "(use mesh or swissroll)")
            f = mesh_z_signal(cloud)
            bandwidths = self.bandwidths(family)
            for r in bandwidths:
                basis = self.basis(family, r)
                ssns = ssns_quantize(None, f, bits, r, engine=cfg.engine, basis=basis)
                outputs = {
                    MSQ_LABEL: msq_direct(f, bits),
                    SDW_LABEL: sdw_quantize(f, basis, bits).values,
                    SSNS_LABEL: ssns.q,
                }
                prefix = "halftone" + (f"_{family}" if len(cfg.graphs) > 1 else "")
                suffix = f"_r{r}" if len(bandwidths) > 1 else ""
                for method, q in outputs.items():
                    proxy = qe_filtered(basis, f, q)
                    summary_rows.append({"graph": graph.name, "n": graph.n, "r": r, "method": method,
                                         "proxy_error": proxy})
                    exports[f"{prefix}_{method.lower()}{suffix}"] = pd.DataFrame(
                        {"vertex": np.arange(graph.n), "value": q, "display": to_unit_interval(q)})
                # Per-vertex reconstruction L_r q next to the input
                exports[f"{prefix}_ssns_fq{suffix}"] = pd.DataFrame(
                    {"vertex": np.arange(graph.n), "f": f.values, "fq": ssns.fq,
                     "abs_error": np.abs(f.values - ssns.fq)},
                    columns=RECONSTRUCTION_COLUMNS)
                self.logger.info(
                    f"Halftone {graph.name} r={r}: " +
                    ", ".join(f"{row['method']}={row['proxy_error']:.4g}" for row in summary_rows[-len(outputs):])
                )

        summary = pd.DataFrame(summary_rows, columns=HALFTONE_COLUMNS)
        return ExperimentResult("halftone", summary.copy(), summary, exports)

    def run(self) -> ExperimentResult:
        handlers = {
            "sweep": self.run_bandwidth_sweep,
            "bitdepth": self.run_bitdepth_scaling,
            "compare": self.run_comparison,
            "halftone": self.run_halftone,
        }
        return handlers[self.config.experiment]()


def run_bandwidth_sweep(config: ExperimentConfig, progress: bool = False) -> ExperimentResult:
    return ExperimentRunner(config, progress).run_bandwidth_sweep()


def run_bitdepth_scaling(config: ExperimentConfig, progress: bool = False) -> ExperimentResult:
    return ExperimentRunner(config, progress).run_bitdepth_scaling()


def run_comparison(config: ExperimentConfig, progress: bool = False) -> ExperimentResult:
    return ExperimentRunner(config, progress).run_comparison()


def run_halftone(config: ExperimentConfig, progress: bool = False) -> ExperimentResult:
    return ExperimentRunner(config, progress).run_halftone()


# ---------------------------------------------------------------------------
# Engine timing and self test
# ---------------------------------------------------------------------------

def benchmark_engines(n: int = EXPERIMENT_CONFIG["benchmark"]["n"],
                      r_values: Sequence[int] = EXPERIMENT_CONFIG["benchmark"]["bandwidths"],
                      repeats: int = EXPERIMENT_CONFIG["benchmark"]["repeats"],
                      seed: int = EXPERIMENT_CONFIG["seed"]) -> pd.DataFrame:
    """Median preprocessing wall time of both engines on a ring graph, per bandwidth"""
    graph = build_ring(n)
    full = eig_smallest(normalized_laplacian(graph), max(r_values))
    records = []
    for r in r_values:
        basis = full.truncate(r)
        f = random_bandlimited(basis, trial_seed_value(seed, graph.name, r, 0, 0))
        timings: Dict[str, List[float]] = {e.value: [] for e in Engine}
        for _ in range(repeats):
            for engine in Engine:
                _, elapsed = _timed(preprocess, basis.vectors.T, f.values, 1.0, engine=engine)
                timings[engine.value].append(elapsed)
        reference_ms = float(np.median(timings[Engine.REFERENCE.value]))
        fast_ms = float(np.median(timings[Engine.FAST.value]))
        logger.info(f"r={r}: reference {reference_ms:.1f} ms, fast {fast_ms:.1f} ms")
        records.append({"n": n, "r": r, "reference_ms": reference_ms, "fast_ms": fast_ms,
                        "speedup": reference_ms / fast_ms if fast_ms > 0 else float("inf")})
    return pd.DataFrame(records)


class SelfTestCheck(NamedTuple):
    name: str
    passed: bool
    detail: str


def _exhaustive_msq(z: np.ndarray, levels: np.ndarray) -> np.ndarray:
    distances = np.abs(z[:, None] - levels[None, :])
    # Reverse so argmin returns the largest of equidistant levels
    pick = levels.size - 1 - np.argmin(distances[:, ::-1], axis=1)
    return levels[pick]


def selftest(n: int = EXPERIMENT_CONFIG["selftest"]["n"], seed: int = EXPERIMENT_CONFIG["seed"]) -> List[SelfTestCheck]:
    """Reduced contract suite: preprocessing contracts, explicit bound, norm bound, MSQ oracle, Gamma"""
    settings = EXPERIMENT_CONFIG["selftest"]
    checks: List[SelfTestCheck] = []
    side = math.isqrt(n)
    graphs = [build_ring(n), build_grid(side, side), build_sensor(n, GRAPH_CONFIG["sensor"]["k"], seed + 1)]

    for graph in graphs:
        try:
            full = eig_smallest(normalized_laplacian(graph), max(settings["bandwidths"]))
        except GraphQuantizationError as e:
            checks.append(SelfTestCheck(f"eigensolve {graph.name}", False, str(e)))
            continue
        for r in settings["bandwidths"]:
            basis = full.truncate(r)
            f = random_bandlimited(basis, trial_seed_value(seed, graph.name, r, 0, 0))
            mu = incoherence(basis)
            lower = norm_lower_bound(graph.n, r, mu)
            checks.append(SelfTestCheck(f"norm bound {graph.name} r={r}", f.l2_norm >= lower * (1 - 1e-9),
                                        f"||f||={f.l2_norm:.6g} >= {lower:.6g}"))
            for engine in Engine:
                name = f"{engine.value} {graph.name} r={r}"
                try:
                    result = preprocess(basis.vectors.T, f.values, 1.0, engine=engine)
                except GraphQuantizationError as e:
                    checks.append(SelfTestCheck(name, False, str(e)))
                    continue
                residual_ok = result.spectral_residual <= 1e-8 * (1 + f.l2_norm)
                sup_ok = abs(np.max(np.abs(result.reshaped)) - 1.0) <= 1e-10
                free_ok = result.unsaturated.size <= r
                checks.append(SelfTestCheck(name, residual_ok and sup_ok and free_ok,
                                            f"residual={result.spectral_residual:.2e}, "
                                            f"unsaturated={result.unsaturated.size}"))
                for bits in settings["bits"]:
                    q = msq_vector(result.reshaped, make_alphabet_B(bits))
                    qe = qe_filtered(basis, f, q)
                    bound = explicit_bound(r, bits)
                    checks.append(SelfTestCheck(f"explicit bound {name} B={bits}", qe <= bound,
                                                f"{qe:.4g} <= {bound:.4g}"))

    rng = np.random.default_rng(seed)
    z = rng.uniform(-1.5, 1.5, size=settings["msq_samples"])
    for bits in range(1, 9):
        alphabet = make_alphabet_B(bits)
        grid_points = np.concatenate([z, alphabet.levels, (alphabet.levels[1:] + alphabet.levels[:-1]) / 2])
        agree = np.array_equal(msq_vector(grid_points, alphabet), _exhaustive_msq(grid_points, alphabet.levels))
        checks.append(SelfTestCheck(f"msq oracle B={bits}", agree, f"{grid_points.size} inputs"))

    for trial in range(5):
        X, _ = np.linalg.qr(rng.standard_normal((10, 3)))
        gamma = gamma_complexity(SpectralBasis(np.arange(3.0), X))
        checks.append(SelfTestCheck(f"gamma orthonormal #{trial}", gamma <= 1 + 1e-10, f"Gamma={gamma:.12f}"))
    return checks
