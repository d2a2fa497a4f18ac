"""
Result persistence: CSV tables, sidecar metadata and static SVG charts
"""
import json
import logging
import platform
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import scipy
import sklearn
import yaml

from config.settings import OUTPUT_CONFIG
from .experiments import ExperimentConfig, ExperimentResult
from ..utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

SEED_RULE = ("per-trial signal seed = first 32-bit word of "
             "numpy.random.SeedSequence([seed, crc32(graph_name), r, bits, trial]).generate_state(1)")


def write_table(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """CSV with header, no index, floats with 17 significant digits"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=OUTPUT_CONFIG["float_format"])
    return path


def package_versions() -> Dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "scikit-learn": sklearn.__version__,
        "pyyaml": yaml.__version__,
    }


def write_metadata(path: Union[str, Path], config: ExperimentConfig, files: List[str],
                   extra: Optional[Dict[str, Any]] = None) -> Path:
    """Sidecar JSON: config echo, package versions, seed rule and produced files (no timestamps)"""
    path = Path(path)
    payload = {
        "config": config.to_dict(),
        "versions": package_versions(),
        "seed_rule": SEED_RULE,
        "files": sorted(files),
    }
    if extra:
        payload.update(extra)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def save_result(result: ExperimentResult, config: ExperimentConfig) -> List[Path]:
    """Write rows, summary, exports and metadata into config.out; returns the written paths"""
    out = config.out
    written: List[Path] = []
    if result.name != "halftone":
        written.append(write_table(result.rows, out / f"{result.name}.csv"))
    written.append(write_table(result.summary, out / f"{result.name}_summary.csv"))
    for name, frame in sorted(result.exports.items()):
        written.append(write_table(frame, out / f"{name}.csv"))

    meta = write_metadata(out / f"{result.name}{OUTPUT_CONFIG['metadata_suffix']}", config,
                          [p.name for p in written])
    written.append(meta)
    for p in written:
        logger.info(f"Wrote {p}")
    return written


def _default_axes(frame: pd.DataFrame, x: Optional[str], y: Optional[str],
                  group_by: Optional[Sequence[str]]):
    if x is None:
        x = "r" if "r" in frame.columns and frame["r"].nunique() > 1 else "bits"
    if y is None:
        y = next((c for c in ("mean_rel_error", "rel_error", "proxy_error") if c in frame.columns), None)
    if group_by is None:
        group_by = [c for c in ("graph", "bits", "method", "r") if c in frame.columns and c != x]
    for column in [x, y, *group_by]:
        if column is None or column not in frame.columns:
            raise ConfigurationError(f"column {column!r} not found in table (have {list(frame.columns)})")
    return x, y, list(group_by)


def plot_table(csv_path: Union[str, Path], svg_path: Union[str, Path], x: Optional[str] = None,
               y: Optional[str] = None, group_by: Optional[Sequence[str]] = None,
               log_y: bool = True) -> Path:
    """Line chart of y over x, one line per group; SVG without timestamps"""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    try:
        frame = pd.read_csv(csv_path)
    except (FileNotFoundError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigurationError(f"cannot read result table {csv_path}: {e}")
    x, y, group_by = _default_axes(frame, x, y, group_by)

    plt.rcParams["svg.hashsalt"] = OUTPUT_CONFIG["svg_hashsalt"]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    groups = frame.groupby(group_by, sort=True) if group_by else [((), frame)]
    for key, group in groups:
        series = group.groupby(x, sort=True)[y].mean()
        key = key if isinstance(key, tuple) else (key,)
        label = ", ".join(f"{col}={val}" for col, val in zip(group_by, key)) or y
        ax.plot(series.index, series.values, marker="o", markersize=3, label=label)

    ax.set_xlabel(x)
    ax.set_ylabel(y)
    if log_y and (frame[y] > 0).all():
        ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()

    svg_path = Path(svg_path)
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(svg_path, format="svg", dpi=OUTPUT_CONFIG["svg_dpi"], metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote {svg_path}")
    return svg_path
