"""
Configuration settings for the graph signal quantization toolkit
"""
from pathlib import Path

# Base paths
BASE_DIR = Path(__file__).parent.parent
RESULTS_DIR = BASE_DIR / "results"
LOGS_DIR = BASE_DIR / "logs"

# Graph construction
GRAPH_CONFIG = {
    "symmetry_tolerance": 1e-10,
    "sensor": {
        "n": 500,
        "k": 6,
        "seed": 1,
    },
    "swiss_roll": {
        "n": 900,
        "k": 8,
        "seed": 1,
        "t_range": (1.5, 4.5),  # multiples of pi
        "height": 20.0,
    },
    "mesh_k": 8,
}

# Eigendecomposition of the normalized Laplacian
SPECTRAL_CONFIG = {
    "symmetry_tolerance": 1e-10,
    "cluster_gap": 1e-9,            # eigenvalues closer than this are treated as repeated
    "residual_tolerance": 1e-8,
    "orthonormality_tolerance": 1e-10,
    "gamma_max_n": 24,
    "gamma_max_r": 4,
}

# Alphabet / MSQ
QUANTIZER_CONFIG = {
    "max_bits": 16,           # 2^16 levels per alphabet
}

# Single-shot noise shaping preprocessing
SSNS_CONFIG = {
    "saturation_tolerance": 1e-10,     # relative to c
    "kernel_residual_tolerance": 1e-9,
    "pivot_tolerance": 1e-12,          # relative to the sup norm of the updated vector
    "independence_tolerance": 1e-9,    # cancellation threshold for recycled kernel vectors
    "zero_column_tolerance": 0.0,
    "norm_tolerance": 1e-9,            # ||f||_inf must equal 1 within this
    "default_engine": "fast",
}

# SSS-R sketch / SDW baseline
SSSR_CONFIG = {
    "beta": 1.0,
}

# Experiment defaults per subcommand
EXPERIMENT_CONFIG = {
    "sweep": {
        "graphs": ["ring", "grid"],
        "n": 900,
        "bandwidths": list(range(15, 156, 10)),
        "bits": [1, 2, 4],
        "trials": 20,
    },
    "bitdepth": {
        "graphs": ["grid"],
        "n": 900,
        "bandwidths": [200],
        "bits": list(range(1, 9)),
        "trials": 50,
    },
    "compare": {
        "graphs": ["ring"],
        "n": 900,
        "bandwidths": list(range(15, 156, 20)),
        "bits": None,  # None -> ceil(log2(log2(N)))
        "trials": 20,
    },
    "halftone": {
        "graphs": ["mesh"],
        "n": 900,
        "bandwidths": [20, 50],
        "bits": [1],
        "trials": 1,
    },
    "benchmark": {
        "n": 2048,
        "bandwidths": [16, 64],
        "repeats": 5,
    },
    "selftest": {
        "n": 256,
        "bandwidths": [8, 32],
        "bits": [1, 2, 4],
        "msq_samples": 10000,
    },
    "seed": 0,
    "engine": "fast",
    "workers": 1,
}

# Result persistence
OUTPUT_CONFIG = {
    "float_format": "%.17g",
    "metadata_suffix": ".meta.json",
    "svg_dpi": 96,
    "svg_hashsalt": "graph-quantization",
}

# Logging configuration
LOGGING_CONFIG = {
    "level": "INFO",
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
}
