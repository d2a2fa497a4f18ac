"""
Tests for direct MSQ and the sequential noise-shaping baselines (SSS-R sketch, SDW)
"""
import math

import numpy as np
import pytest

from src.data.graph import build_grid, normalized_laplacian
from src.data.signal import random_bandlimited
from src.quantization.baselines import (
    SDW_LABEL, SSSR_LABEL, default_sample_count, msq_direct, sdw_quantize, sssr_quantize,
)
from src.quantization.quantizer import make_alphabet_B
from src.spectral.basis import eig_smallest
from src.utils.exceptions import InvalidParameterError, UnsupportedConfigurationError
from src.utils.metrics import qe_filtered, relative_error


def test_msq_direct_positive_signal_one_bit():
    assert np.all(msq_direct(np.array([0.1, 0.5, 1.0]), 1) == 1.0)


def test_msq_direct_fixes_alphabet_members():
    levels = make_alphabet_B(3).levels
    f = np.resize(levels, 20)
    assert np.array_equal(msq_direct(f, 3), f)


def test_msq_direct_outputs_alphabet(grid_basis):
    f = random_bandlimited(grid_basis, 0)
    for bits in (1, 2, 4):
        assert np.all(make_alphabet_B(bits).contains(msq_direct(f, bits)))


def test_msq_direct_rejects_large_signal():
    with pytest.raises(InvalidParameterError):
        msq_direct(np.array([1.5]), 2)


def test_sssr_rejects_one_bit(grid_basis):
    with pytest.raises(UnsupportedConfigurationError):
        sssr_quantize(random_bandlimited(grid_basis, 0), grid_basis, 1)


def test_sssr_rejects_small_sample_count(grid_basis):
    with pytest.raises(InvalidParameterError):
        sssr_quantize(random_bandlimited(grid_basis, 0), grid_basis, 2, M=grid_basis.n - 1)


def test_sssr_is_deterministic_for_fixed_seed(grid_basis):
    f = random_bandlimited(grid_basis, 1)
    a = sssr_quantize(f, grid_basis, 3, seed=42)
    b = sssr_quantize(f, grid_basis, 3, seed=42)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.visits, b.visits)
    assert a.method == SSSR_LABEL


def test_sssr_visits_and_range(grid_basis):
    f = random_bandlimited(grid_basis, 2)
    bits = 2
    result = sssr_quantize(f, grid_basis, bits, seed=3)
    delta = make_alphabet_B(bits).spacing
    assert result.M == default_sample_count(grid_basis.n)
    assert result.visits.sum() == result.M
    assert np.all(np.abs(result.values) <= 1 + delta)
    assert result.distinct_values >= make_alphabet_B(bits).size


def test_round_robin_single_pass_is_first_order_sweep(grid_basis):
    f = random_bandlimited(grid_basis, 4)
    result = sssr_quantize(f, grid_basis, 2, M=grid_basis.n, round_robin=True)
    assert np.all(result.visits == 1)
    assert np.all(make_alphabet_B(2).contains(result.values))

    # Replay the scalar sigma-delta recursion by hand
    alphabet = make_alphabet_B(2)
    state = 0.0
    expected = np.zeros(grid_basis.n)
    for i in range(grid_basis.n):
        target = f.values[i] + state
        distances = np.abs(target - alphabet.levels)
        expected[i] = alphabet.levels[alphabet.size - 1 - np.argmin(distances[::-1])]
        state += f.values[i] - expected[i]
    assert np.array_equal(result.values, expected)


def test_sweep_state_stays_within_half_step(grid_basis):
    f = random_bandlimited(grid_basis, 7)
    bits = 3
    result = sdw_quantize(f, grid_basis, bits)
    running = np.cumsum(f.values - result.values)
    assert np.max(np.abs(running)) <= make_alphabet_B(bits).spacing / 2 + 1e-12



def test_sdw_allows_one_bit(grid_basis):
    f = random_bandlimited(grid_basis, 5)
    result = sdw_quantize(f, grid_basis, 1)
    assert result.method == SDW_LABEL
    assert result.M == grid_basis.n
    assert set(np.unique(result.values)) <= {-1.0, 1.0}


def test_sdw_beats_msq_on_smooth_signal():
    basis = eig_smallest(normalized_laplacian(build_grid(12, 12)), 10)
    f = random_bandlimited(basis, 6)
    sdw = sdw_quantize(f, basis, 1).values
    assert qe_filtered(basis, f, sdw) < qe_filtered(basis, f, msq_direct(f, 1))


def test_sssr_budget_run_is_finite():
    basis = eig_smallest(normalized_laplacian(build_grid(30, 30)), 50)
    f = random_bandlimited(basis, 9)
    bits = math.ceil(math.log2(math.log2(basis.n)))
    result = sssr_quantize(f, basis, bits, seed=9)
    assert result.M == math.ceil(900 * math.log(900))
    assert np.isfinite(relative_error(basis, f, result.values))
