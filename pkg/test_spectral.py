"""
Tests for the Laplacian eigenbasis, GFT, brick-wall filter and subspace diagnostics
"""
import itertools

import numpy as np
import pytest

from src.data.graph import build_grid, build_ring, build_sensor, normalized_laplacian
from src.spectral.basis import (
    SpectralBasis, brickwall_apply, eig_smallest, gamma_complexity, gft, igft, incoherence,
    norm_2inf, spectral_norm_bound,
)
from src.utils.exceptions import InvalidParameterError, ProblemSizeError, SpectralError


def _random_orthonormal(rng, n, r):
    X, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return SpectralBasis(np.arange(float(r)), X)


def test_ring_four_first_vector():
    basis = eig_smallest(normalized_laplacian(build_ring(4)), 1)
    assert abs(basis.eigenvalues[0]) <= 1e-12
    assert np.allclose(basis.vectors[:, 0], 0.5, atol=1e-12)


def test_ring_eight_repeated_eigenvalues():
    basis = eig_smallest(normalized_laplacian(build_ring(8)), 3)
    expected = 1 - np.cos(np.pi / 4)
    assert np.allclose(basis.eigenvalues, [0.0, expected, expected], atol=1e-12)


def test_complete_basis_is_orthogonal(grid_graph):
    basis = eig_smallest(normalized_laplacian(grid_graph), grid_graph.n)
    assert basis.is_complete
    X = basis.vectors
    assert np.max(np.abs(X @ X.T - np.eye(grid_graph.n))) <= 1e-10


def test_basis_invariants():
    for graph in (build_ring(50), build_grid(6, 8), build_sensor(70, 6, seed=4)):
        L = normalized_laplacian(graph)
        basis = eig_smallest(L, 20)
        assert np.all(np.diff(basis.eigenvalues) >= 0)
        assert np.max(np.abs(basis.vectors.T @ basis.vectors - np.eye(20))) <= 1e-10
        residuals = np.linalg.norm(L @ basis.vectors - basis.vectors * basis.eigenvalues, axis=0)
        assert residuals.max() <= 1e-8
        pivots = np.argmax(np.abs(basis.vectors), axis=0)
        assert np.all(basis.vectors[pivots, np.arange(20)] > 0)


def test_eig_smallest_deterministic(ring_graph):
    L = normalized_laplacian(ring_graph)
    a = eig_smallest(L, 10)
    b = eig_smallest(L, 10)
    assert np.array_equal(a.vectors, b.vectors)


def test_truncation_matches_direct_solve(ring_graph):
    L = normalized_laplacian(ring_graph)
    assert np.array_equal(eig_smallest(L, 12).truncate(5).vectors, eig_smallest(L, 5).vectors)


def test_eig_smallest_rejects_asymmetric():
    L = np.eye(3)
    L[0, 1] = 0.5
    with pytest.raises(SpectralError):
        eig_smallest(L, 2)


@pytest.mark.parametrize("r", [0, 5])
def test_eig_smallest_rejects_bad_r(r):
    with pytest.raises(InvalidParameterError):
        eig_smallest(np.eye(4), r)


def test_gft_inverse(grid_graph):
    basis = eig_smallest(normalized_laplacian(grid_graph), grid_graph.n)
    e3 = np.zeros(grid_graph.n)
    e3[2] = 1.0
    assert np.allclose(gft(basis, basis.vectors[:, 2]), e3, atol=1e-10)
    assert np.all(gft(basis, np.zeros(grid_graph.n)) == 0)

    f = np.random.default_rng(1).standard_normal(grid_graph.n)
    assert np.linalg.norm(igft(basis, gft(basis, f)) - f) <= 1e-10 * np.linalg.norm(f)


def test_gft_dimension_mismatch(ring_basis):
    with pytest.raises(InvalidParameterError):
        gft(ring_basis, np.ones(ring_basis.n + 1))


def test_brickwall_projection(ring_graph):
    full = eig_smallest(normalized_laplacian(ring_graph), 11)
    basis = full.truncate(10)
    rng = np.random.default_rng(2)

    f = basis.vectors @ rng.standard_normal(10)
    assert np.linalg.norm(brickwall_apply(basis, f) - f) <= 1e-10 * np.linalg.norm(f)
    assert np.linalg.norm(brickwall_apply(basis, full.vectors[:, 10])) <= 1e-10

    v = rng.standard_normal(ring_graph.n)
    once = brickwall_apply(basis, v)
    assert np.max(np.abs(brickwall_apply(basis, once) - once)) <= 1e-12

    u = rng.standard_normal(ring_graph.n)
    assert abs(brickwall_apply(basis, u) @ v - u @ brickwall_apply(basis, v)) <= 1e-10


def test_incoherence_bounds_and_identity():
    for graph in (build_ring(40), build_grid(6, 7), build_sensor(60, 5, seed=1)):
        L = normalized_laplacian(graph)
        for r in (1, 5, 20):
            basis = eig_smallest(L, r)
            mu = incoherence(basis)
            assert 1 - 1e-12 <= mu <= graph.n / r + 1e-12
            assert abs(graph.n / r * norm_2inf(basis) ** 2 - mu) <= 1e-12 * mu


def test_incoherence_special_cases(grid_graph):
    complete = eig_smallest(normalized_laplacian(grid_graph), grid_graph.n)
    assert abs(incoherence(complete) - 1.0) <= 1e-10

    regular = eig_smallest(normalized_laplacian(build_ring(30)), 1)
    assert abs(incoherence(regular) - 1.0) <= 1e-12

    coherent = SpectralBasis(np.zeros(3), np.eye(12)[:, :3])
    assert incoherence(coherent) == 12 / 3


def test_gamma_orthonormal_bounded():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(4, 13))
        r = int(rng.integers(1, 4))
        basis = _random_orthonormal(rng, n, r)
        assert gamma_complexity(basis) <= 1 + 1e-10
        assert gamma_complexity(basis) <= spectral_norm_bound(basis) + 1e-12


def test_gamma_identity_prefix():
    assert abs(gamma_complexity(SpectralBasis(np.zeros(2), np.eye(8)[:, :2])) - 1.0) <= 1e-12


def test_gamma_matches_exhaustive_oracle():
    basis = _random_orthonormal(np.random.default_rng(4), 12, 2)
    subsets = list(itertools.combinations(range(12), 2))
    assert len(subsets) == 66
    oracle = max(np.linalg.norm(basis.vectors[list(s), :], 2) for s in subsets)
    assert gamma_complexity(basis) == oracle


def test_gamma_size_limit():
    basis = _random_orthonormal(np.random.default_rng(5), 30, 2)
    with pytest.raises(ProblemSizeError, match="X_r"):
        gamma_complexity(basis)
