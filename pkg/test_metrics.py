"""
Tests for filtered error functionals and bound curves
"""
import logging
import math

import numpy as np
import pytest

from src.data.graph import normalized_laplacian
from src.data.signal import random_bandlimited
from src.spectral.basis import eig_smallest, incoherence
from src.utils.exceptions import InvalidParameterError
from src.utils.metrics import (
    ErrorReport, bound_curves, error_report, explicit_bound, norm_lower_bound, qe_filtered,
    qe_filtered_direct, relative_error,
)


@pytest.fixture(scope="module")
def ring_bases(ring_graph):
    full = eig_smallest(normalized_laplacian(ring_graph), 11)
    return full, full.truncate(10)


def test_qe_examples(ring_bases):
    full, basis = ring_bases
    f = random_bandlimited(basis, 0).values
    assert qe_filtered(basis, f, f) == 0.0
    assert qe_filtered(basis, f, f - full.vectors[:, 10]) <= 1e-10
    assert abs(qe_filtered(basis, f, f - full.vectors[:, 0]) - 1.0) <= 1e-10


def test_qe_two_code_paths_agree(ring_bases):
    _, basis = ring_bases
    rng = np.random.default_rng(1)
    for _ in range(20):
        f, q = rng.standard_normal((2, basis.n))
        assert abs(qe_filtered(basis, f, q) - qe_filtered_direct(basis, f, q)) <= 1e-10


def test_qe_dimension_mismatch(ring_bases):
    _, basis = ring_bases
    with pytest.raises(InvalidParameterError):
        qe_filtered(basis, np.ones(basis.n), np.ones(basis.n - 1))


def test_relative_error_examples(ring_bases):
    _, basis = ring_bases
    f = random_bandlimited(basis, 2).values
    assert relative_error(basis, f, f) == 0.0
    assert relative_error(basis, f, np.zeros_like(f)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvalidParameterError):
        relative_error(basis, np.zeros(basis.n), np.zeros(basis.n))


def test_bound_curve_arithmetic():
    curves = bound_curves(900, 50, 1, 1.0)
    assert curves.thm31 == pytest.approx(5 / 6)
    assert curves.eq6 == pytest.approx(50 / (30 * math.log(900)))
    assert curves.eq5 == pytest.approx(50 * math.log(50) / math.sqrt(900 * math.log(900)))
    for bits in range(1, 8):
        assert bound_curves(900, 50, bits + 1, 2.0).thm31 == bound_curves(900, 50, bits, 2.0).thm31 / 2


def test_bound_curve_degenerate_log(caplog):
    with caplog.at_level(logging.WARNING):
        curves = bound_curves(100, 1, 2, 1.0)
    assert curves.eq5 == 0.0
    assert "degenerate" in caplog.text


@pytest.mark.parametrize("args", [(10, 10, 1, 1.0), (10, 0, 1, 1.0), (10, 2, 0, 1.0), (10, 2, 1, 0.5)])
def test_bound_curve_preconditions(args):
    with pytest.raises(InvalidParameterError):
        bound_curves(*args)


def test_explicit_bound():
    assert explicit_bound(16, 1) == 4.0
    assert explicit_bound(16, 2) == pytest.approx(4 / 3)
    for bits in range(2, 8):
        ratio = explicit_bound(9, bits) / explicit_bound(9, bits + 1)
        assert ratio == pytest.approx((2 ** (bits + 1) - 1) / (2 ** bits - 1))


def test_norm_lower_bound_holds(grid_basis):
    mu = incoherence(grid_basis)
    bound = norm_lower_bound(grid_basis.n, grid_basis.r, mu)
    for seed in range(30):
        assert random_bandlimited(grid_basis, seed).l2_norm >= bound * (1 - 1e-9)


def test_error_report_fields(ring_bases):
    _, basis = ring_bases
    f = random_bandlimited(basis, 3)
    q = np.sign(f.values)
    report = error_report(basis, f, q, 1)
    assert isinstance(report, ErrorReport)
    assert all(value >= 0 for value in report.to_dict().values())
    assert abs(report.relative * f.l2_norm - report.qe) <= 1e-12
    assert report.bound_explicit == explicit_bound(basis.r, 1)
    assert report.bound_thm31 == bound_curves(basis.n, basis.r, 1, incoherence(basis)).thm31
