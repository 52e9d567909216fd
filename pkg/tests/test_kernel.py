import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigmavar.errors import ConstraintViolationError
from sigmavar.kernel import (HermitianKernel, check_quantum_constraint,
                             is_psd, sqrt_psd, trace_weighted)
from sigmavar.lattice import build_grid


def grid_with(n_modes):
    return build_grid(1, 1.0, n_modes, include_zero=n_modes % 2 == 1)


def kernel(matrix):
    m = np.asarray(matrix, dtype=complex)
    return HermitianKernel.from_matrix(grid_with(m.shape[0]), m)


def test_construction_symmetrizes_and_records_defect():
    raw = np.array([[1.0, 0.2 + 0.1j], [0.2 - 0.3j, 2.0]])
    k = kernel(raw)
    np.testing.assert_allclose(k.entries, k.entries.conj().T)
    assert k.hermiticity_defect == pytest.approx(0.2)
    with pytest.raises(ValueError, match="not hermitian"):
        HermitianKernel.from_matrix(grid_with(2), raw, max_defect=1e-12)


def test_construction_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError, match="square"):
        kernel(np.zeros((2, 3)))
    with pytest.raises(ValueError, match="does not match grid"):
        HermitianKernel.from_matrix(grid_with(3), np.eye(2))
    with pytest.raises(ValueError, match="finite"):
        kernel(np.array([[np.nan]]))


def test_is_psd_identity():
    ok, lam = is_psd(kernel(np.eye(4)), tol=0.0)
    assert ok and lam == pytest.approx(1.0)


def test_is_psd_indefinite():
    ok, lam = is_psd(kernel(np.diag([1.0, -1.0])), tol=1e-9)
    assert not ok
    assert lam == pytest.approx(-1.0)


def test_is_psd_gram_matrix():
    rng = np.random.default_rng(0)
    g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    ok, lam = is_psd(kernel(g.conj().T @ g), tol=1e-10)
    assert ok and lam >= -1e-10


def test_sqrt_psd_identity_and_diagonal():
    np.testing.assert_allclose(sqrt_psd(kernel(np.eye(3))).entries, np.eye(3),
                               atol=1e-14)
    root = sqrt_psd(kernel(np.diag([4.0, 9.0])))
    np.testing.assert_allclose(root.entries, np.diag([2.0, 3.0]), atol=1e-14)


def test_sqrt_psd_round_trip():
    rng = np.random.default_rng(1)
    for n in (2, 5, 9):
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        k = kernel(g.conj().T @ g)
        root = sqrt_psd(k)
        err = np.linalg.norm(root.entries @ root.entries - k.entries)
        assert err <= 1e-9 * (1.0 + np.linalg.norm(k.entries))
        assert is_psd(root, 1e-12).is_psd


def test_sqrt_psd_clips_boundary_roundoff():
    k = kernel(np.diag([1.0, -1e-13]))
    root = sqrt_psd(k)
    assert root.entries[1, 1] == 0.0


def test_sqrt_psd_rejects_negative():
    with pytest.raises(ConstraintViolationError) as err:
        sqrt_psd(kernel(np.diag([1.0, -0.5])))
    assert err.value.min_eigenvalue == pytest.approx(-0.5)


def test_sqrt_monotone_on_commuting_diagonals():
    rng = np.random.default_rng(2)
    a = rng.uniform(0.0, 4.0, size=6)
    b = a - rng.uniform(0.0, 1.0, size=6).clip(max=a)
    ra = np.diag(sqrt_psd(kernel(np.diag(a))).entries).real
    rb = np.diag(sqrt_psd(kernel(np.diag(b))).entries).real
    assert np.all(ra - rb >= -1e-12)


def test_quantum_constraint_zero_pair():
    z = kernel(np.zeros((3, 3)))
    ok, lam = check_quantum_constraint(z, z, tol=0.0)
    assert ok and lam == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5.0, 5.0), min_size=1, max_size=5))
def test_quantum_constraint_boundary(bs):
    b = np.asarray(bs)
    a = kernel(np.diag(np.sqrt(1.0 + b * b) - 1.0))
    ok, lam = check_quantum_constraint(a, kernel(np.diag(b)), tol=1e-9)
    assert ok
    assert abs(lam) <= 1e-9


def test_quantum_constraint_violated():
    ok, lam = check_quantum_constraint(kernel([[0.0]]), kernel([[1.0]]),
                                       tol=1e-9)
    assert not ok
    assert lam == pytest.approx(1.0 - math.sqrt(2.0))


def test_quantum_constraint_even_in_b():
    rng = np.random.default_rng(3)
    raw = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    b = kernel(raw + raw.conj().T)
    a = kernel(np.diag(rng.uniform(0.0, 2.0, size=4)))
    plus = check_quantum_constraint(a, b, 1e-9)
    minus = check_quantum_constraint(
        a, kernel(-b.entries), 1e-9)
    assert plus.min_eigenvalue == pytest.approx(minus.min_eigenvalue,
                                                abs=1e-12)


def test_quantum_constraint_grid_mismatch():
    a = kernel(np.eye(2))
    other = HermitianKernel.from_matrix(
        build_grid(1, 2.0, 2, include_zero=False), np.eye(2))
    with pytest.raises(ValueError, match="different grids"):
        check_quantum_constraint(a, other, 1e-9)


def test_trace_weighted_two_modes():
    # grid weights 1/3 each: 1D midpoint grid with dk = 2 pi / 3
    grid = build_grid(1, 2 * math.pi / 3, 2, include_zero=False)
    np.testing.assert_allclose(grid.weights, [1 / 3, 1 / 3], rtol=1e-14)
    k = HermitianKernel.from_matrix(grid, np.eye(2))
    val = trace_weighted(k, [1.0, math.sqrt(2.0)])
    assert val == pytest.approx((1.0 + math.sqrt(2.0)) / 3.0)


def test_trace_weighted_zero_kernel():
    assert trace_weighted(kernel(np.zeros((3, 3))), np.ones(3)) == 0.0


def test_trace_weighted_matches_naive_loop():
    rng = np.random.default_rng(4)
    raw = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    k = kernel(raw + raw.conj().T)
    w = rng.uniform(0.5, 2.0, size=5)
    naive = sum(k.grid.weights[i] * w[i] * k.entries[i, i].real
                for i in range(5))
    assert trace_weighted(k, w) == pytest.approx(naive, rel=1e-13)


def test_trace_weighted_rejects_mismatch():
    with pytest.raises(ValueError, match="shape"):
        trace_weighted(kernel(np.eye(3)), np.ones(4))
    with pytest.raises(ValueError, match="finite"):
        trace_weighted(kernel(np.eye(3)), [1.0, np.inf, 1.0])
