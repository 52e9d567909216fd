import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigmavar.lattice import build_grid, dispersion

TWO_PI = 2.0 * math.pi


def test_three_mode_line():
    grid = build_grid(1, math.pi, 3, include_zero=True)
    np.testing.assert_allclose(
        np.sort(grid.modes[:, 0]), [-2 * math.pi / 3, 0.0, 2 * math.pi / 3],
        atol=1e-15)
    np.testing.assert_allclose(grid.weights, 1.0 / 3.0, rtol=1e-15)
    assert grid.includes_zero_mode
    assert grid.zero_index is not None


def test_single_mode_plane():
    grid = build_grid(2, 1.0, 1, include_zero=True)
    assert grid.n_modes == 1
    np.testing.assert_allclose(grid.modes, [[0.0, 0.0]])
    np.testing.assert_allclose(grid.weights, [(2.0 / TWO_PI) ** 2], rtol=1e-15)
    assert grid.weights[0] == pytest.approx(1.0 / math.pi ** 2)


def test_weight_sum_64_squared():
    grid = build_grid(2, 10.0, 64, include_zero=False)
    assert grid.n_modes == 64 ** 2
    total = float(np.sum(grid.weights))
    assert total == pytest.approx(400.0 / (4 * math.pi ** 2), rel=1e-13)
    assert not grid.includes_zero_mode
    assert grid.zero_index is None


@settings(max_examples=40, deadline=None)
@given(dim=st.integers(1, 3),
       k_max=st.floats(0.1, 30.0),
       n=st.integers(1, 9),
       include_zero=st.booleans())
def test_weight_sum_exactness(dim, k_max, n, include_zero):
    if include_zero != (n % 2 == 1):
        n += 1
    grid = build_grid(dim, k_max, n, include_zero)
    expected = (2.0 * k_max / TWO_PI) ** dim
    assert float(np.sum(grid.weights)) == pytest.approx(expected, rel=1e-12)


def test_refinement_second_order():
    # midpoint sums of a smooth function converge at second order in dk
    k_max = 4.0
    exact = (math.sqrt(math.pi) * math.erf(k_max)) ** 2 / (2 * math.pi) ** 2
    errors = []
    for n in (8, 16, 32):
        grid = build_grid(2, k_max, n, include_zero=False)
        val = float(np.sum(
            grid.weights * np.exp(-np.sum(grid.modes ** 2, axis=1))))
        errors.append(abs(val - exact))
    assert errors[1] < errors[0] / 3.0
    assert errors[2] < errors[1] / 3.0


def test_ball_measure_convergence():
    # counting weights inside |k| < kappa approaches the ball's measure
    kappa = 2.0
    target = math.pi * kappa ** 2 / (2 * math.pi) ** 2
    prev = None
    for n in (31, 61, 121):
        grid = build_grid(2, 4.0, n, include_zero=True)
        inside = grid.mode_norms() < kappa
        err = abs(float(np.sum(grid.weights[inside])) - target)
        if prev is not None:
            assert err < prev
        prev = err
    assert prev < 0.05 * target


def test_zero_mode_unique():
    grid = build_grid(3, 2.0, 5, include_zero=True)
    zeros = np.nonzero(grid.mode_norms() == 0.0)[0]
    assert zeros.tolist() == [grid.zero_index]


def test_midpoint_grid_never_contains_zero():
    for n in (2, 4, 8):
        grid = build_grid(1, 1.0, n, include_zero=False)
        assert np.all(grid.mode_norms() > 0)


def test_reflection_is_exact_permutation():
    grid = build_grid(2, 3.0, 4, include_zero=False)
    np.testing.assert_array_equal(grid.modes[grid.reflection], -grid.modes)
    grid = build_grid(3, 1.5, 3, include_zero=True)
    np.testing.assert_array_equal(grid.modes[grid.reflection], -grid.modes)


def test_rejects_parity_mismatch():
    with pytest.raises(ValueError, match="zero mode"):
        build_grid(1, 1.0, 4, include_zero=True)
    with pytest.raises(ValueError, match="contains k = 0"):
        build_grid(1, 1.0, 3, include_zero=False)


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_grid(1, -1.0, 3, include_zero=True)
    with pytest.raises(ValueError):
        build_grid(1, 0.0, 3, include_zero=True)
    with pytest.raises(ValueError):
        build_grid(4, 1.0, 3, include_zero=True)
    with pytest.raises(ValueError):
        build_grid(1, 1.0, 0, include_zero=False)


def test_grid_is_immutable():
    grid = build_grid(1, 1.0, 3, include_zero=True)
    with pytest.raises(ValueError):
        grid.modes[0, 0] = 5.0


def test_dispersion_values():
    grid = build_grid(2, 8.5, 17, include_zero=True)  # integer modes -8..8
    disp0 = dispersion(grid, 1.0)
    assert disp0.epsilon[grid.zero_index] == pytest.approx(1.0)

    def at(kx, ky, disp):
        idx = np.nonzero((grid.modes[:, 0] == kx)
                         & (grid.modes[:, 1] == ky))[0][0]
        return disp.epsilon[idx]

    assert at(3.0, 4.0, dispersion(grid, 0.0)) == pytest.approx(5.0)
    assert at(1.0, 0.0, disp0) == pytest.approx(math.sqrt(2.0))


def test_dispersion_invariants():
    grid = build_grid(2, 5.0, 9, include_zero=True)
    mu = 0.7
    eps = dispersion(grid, mu).epsilon
    assert np.all(eps >= mu)
    assert np.sum(eps == mu) == 1  # equality only at k = 0
    order = np.argsort(grid.mode_norms())
    assert np.all(np.diff(eps[order]) >= -1e-15)


def test_dispersion_rejects_negative_mu():
    grid = build_grid(1, 1.0, 3, include_zero=True)
    with pytest.raises(ValueError):
        dispersion(grid, -0.5)
