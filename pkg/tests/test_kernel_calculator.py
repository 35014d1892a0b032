"""
Тесты калькулятора ядер
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from models import (
    Kernel, SemigroupOrder, GapEvaluation, DomainError, ConfigurationError, UnsupportedConfigurationError
)
from calculations import KernelCalculator

calculator = KernelCalculator()
unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, exclude_max=True)


def test_bare_series_within_abel_bound():
    kernel = Kernel.torus_log(1, 64)
    x = ((np.arange(64) + 0.5) / 64)[:, None]
    series = calculator.profile(kernel, 0.0, x)
    exact = -np.log(2 * np.sin(np.pi * x[:, 0])) / np.pi
    bounds = np.array([calculator.tail_bound(kernel, 0.0, xi) for xi in x[:, 0]])
    assert np.all(np.abs(series - exact) <= bounds + 1e-12)


def test_regularized_series_within_tail_bound():
    kernel = Kernel.torus_log(1, 64)
    eps = 0.01
    x = np.linspace(0.0, 0.99, 50)[:, None]
    series = calculator.profile(kernel, eps, x)
    exact = calculator.analytic_profile(kernel, eps, x)
    assert np.max(np.abs(series - exact)) <= calculator.tail_bound(kernel, eps) + 1e-12


def test_torus_mean_is_zero(torus2):
    grid = calculator.grid_profile(torus2, 0.01, 32)
    assert abs(grid.mean()) < 1e-12


def test_free_log_regularized_diagonal_closed_form(free2):
    eps = 1e-3
    expected = -0.5 * (np.log(4 * eps) - np.euler_gamma)
    assert calculator.diagonal_value(free2, eps) == pytest.approx(expected, rel=1e-12)
    assert calculator.eval_regularized(free2, eps, [0.2, 0.3], [0.2, 0.3]) == pytest.approx(expected, rel=1e-12)


def test_free_log_regularized_approaches_bare_far_away(free2):
    value = calculator.eval_regularized(free2, 1e-4, [0.0, 0.0], [0.6, 0.8])
    assert value == pytest.approx(-np.log(1.0), abs=1e-12)


def test_gradient_matches_finite_difference(torus2):
    x, y, eps, h = np.array([0.31, 0.72]), np.array([0.05, 0.4]), 0.02, 1e-5
    gradient = calculator.eval_gradient(torus2, eps, x, y)
    for axis in range(2):
        step = np.zeros(2)
        step[axis] = h
        difference = (calculator.eval_regularized(torus2, eps, x + step, y)
                      - calculator.eval_regularized(torus2, eps, x - step, y)) / (2 * h)
        assert gradient[axis] == pytest.approx(difference, rel=1e-6, abs=1e-8)


def test_closed_form_gradient_matches_series():
    kernel = Kernel.torus_log(1, 256)
    x = np.array([[0.13], [0.37], [0.81]])
    series = calculator.gradient_profile(kernel, 0.05, x)
    closed = calculator.analytic_gradient(kernel, 0.05, x)
    assert np.allclose(series, closed, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.tuples(unit, unit), st.tuples(unit, unit))
def test_kernel_is_symmetric(x, y):
    kernel = Kernel.torus_log(2, 8)
    assert calculator.eval_regularized(kernel, 0.01, x, y) == pytest.approx(
        calculator.eval_regularized(kernel, 0.01, y, x), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=6), st.integers(min_value=0, max_value=10_000),
       st.floats(min_value=1e-3, max_value=0.2))
def test_h_stability_quadrature_matches_spectrum(count, seed, eps):
    kernel = Kernel.torus_log(2, 10)
    rng = np.random.default_rng(seed)
    atoms = rng.random((count, 2))
    charges = rng.standard_normal(count)
    charges -= charges.mean()
    quadrature, spectral = calculator.h_stability_pair(kernel, eps, atoms, charges)
    assert spectral >= 0
    assert quadrature == pytest.approx(spectral, rel=1e-9, abs=1e-9)


def test_semigroup_property(torus2):
    table = calculator.table(torus2)
    product = table.multipliers(SemigroupOrder.FULL, 0.01) * table.multipliers(SemigroupOrder.FULL, 0.03)
    assert np.allclose(product, table.multipliers(SemigroupOrder.FULL, 0.04), rtol=1e-12, atol=0)


def test_gap_closed_form_matches_series_in_two_dimensions():
    kernel = Kernel.torus_log(2, 96)
    eps = 0.01
    r = np.array([[0.1, 0.2], [0.35, 0.05], [0.5, 0.5]])
    closed = calculator.regularization_gap(kernel, eps, r)
    series = calculator.regularization_gap(kernel, eps, r, GapEvaluation.SERIES)
    assert np.allclose(closed, series, atol=5e-3)


def test_bare_diagonal_is_a_domain_error(free2):
    with pytest.raises(DomainError):
        calculator.eval_kernel(free2, [0.1, 0.1], [0.1, 0.1])
    with pytest.raises(DomainError):
        calculator.eval_regularized(free2, 0.0, [0.1, 0.1], [0.2, 0.1])


def test_zero_cutoff_is_rejected():
    with pytest.raises(ConfigurationError):
        calculator.table(Kernel.torus_log(1, 0))


def test_free_space_has_no_table(free2):
    with pytest.raises(UnsupportedConfigurationError):
        calculator.table(free2)


def test_wrong_point_dimension(torus2):
    with pytest.raises(ConfigurationError):
        calculator.eval_kernel(torus2, [0.1], [0.2])


def _cube_sum(table, weights, points):
    """Σ_k w_k cos(2πk·x) прямым перебором куба"""
    axes = np.meshgrid(*([table.frequencies] * table.dimension), indexing="ij")
    k = np.stack([a.ravel() for a in axes], axis=1)
    phases = 2 * np.pi * points @ k.T
    return np.cos(phases) @ weights.ravel()


@pytest.mark.parametrize("dimension,cutoff", [(2, 8), (3, 4)])
@pytest.mark.parametrize("eps", [0.0, 0.01])
def test_profile_matches_brute_force_cube_sum(dimension, cutoff, eps):
    kernel = Kernel.torus_log(dimension, cutoff)
    table = calculator.table(kernel)
    points = np.random.default_rng(dimension * 100 + cutoff).random((7, dimension))
    weights = table.coefficients * table.multipliers(SemigroupOrder.FULL, eps)
    expected = _cube_sum(table, weights, points)
    assert np.allclose(calculator.profile(kernel, eps, points), expected, rtol=1e-10, atol=1e-12)


def test_gradient_is_isotropic_under_axis_swap(torus2):
    first = calculator.eval_gradient(torus2, 0.02, [0.3, 0.1], [0.0, 0.0])
    second = calculator.eval_gradient(torus2, 0.02, [0.1, 0.3], [0.0, 0.0])
    assert first[0] == pytest.approx(second[1], abs=1e-12)
    assert first[1] == pytest.approx(second[0], abs=1e-12)


@pytest.mark.parametrize("offset", [0.1, 0.2, 0.25, 0.7])
def test_bare_gradient_in_one_dimension_is_cotangent(offset):
    kernel = Kernel.torus_log(1, 64)
    gradient = calculator.eval_gradient(kernel, 0.0, [offset], [0.0])
    assert gradient[0] == pytest.approx(-1 / np.tan(np.pi * offset), rel=1e-12)
    if offset == 0.25:
        assert gradient[0] == pytest.approx(-1.0, rel=1e-12)


def test_bare_gradient_in_two_dimensions_matches_finite_difference():
    kernel = Kernel.torus_log(2, 64)
    r, h = np.array([0.3, 0.1]), 1e-5
    gradient = calculator.eval_gradient(kernel, 0.0, r, [0.0, 0.0])
    for axis in range(2):
        step = np.zeros(2)
        step[axis] = h
        difference = (calculator.profile(kernel, 2e-4, r + step)[0]
                      - calculator.profile(kernel, 2e-4, r - step)[0]) / (2 * h)
        assert gradient[axis] == pytest.approx(difference, abs=1e-6)


def test_bare_gradient_on_diagonal_is_a_domain_error(torus1):
    with pytest.raises(DomainError):
        calculator.eval_gradient(torus1, 0.0, [0.3], [0.3])
