"""
Тесты минимизатора среднего поля
"""

import numpy as np
import pytest

from models import (
    ConfigurationError, ConvergenceError, Domain, Potential, PotentialKind, UnsupportedConfigurationError
)
from calculations import MeanFieldSolver

solver = MeanFieldSolver()


@pytest.fixture
def cosine1() -> Potential:
    return Potential(domain=Domain.torus(1), kind=PotentialKind.SINGLE_MODE, amplitude=0.5)


def test_noninteracting_minimizer_is_gibbs_density(torus1, cosine1):
    minimizer = solver.solve_minimizer(torus1, cosine1, 64, interacting=False)
    weight = np.exp(-cosine1.on_grid(64))
    assert np.allclose(minimizer.density, weight / weight.mean(), atol=1e-9)
    assert minimizer.z_mu == pytest.approx(weight.mean(), rel=1e-9)


def test_uniform_is_fixed_point_without_potential(torus1, zero1):
    minimizer = solver.solve_minimizer(torus1, zero1, 32)
    assert minimizer.iterations == 0
    assert np.allclose(minimizer.density, 1.0)
    assert minimizer.free_energy == pytest.approx(0.0, abs=1e-12)


def test_interacting_minimizer_solves_fixed_point(torus1, cosine1):
    minimizer = solver.solve_minimizer(torus1, cosine1, 64, eps=0.01)
    field = solver.convolve(torus1, 0.01, minimizer.density) + cosine1.on_grid(64)
    weight = np.exp(-field)
    assert np.allclose(minimizer.density, weight / weight.mean(), atol=1e-8)
    assert minimizer.residual < 1e-10
    assert minimizer.residual_history[-1] == minimizer.residual


def test_interaction_flattens_the_minimizer(torus1, cosine1):
    free = solver.solve_minimizer(torus1, cosine1, 64, interacting=False)
    repelled = solver.solve_minimizer(torus1, cosine1, 64, eps=0.01)
    assert np.ptp(repelled.density) < np.ptp(free.density)


def test_non_convergence_raises(torus1, cosine1):
    with pytest.raises(ConvergenceError) as excinfo:
        solver.solve_minimizer(torus1, cosine1, 64, damping=0.1, max_iter=2)
    assert len(excinfo.value.residuals) == 3


def test_argument_checks(torus1, free2, cosine1):
    with pytest.raises(ConfigurationError):
        solver.solve_minimizer(torus1, cosine1, 64, damping=0.0)
    with pytest.raises(ConfigurationError):
        solver.solve_minimizer(torus1, cosine1, 4)
    with pytest.raises(UnsupportedConfigurationError):
        solver.solve_minimizer(free2, Potential.zero(free2.domain), 32)
