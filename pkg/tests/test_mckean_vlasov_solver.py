"""
Тесты решателя уравнения Маккина-Власова
"""

import numpy as np
import pytest

from models import BaseMeasure, ConfigurationError, Domain, Kernel, PdeState, Potential, UnsupportedConfigurationError
from calculations import McKeanVlasovSolver
from calculations.mckean_vlasov_solver import kernel_symbol

solver = McKeanVlasovSolver(save_every=5)


def test_heat_equation_decay(torus1, zero1):
    amplitude, cells, t_end = 0.6, 64, 0.05
    initial = solver.initial_state(BaseMeasure.single_mode(Domain.torus(1), amplitude, cells), cells, 0.01)
    trajectory = solver.mv_solve(initial, torus1, zero1, t_end, interacting=False)
    centers = (np.arange(cells) + 0.5) / cells
    expected = 1.0 + amplitude * np.exp(-4 * np.pi ** 2 * t_end) * np.cos(2 * np.pi * centers)
    assert trajectory.times[-1] == pytest.approx(t_end)
    assert np.allclose(trajectory.final, expected, rtol=1e-6, atol=1e-9)


def test_uniform_density_is_stationary(torus2):
    domain = Domain.torus(2)
    initial = solver.initial_state(BaseMeasure.uniform(domain), 16, 0.005)
    trajectory = solver.mv_solve(initial, torus2, Potential.zero(domain), 0.02, eps=0.01)
    assert np.allclose(trajectory.final, 1.0, atol=1e-12)


def test_free_energy_is_nonincreasing(torus1, zero1):
    initial = solver.initial_state(BaseMeasure.two_bump(Domain.torus(1), 64), 64, 1e-3)
    trajectory = solver.mv_solve(initial, torus1, zero1, 0.03, eps=0.01)
    assert np.all(np.diff(trajectory.free_energy) <= 1e-7)
    assert max(abs(c) for c in trajectory.mass_corrections) < 1e-8
    assert np.mean(trajectory.final) == pytest.approx(1.0, abs=1e-12)


def test_save_times_are_hit_exactly(torus1, zero1):
    initial = solver.initial_state(BaseMeasure.single_mode(Domain.torus(1), 0.3, 32), 32, 0.004)
    trajectory = solver.mv_solve(initial, torus1, zero1, 0.02, save_times=[0.005, 0.013])
    for t in (0.005, 0.013, 0.02):
        assert any(abs(s - t) < 1e-12 for s in trajectory.times)
    saved = trajectory.times.index(min(trajectory.times, key=lambda s: abs(s - 0.013)))
    assert np.allclose(trajectory.density_at(trajectory.times[saved]), trajectory.densities[saved], atol=1e-12)


def test_symbol_vanishes_at_zero_mode():
    symbol = kernel_symbol(Kernel.torus_log(1, 8), 0.0, 32)
    k = np.fft.fftfreq(32, d=1.0 / 32)
    assert symbol[0] == 0.0
    assert np.all(symbol[np.abs(k) > 8] == 0.0)
    assert symbol[1] == pytest.approx(1.0 / (2 * np.pi))


def test_initial_state_checks_mass():
    with pytest.raises(ValueError):
        PdeState(density=np.full(8, 2.0), dt=0.01)


def test_solver_rejects_unsupported_setups(free2, torus1, zero1):
    initial = solver.initial_state(BaseMeasure.uniform(Domain.torus(1)), 16, 0.01)
    with pytest.raises(UnsupportedConfigurationError):
        solver.mv_solve(initial, free2, zero1, 0.1)
    with pytest.raises(ConfigurationError):
        solver.mv_solve(initial, Kernel.torus_log(2, 8), zero1, 0.1)
    with pytest.raises(ConfigurationError):
        solver.mv_solve(initial, torus1, zero1, 0.0)
