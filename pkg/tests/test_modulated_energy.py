"""
Тесты модулированной энергии
"""

import numpy as np
import pytest

from models import (
    BaseMeasure, ConfigurationError, Domain, ModulatedEnergyRow, UnsupportedConfigurationError, Verdict
)
from calculations import ModulatedEnergyTracker

tracker = ModulatedEnergyTracker()


def test_uniform_reference_is_constant(torus1, uniform1, zero1):
    measures = tracker.reference_measures(torus1, uniform1, zero1, [0.0, 0.1, 0.5], 1e-3, 32, 1e-3)
    assert set(measures) == {0.0, 0.1, 0.5}
    assert all(m is uniform1 for m in measures.values())


def test_reference_measures_diffuse(torus1, zero1):
    measure = BaseMeasure.single_mode(Domain.torus(1), 0.5, 32)
    measures = tracker.reference_measures(torus1, measure, zero1, [0.0, 0.02], 1e-3, 32, 1e-3, interacting=False)
    late = measures[0.02]
    assert np.ptp(late.density) < np.ptp(measure.density)
    assert np.mean(late.density) == pytest.approx(1.0)


def test_initial_energy_matches_closed_form(torus1, zero1, stream):
    measure = BaseMeasure.single_mode(Domain.torus(1), 0.5, 32)
    rows, fits, verdict = tracker.modulated_energy_sweep(
        torus1, measure, zero1, [4, 8, 16], [0.0], 300, stream, eps_reg=0.01)
    assert len(rows) == 3
    for row in rows:
        closed = tracker.energy_calculator.mean_energy(torus1, 0.01, measure, row.n) / row.n
        assert abs(row.mean - closed) <= 4 * row.standard_error + 1e-12
    assert len(fits) == 1
    assert verdict in (Verdict.PASS, Verdict.INCONCLUSIVE)


def test_sweep_is_reproducible(torus1, zero1, stream):
    measure = BaseMeasure.single_mode(Domain.torus(1), 0.4, 32)
    kwargs = dict(dt=1e-3, eps_reg=0.01, pde_cells=32, pde_dt=1e-3)
    first, _, _ = tracker.modulated_energy_sweep(torus1, measure, zero1, [4, 8], [0.0, 0.01], 3, stream, **kwargs)
    second, _, _ = tracker.modulated_energy_sweep(torus1, measure, zero1, [4, 8], [0.0, 0.01], 3, stream, **kwargs)
    assert [(r.n, r.t) for r in first] == [(4, 0.0), (4, 0.01), (8, 0.0), (8, 0.01)]
    assert [r.mean for r in first] == [r.mean for r in second]
    assert all(np.isfinite(r.mean) for r in first)


def test_slope_of_resolved_means():
    rows = [ModulatedEnergyRow(n=n, t=0.5, mean=2.0 / n, standard_error=1e-4, replicas=10) for n in (8, 16, 32, 64)]
    fit = ModulatedEnergyTracker._fit(rows, 0.5, (-1.3, -0.7))
    assert fit.slope == pytest.approx(-1.0)
    assert fit.in_range


def test_unresolved_means_are_not_fitted():
    rows = [ModulatedEnergyRow(n=n, t=0.0, mean=1e-5, standard_error=1e-3, replicas=10) for n in (8, 16, 32)]
    fit = ModulatedEnergyTracker._fit(rows, 0.0, (-1.3, -0.7))
    assert np.isnan(fit.slope)
    assert not fit.in_range


def test_sweep_argument_checks(torus1, free2, uniform1, zero1, stream):
    with pytest.raises(ConfigurationError):
        tracker.modulated_energy_sweep(torus1, uniform1, zero1, [4], [0.0], 1, stream)
    with pytest.raises(ConfigurationError):
        tracker.modulated_energy_sweep(torus1, uniform1, zero1, [4], [-0.1], 2, stream)
    with pytest.raises(UnsupportedConfigurationError):
        tracker.modulated_energy_sweep(free2, uniform1, zero1, [4], [0.0], 2, stream)
