"""
Тесты поиска нижней границы энергии отжигом
"""

import numpy as np
import pandas as pd
import pytest

from models import BaseMeasure, ConfigurationError, Domain, UnsupportedConfigurationError, Verdict
from calculations import LowerBoundProbe

probe = LowerBoundProbe(sweeps=40)


def _frame(ratios, above=True) -> pd.DataFrame:
    return pd.DataFrame({"ratio": ratios, "above_floor": [above] * len(ratios)})


def test_regularized_minimum_respects_floor(torus1, uniform1, stream, kernel_calculator):
    frame, verdict = probe.probe_lower_bound(torus1, uniform1, [2, 4, 8], 2, stream, eps=0.01)
    floor = -0.5 * kernel_calculator.diagonal_value(torus1, 0.01)
    assert list(frame["N"]) == [2, 4, 8]
    assert (frame["min_energy"] >= floor - 1e-9).all()
    assert frame["above_floor"].all()
    assert frame["min_energy"].iloc[-1] < 0.0
    assert verdict in tuple(Verdict)


def test_probe_is_reproducible(torus1, stream):
    measure = BaseMeasure.single_mode(Domain.torus(1), 0.3, 32)
    first, _ = probe.probe_lower_bound(torus1, measure, [3], 1, stream, eps=0.02)
    second, _ = probe.probe_lower_bound(torus1, measure, [3], 1, stream, eps=0.02)
    assert first["min_energy"].iloc[0] == second["min_energy"].iloc[0]


def test_verdict_rules():
    assert LowerBoundProbe._verdict(_frame([1.0, 1.2, 1.1, 1.3])) == Verdict.PASS
    assert LowerBoundProbe._verdict(_frame([0.1, 0.2, 5.0, 6.0])) == Verdict.FAIL
    assert LowerBoundProbe._verdict(_frame([1.0, 1.0], above=False)) == Verdict.FAIL
    assert LowerBoundProbe._verdict(_frame([1.0])) == Verdict.INCONCLUSIVE


def test_cluster_start_is_tight(rng):
    points = LowerBoundProbe._cluster(10, 2, rng)
    delta = Domain.torus(2).displacement(points[:, None, :], points[None, :, :])
    assert np.max(np.linalg.norm(delta, axis=-1)) <= 2.0 / 10 + 1e-12


def test_argument_checks(torus1, free2, uniform1, atomic1, stream):
    with pytest.raises(UnsupportedConfigurationError):
        probe.probe_lower_bound(torus1, atomic1, [4], 1, stream)
    with pytest.raises(UnsupportedConfigurationError):
        probe.probe_lower_bound(free2, uniform1, [4], 1, stream)
    with pytest.raises(ConfigurationError):
        probe.probe_lower_bound(torus1, uniform1, [4], 0, stream)
    with pytest.raises(ConfigurationError):
        probe.probe_lower_bound(torus1, uniform1, [1, 4], 1, stream)


@pytest.mark.parametrize("eps", [0.0, 0.01])
def test_two_particle_minimum_matches_grid_search(torus2, uniform2, stream, kernel_calculator, eps):
    # при N = 2 и равномерной мере I̊ = W_eps(x_1 - x_2)/2
    oracle = 0.5 * kernel_calculator.grid_profile(torus2, eps, 64).min()
    frame, _ = LowerBoundProbe(sweeps=200).probe_lower_bound(torus2, uniform2, [2], 3, stream, eps=eps)
    found = frame["min_energy"].iloc[0]
    assert oracle - 1e-4 <= found <= oracle + 2e-3
