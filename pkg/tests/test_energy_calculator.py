"""
Тесты разложения энергии взаимодействия
"""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from models import (
    BaseMeasure, Configuration, Domain, DomainError, FluctuationNormalization, Kernel,
    UnsupportedConfigurationError
)
from calculations import EnergyCalculator

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def test_direct_and_spectral_pair_energy_agree(energy_calculator, torus2, rng):
    points = rng.random((9, 2))
    direct = energy_calculator.pair_energy_direct(torus2, 0.02, points)
    spectral = energy_calculator.pair_energy_spectral(torus2, 0.02, points)
    assert direct == pytest.approx(spectral, rel=1e-10, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_energy_is_permutation_invariant(seed):
    calculator = EnergyCalculator()
    kernel_domain = Domain.torus(1)
    measure = BaseMeasure.single_mode(kernel_domain, 0.4, 32)
    kernel = Kernel.torus_log(1, 24)
    rng = np.random.default_rng(seed)
    config = Configuration.from_points(kernel_domain, rng.random((7, 1)))
    shuffled = config.permuted(rng.permutation(7))
    first = calculator.interaction_energy(kernel, 0.01, measure, config).total
    second = calculator.interaction_energy(kernel, 0.01, measure, shuffled).total
    assert first == pytest.approx(second, rel=1e-12, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=12))
def test_full_energy_is_nonnegative(seed, n):
    calculator = EnergyCalculator()
    domain = Domain.torus(1)
    kernel = Kernel.torus_log(1, 32)
    measure = BaseMeasure.two_bump(domain, 64)
    config = Configuration.from_points(domain, np.random.default_rng(seed).random((n, 1)))
    assert calculator.full_energy(kernel, 0.005, measure, config) >= -1e-10


def test_uniform_measure_has_no_cross_or_mean_term(energy_calculator, torus2, uniform2, rng):
    config = Configuration.from_points(uniform2.domain, rng.random((6, 2)))
    breakdown = energy_calculator.interaction_energy(torus2, 0.01, uniform2, config)
    assert breakdown.cross_term == 0.0
    assert breakdown.mean_term == 0.0
    assert breakdown.total == pytest.approx(breakdown.pair_term)


def test_lattice_energy_matches_direct_evaluation(energy_calculator, torus2, uniform2):
    points = EnergyCalculator.lattice_points(2, 4)
    config = Configuration.from_points(uniform2.domain, points)
    direct = energy_calculator.interaction_energy(torus2, 0.01, uniform2, config).total
    assert energy_calculator.lattice_energy(torus2, 0.01, 4) == pytest.approx(direct, rel=1e-9, abs=1e-10)


def test_energy_from_counts_matches_breakdown(energy_calculator, torus1, atomic1):
    table = energy_calculator.atom_table(torus1, 0.01, atomic1)
    counts = np.array([[3, 1, 1], [0, 5, 0], [2, 0, 3]])
    from_counts = energy_calculator.energy_from_counts(table, atomic1.weights, counts)
    for row, expected in zip(counts, from_counts):
        points = np.repeat(atomic1.atoms, row, axis=0)
        config = Configuration.from_points(atomic1.domain, points)
        total = energy_calculator.interaction_energy(torus1, 0.01, atomic1, config).total
        assert total == pytest.approx(expected, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("normalization", list(FluctuationNormalization))
def test_mean_energy_matches_enumeration(torus1, atomic1, normalization):
    calculator = EnergyCalculator(normalization=normalization)
    n, eps = 3, 0.02
    expected = 0.0
    for labels in itertools.product(range(3), repeat=n):
        probability = float(np.prod(atomic1.weights[list(labels)]))
        config = Configuration.from_points(atomic1.domain, atomic1.atoms[list(labels)])
        expected += probability * calculator.interaction_energy(torus1, eps, atomic1, config).total
    assert calculator.mean_energy(torus1, eps, atomic1, n) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_uniform_mean_energy_is_zero(energy_calculator, torus2, uniform2):
    assert energy_calculator.mean_energy(torus2, 0.0, uniform2, 10) == 0.0


def test_batch_matches_single_configurations(energy_calculator, torus1, rng):
    measure = BaseMeasure.single_mode(Domain.torus(1), 0.5, 32)
    points = rng.random((5, 4, 1))
    batch = energy_calculator.batch_energies(torus1, 0.01, measure, points)
    single = [energy_calculator.interaction_energy(torus1, 0.01, measure,
                                                   Configuration.from_points(measure.domain, p)).total
              for p in points]
    assert np.allclose(batch, single, rtol=1e-10, atol=1e-12)


def test_coincident_points_with_bare_kernel(energy_calculator, torus1, uniform1):
    config = Configuration.from_points(uniform1.domain, [[0.2], [0.2], [0.7]])
    with pytest.raises(DomainError):
        energy_calculator.interaction_energy(torus1, 0.0, uniform1, config)


def test_negative_eps_is_rejected(energy_calculator, torus1, uniform1):
    config = Configuration.from_points(uniform1.domain, [[0.2], [0.7]])
    with pytest.raises(DomainError):
        energy_calculator.interaction_energy(torus1, -0.1, uniform1, config)


def test_free_space_continuous_measure_is_unsupported(energy_calculator, free2):
    measure = BaseMeasure.uniform(free2.domain)
    config = Configuration.from_points(free2.domain, [[0.1, 0.2], [0.3, 0.4]])
    with pytest.raises(UnsupportedConfigurationError):
        energy_calculator.interaction_energy(free2, 0.01, measure, config)


def test_two_particles_at_half_diagonal_match_lattice_sum(energy_calculator, uniform2):
    # Σ'(-1)^{m+n}/(m²+n²) = -π ln 2, поэтому W(½,½) = -ln2/(4π) и I̊ = W/2
    kernel = Kernel.torus_log(2, 64)
    config = Configuration.from_points(uniform2.domain, [[0.0, 0.0], [0.5, 0.5]])
    breakdown = energy_calculator.interaction_energy(kernel, 0.0, uniform2, config)
    assert breakdown.total == pytest.approx(-np.log(2) / (8 * np.pi), abs=5e-5)
    direct = energy_calculator.pair_energy_direct(kernel, 0.0, config.points)
    assert direct == pytest.approx(breakdown.total, rel=1e-9)


def test_coincident_free_space_particles_with_bare_kernel(energy_calculator, free2):
    measure = BaseMeasure.atomic(free2.domain, [[0.1, 0.1], [0.4, 0.3]])
    config = Configuration.from_points(free2.domain, [[0.2, 0.2], [0.2, 0.2], [0.5, 0.1]])
    with pytest.raises(DomainError):
        energy_calculator.interaction_energy(free2, 0.0, measure, config)
    regularized = energy_calculator.interaction_energy(free2, 0.01, measure, config)
    assert np.isfinite(regularized.total)


def test_coincident_particles_merge_for_atomic_torus_measure(energy_calculator, torus1, atomic1):
    config = Configuration.from_points(atomic1.domain, [[0.1], [0.1], [0.45]])
    breakdown = energy_calculator.interaction_energy(torus1, 0.0, atomic1, config)
    assert np.isfinite(breakdown.total)
