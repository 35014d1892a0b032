"""
Тесты выборки MALA из меры Гиббса
"""

import numpy as np
import pytest
from scipy import integrate, special

from models import (
    BaseMeasure, ChainConfig, ConfigurationError, Domain, Kernel, Potential, PotentialKind, TuningError
)
from calculations import GibbsSampler
from calculations.gibbs_sampler import GibbsTarget

sampler = GibbsSampler()


@pytest.fixture
def cosine1() -> Potential:
    return Potential(domain=Domain.torus(1), kind=PotentialKind.SINGLE_MODE, amplitude=1.0)


@pytest.mark.parametrize("beta", [1.0, 0.5])
def test_target_gradient_matches_finite_difference(torus1, cosine1, rng, beta):
    reference = BaseMeasure.single_mode(Domain.torus(1), 0.4, 32)
    target = GibbsTarget(torus1, 0.02, cosine1, 4, beta=beta, reference=reference)
    x = rng.random((4, 1)) * 0.8 + 0.1
    gradient = target.gradient(x)
    h = 1e-6
    for i in range(4):
        step = np.zeros_like(x)
        step[i, 0] = h
        difference = (target.potential_energy(x + step) - target.potential_energy(x - step)) / (2 * h)
        assert gradient[i, 0] == pytest.approx(difference, rel=1e-5, abs=1e-7)


@pytest.mark.slow
def test_noninteracting_chain_samples_boltzmann_weight(torus1, cosine1, stream):
    chain = ChainConfig(length=3000, burn_in=500, step_size=0.05, chains=4)
    run = sampler.sample_gibbs(torus1, cosine1, 2, chain, stream, interacting=False)
    expected = -2 * special.i1(1.0) / special.i0(1.0)
    assert abs(run.mean_energy - expected) <= 5 * run.mean_energy_se + 0.02
    assert 0.2 < run.acceptance_rate < 0.9
    assert not run.flagged
    assert len(run.energies) == 4 * 3000


def test_chains_are_reproducible(torus1, cosine1, stream):
    chain = ChainConfig(length=200, burn_in=50, chains=2)
    first = sampler.sample_gibbs(torus1, cosine1, 3, chain, stream, eps=0.02, keep_states=True)
    second = sampler.sample_gibbs(torus1, cosine1, 3, chain, stream, eps=0.02, keep_states=True)
    assert np.array_equal(first.energies, second.energies)
    assert first.states.shape == (2 * 200, 3, 1)
    assert np.all((first.states >= 0) & (first.states < 1))


def test_acceptance_checks():
    with pytest.raises(TuningError):
        GibbsSampler._check_acceptance(0.01, False)
    with pytest.raises(TuningError):
        GibbsSampler._check_acceptance(0.97, False)
    GibbsSampler._check_acceptance(0.97, True)
    GibbsSampler._check_acceptance(0.5, False)


def test_argument_checks(torus1, free2, cosine1, stream):
    chain = ChainConfig(length=10, burn_in=0, chains=1)
    with pytest.raises(ConfigurationError):
        sampler.sample_gibbs(torus1, cosine1, 0, chain, stream)
    with pytest.raises(ConfigurationError):
        GibbsTarget(torus1, 0.0, cosine1, 3, beta=-1.0)
    with pytest.raises(ConfigurationError):
        sampler.sample_gibbs(free2, Potential.zero(free2.domain), 3, chain, stream,
                             reference=BaseMeasure.uniform(free2.domain))


def _boltzmann_average(potential: Potential, f) -> float:
    weight = lambda x: np.exp(-potential.value(np.array([[x]]))[0])
    mass = integrate.quad(weight, -np.inf, np.inf)[0]
    return integrate.quad(lambda x: f(x) * weight(x), -np.inf, np.inf)[0] / mass


@pytest.mark.slow
def test_double_well_chain_matches_quadrature(stream):
    kernel = Kernel.free_log(1)
    potential = Potential(domain=kernel.domain, kind=PotentialKind.DOUBLE_WELL, amplitude=1.0)
    chain = ChainConfig(length=4000, burn_in=1000, step_size=0.1, chains=4)
    run = sampler.sample_gibbs(kernel, potential, 1, chain, stream, interacting=False, keep_states=True)
    expected_energy = _boltzmann_average(potential, lambda x: (x ** 2 - 1.0) ** 2)
    assert abs(run.mean_energy - expected_energy) <= 5 * run.mean_energy_se + 0.02
    x = run.states[:, 0, 0]
    assert np.mean(x ** 2) == pytest.approx(_boltzmann_average(potential, lambda t: t ** 2), abs=0.08)
    # симметрия ям
    assert abs(np.mean(x > 0) - 0.5) <= 0.1
    assert 0.2 < run.acceptance_rate < 0.9
