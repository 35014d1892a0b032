"""
Тесты интегратора системы частиц
"""

import numpy as np
import pytest

from models import (
    Configuration, ConfigurationError, Domain, IntegrationError, Kernel, Potential, PotentialKind, SdeState
)
from calculations import SdeIntegrator
from calculations.sde_integrator import noise_generators

integrator = SdeIntegrator()


def _state(points, dt=0.01, force_cap=None, domain=None) -> SdeState:
    domain = domain or Domain.torus(np.shape(points)[1])
    return SdeState.initial(Configuration.from_points(domain, points), dt, eps_reg=0.01, force_cap=force_cap)


def test_spectral_force_matches_pairwise_sum(torus2, kernel_calculator, rng):
    points = rng.random((6, 2))
    force = integrator.interaction_force(torus2, 0.01, points)
    expected = np.zeros_like(points)
    for i in range(6):
        for j in range(6):
            if i != j:
                delta = torus2.domain.displacement(points[i:i + 1], points[j:j + 1])
                expected[i] += kernel_calculator.gradient_profile(torus2, 0.01, delta)[0]
    assert np.allclose(force, expected / 6, atol=1e-10)


@pytest.mark.parametrize("kernel_name", ["torus2", "free2"])
def test_interaction_forces_cancel(kernel_name, request, rng):
    kernel = request.getfixturevalue(kernel_name)
    force = integrator.interaction_force(kernel, 0.01, rng.random((7, 2)))
    assert np.allclose(force.sum(axis=0), 0.0, atol=1e-10)


def test_noninteracting_step_is_pure_diffusion(torus1, zero1):
    state = _state([[0.2], [0.95]])
    noise = np.array([[1.0], [0.5]])
    moved = integrator.sde_step(state, torus1, zero1, [], interacting=False, noise=noise)
    expected = np.mod(np.array([[0.2], [0.95]]) + np.sqrt(0.02) * noise, 1.0)
    assert np.allclose(moved.config.points, expected)
    assert moved.time == pytest.approx(0.01)


def test_force_cap_limits_drift(torus1):
    potential = Potential(domain=Domain.torus(1), kind=PotentialKind.SINGLE_MODE, amplitude=50.0)
    state = _state([[0.25], [0.6]], force_cap=1.0)
    moved = integrator.sde_step(state, torus1, potential, [], interacting=False, noise=np.zeros((2, 1)))
    shift = torus1.domain.displacement(moved.config.points, state.config.points)
    assert np.all(np.abs(shift) <= state.dt * 1.0 + 1e-12)
    assert moved.cap_activations == 2


def test_default_force_cap():
    state = _state([[0.1]], dt=0.04)
    assert state.force_cap == pytest.approx(50.0)


def test_step_above_limit_is_rejected(torus1, zero1):
    with pytest.raises(ConfigurationError):
        integrator.sde_step(_state([[0.1], [0.5]], dt=0.1), torus1, zero1, [], noise=np.zeros((2, 1)), dt_max=0.05)


def test_non_finite_position_raises(torus1, zero1):
    state = _state([[0.1], [0.5]])
    with pytest.raises(IntegrationError) as excinfo:
        integrator.sde_step(state, torus1, zero1, [], noise=np.full((2, 1), np.inf))
    assert excinfo.value.pair_distance == pytest.approx(0.4)


def test_run_is_reproducible_and_stays_on_torus(torus2, stream, rng):
    potential = Potential.zero(Domain.torus(2))
    state = _state(rng.random((5, 2)))
    first, snapshots = integrator.run_sde(state, torus2, potential, 10, stream, snapshot_every=5)
    second, _ = integrator.run_sde(state, torus2, potential, 10, stream)
    assert np.array_equal(first.config.points, second.config.points)
    assert np.all((first.config.points >= 0) & (first.config.points < 1))
    assert first.time == pytest.approx(0.1)
    assert len(snapshots) == 3 * 5
    assert list(snapshots.columns) == ["t", "particle", "x0", "x1"]


def test_noise_streams_are_per_particle(stream):
    first = [g.standard_normal() for g in noise_generators(stream, 3)]
    second = [g.standard_normal() for g in noise_generators(stream, 4)]
    assert first == second[:3]


def test_advance_shortens_last_step(torus1, zero1, stream):
    state = _state([[0.1], [0.5]], dt=0.01)
    advanced = integrator.advance(state, torus1, zero1, 0.035, noise_generators(stream, 2))
    assert advanced.time == pytest.approx(0.035)
    assert advanced.dt == 0.01


def test_free_space_quadratic_confinement(free2, stream, rng):
    domain = free2.domain
    potential = Potential(domain=domain, kind=PotentialKind.QUADRATIC, amplitude=1.0)
    state = SdeState.initial(Configuration.from_points(domain, rng.random((4, 2)) - 0.5), 0.005, eps_reg=0.01)
    final, _ = integrator.run_sde(state, free2, potential, 20, stream)
    assert np.all(np.isfinite(final.config.points))


def test_ornstein_uhlenbeck_variance_within_weak_order(stream):
    kernel = Kernel.free_log(1)
    potential = Potential(domain=kernel.domain, kind=PotentialKind.QUADRATIC, amplitude=1.0)
    dt, steps = 0.05, 40
    state = SdeState.initial(Configuration.from_points(kernel.domain, np.zeros((4000, 1))), dt, eps_reg=0.0)
    final, _ = integrator.run_sde(state, kernel, potential, steps, stream, interacting=False)
    exact = 1.0 - np.exp(-2 * dt * steps)
    assert np.var(final.config.points[:, 0]) == pytest.approx(exact, abs=3 * dt)


def test_pure_diffusion_increment_variance(torus1, zero1, stream, rng):
    dt, particles, steps = 1e-4, 200, 500
    state = _state(rng.random((particles, 1)), dt=dt)
    generators = noise_generators(stream, particles)
    increments = []
    for _ in range(steps):
        moved = integrator.sde_step(state, torus1, zero1, generators, interacting=False)
        increments.append(torus1.domain.displacement(moved.config.points, state.config.points))
        state = moved
    variance = np.var(np.concatenate(increments))
    assert variance == pytest.approx(2 * dt, rel=0.05)


def test_free_log_pair_one_step_map():
    kernel = Kernel.free_log(2)
    zero = Potential.zero(kernel.domain)
    dt = 0.01
    state = SdeState.initial(Configuration.from_points(kernel.domain, [[-0.5, 0.0], [0.5, 0.0]]), dt, eps_reg=0.0)
    moved = integrator.sde_step(state, kernel, zero, [], noise=np.zeros((2, 2)))
    # снос каждой частицы (1/N)·r/|r|^2 = 1/2 при |r| = 1, расстояние растет на 2·(1/2)·dt
    assert np.allclose(moved.config.points, [[-0.5 - 0.5 * dt, 0.0], [0.5 + 0.5 * dt, 0.0]], atol=1e-14)
    separation = np.linalg.norm(moved.config.points[1] - moved.config.points[0])
    assert separation == pytest.approx(1.0 + dt, rel=1e-12)


def test_relabeling_particles_and_streams_permutes_trajectory(torus2, stream, rng):
    zero = Potential.zero(Domain.torus(2))
    points = rng.random((6, 2))
    order = rng.permutation(6)
    generators = noise_generators(stream, 6)
    fresh = noise_generators(stream, 6)
    relabeled = [fresh[i] for i in order]
    state, shuffled = _state(points), _state(points[order])
    for _ in range(5):
        state = integrator.sde_step(state, torus2, zero, generators)
        shuffled = integrator.sde_step(shuffled, torus2, zero, relabeled)
    difference = torus2.domain.displacement(shuffled.config.points, state.config.points[order])
    assert np.allclose(difference, 0.0, atol=1e-10)
