"""
Тесты комбинаторики мультииндексов и моментов центрированного ядра
"""

from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from models import ConfigurationError, UnsupportedConfigurationError, Verdict, MultiIndex
from calculations import CorrelationMoments

moments = CorrelationMoments(chunk_size=1000)


@pytest.fixture
def centered(torus1, atomic1):
    return moments.centered_kernel(torus1, 0.05, atomic1)


def test_enumeration_visits_each_multiindex_once():
    indices = list(moments.enumerate_multiindices(3, 2))
    assert len(indices) == comb(6 + 2 - 1, 2)
    keys = {tuple(sorted(index.entries.items())) for index in indices}
    assert len(keys) == len(indices)


def test_two_particle_counts():
    frame = moments.restricted_counts(2, 2)
    row = frame[frame["ell"] == 2].iloc[0]
    assert row["count"] == 3
    assert row["bound"] == 4
    assert moments.count_restricted(2, 1, 2) == 0


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=2, max_value=4), st.integers(min_value=1, max_value=3))
def test_restricted_counts_respect_bound(n, p):
    frame = moments.restricted_counts(n, p)
    assert (frame["count"] <= frame["bound"]).all()
    assert frame.loc[frame["ell"] == 1, "count"].sum() == 0


def test_active_pairs_form_a_partition():
    for index in moments.enumerate_multiindices(4, 2):
        decomposition = moments.decompose_active_pairs(index)
        assert decomposition.is_partition
        assert sum(decomposition.gammas) == index.p


def test_classification_of_a_simple_index():
    index = MultiIndex(n=3, p=2, entries={(0, 1): 1, (1, 2): 1})
    profile = moments.classify(index)
    assert profile.m == (1, 2, 1)
    assert profile.act == 3
    assert not profile.restricted


def test_nonrestricted_terms_vanish(centered):
    contributions = moments.nonrestricted_contributions(centered, 3, 2)
    assert contributions
    assert max(abs(c) for c in contributions) < 1e-12


@pytest.mark.parametrize("p", [1, 2, 3])
def test_oracle_matches_expansion(centered, p):
    _, signed = moments.moment_oracle(centered, 3, p)
    assert moments.expanded_moment(centered, 3, p) == pytest.approx(signed, rel=1e-9, abs=1e-13)
    assert moments.expanded_moment(centered, 3, p, restricted_only=False) == pytest.approx(
        signed, rel=1e-9, abs=1e-13)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_second_moment_closed_form_matches_oracle(centered, n):
    absolute, signed = moments.moment_oracle(centered, n, 2)
    assert absolute == pytest.approx(signed)
    assert moments.second_moment_closed_form(centered, n) == pytest.approx(signed, rel=1e-9)


def test_rank_one_kernel_is_centered(atomic1):
    g = CorrelationMoments.rank_one(atomic1, [1.0, -2.0, 0.5])
    assert np.allclose(g.table @ atomic1.weights, 0.0, atol=1e-14)
    assert np.allclose(g.table, g.table.T)


def test_spectral_kernel_is_centered(torus1, uniform1):
    g = moments.centered_kernel(torus1, 0.02, uniform1)
    y = ((np.arange(64) + 0.5) / 64)[:, None]
    for x in (0.1, 0.37, 0.9):
        values = moments.evaluate(g, np.full((64, 1), x), y)
        assert abs(values.mean()) < 1e-12


def test_monte_carlo_second_moment(centered, stream):
    mean, se = moments.moment_monte_carlo(centered, 5, 2, 4000, stream)
    assert abs(mean - moments.second_moment_closed_form(centered, 5)) <= 4 * se


def test_sample_statistic_is_deterministic(centered, stream):
    first = moments.sample_statistic(centered, 4, 2500, stream)
    second = moments.sample_statistic(centered, 4, 2500, stream)
    assert np.array_equal(first, second)


@pytest.mark.slow
def test_second_order_scaling(centered, stream):
    report = moments.verify_corineq_scaling(centered, 2, 0.5, [2, 3, 4, 6], 4000, stream)
    assert report.expected_exponent == 0.0
    assert report.verdict == Verdict.PASS
    assert all(c is not None for c in report.closed_form)


def test_enumeration_budget():
    with pytest.raises(ConfigurationError):
        list(moments.enumerate_multiindices(7, 2))
    with pytest.raises(ConfigurationError):
        list(moments.enumerate_multiindices(3, 5))


def test_scaling_parameter_checks(centered, stream):
    with pytest.raises(ConfigurationError):
        moments.verify_corineq_scaling(centered, 5, 0.5, [2, 3], 1000, stream)
    with pytest.raises(ConfigurationError):
        moments.verify_corineq_scaling(centered, 2, 1.0, [2, 3], 1000, stream)


def test_centered_kernel_requirements(torus1, free2, atomic1):
    with pytest.raises(ConfigurationError):
        moments.centered_kernel(torus1, 0.0, atomic1)
    with pytest.raises(UnsupportedConfigurationError):
        moments.centered_kernel(free2, 0.05, atomic1)
