"""
Тесты проверок регулярности ядра
"""

import numpy as np
import pytest

from models import Kernel, BaseMeasure, Domain, GapEvaluation, Verdict, ConfigurationError
from calculations import RegularityVerifier

verifier = RegularityVerifier()
LOG_EPSILONS = [2.0 ** -k for k in range(4, 13)]


def test_log_bound_two_dimensional_torus():
    report = verifier.verify_log_bound(Kernel.torus_log(2, 64), LOG_EPSILONS)
    assert report.verdict == Verdict.PASS
    assert report.fitted_exponents["spread"] <= 3.0
    assert np.all(np.diff(report.diagonal_values) > 0)
    assert len(report.to_rows()) == len(LOG_EPSILONS)


def test_log_bound_free_space():
    report = verifier.verify_log_bound(Kernel.free_log(2), LOG_EPSILONS)
    assert report.verdict == Verdict.PASS


def test_besov_exponent_for_uniform_measure():
    measure = BaseMeasure.uniform(Domain.torus(2))
    report = verifier.verify_besov(Kernel.torus_log(2, 64), measure, 4, [2.0 ** -k for k in range(4, 9)], 128)
    assert 0.5 <= report.fitted_exponents["kappa"] <= 1.5
    assert report.verdict == Verdict.PASS


def test_superharmonicity_torus_and_free_log():
    epsilons = [2.0 ** -k for k in range(4, 8)]
    torus = verifier.verify_superharmonicity(Kernel.torus_log(2, 64), epsilons, 32)
    free = verifier.verify_superharmonicity(Kernel.free_log(2), epsilons, 16)
    assert torus.verdict == Verdict.PASS
    assert free.verdict == Verdict.PASS
    assert min(free.superharm_minima) >= -1e-6
    # Нулевое среднее разности на торе: минимум отрицателен, но не ниже -eps
    assert all(-e - 1e-6 <= m < 0 for e, m in zip(epsilons, torus.superharm_minima))


def test_torus_gap_has_zero_mean_and_eps_floor(torus2):
    eps = 0.02
    series = verifier._torus_gap_grid(torus2, eps, 32, GapEvaluation.SERIES)
    assert abs(series.mean()) < 1e-12
    closed = verifier._torus_gap_grid(torus2, eps, 32, GapEvaluation.AUTO)
    assert -eps - 1e-6 <= closed.min() < 0


def test_truncation_errors_within_bounds():
    frame, _ = verifier.verify_truncation([8, 32, 128])
    assert frame["within_bound"].all()
    assert frame["max_error"].iloc[-1] < frame["max_error"].iloc[0]


def test_h_stability_trials(stream):
    frame, verdict = verifier.verify_h_stability(Kernel.torus_log(2, 12), 0.01, 16, stream)
    assert verdict == Verdict.PASS
    assert len(frame) == 16


def test_semigroup_defect_is_rounding_only():
    assert verifier.semigroup_defect(Kernel.torus_log(2, 16), 0.01, 0.02) < 1e-14


def test_epsilon_sweep_must_decrease():
    with pytest.raises(ConfigurationError):
        verifier.verify_log_bound(Kernel.torus_log(2, 16), [0.01, 0.1])
    with pytest.raises(ConfigurationError):
        verifier.verify_log_bound(Kernel.torus_log(2, 16), [])
