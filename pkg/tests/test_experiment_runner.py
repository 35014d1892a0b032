"""
Тесты диспетчера экспериментов на малых конфигурациях
"""

import pytest

from models import ExperimentConfig, ExperimentKind, Verdict
from experiments import ExperimentRunner, WorkerPool

KERNEL_1D = {"dimension": 1, "fourier_cutoff": 16}


def _run(**fields):
    config = ExperimentConfig(kernel=KERNEL_1D, **fields)
    with WorkerPool(1) as pool:
        return ExperimentRunner(config, pool).run()


def test_uniform_density_is_stationary():
    outcome = _run(kind=ExperimentKind.MV_SOLVE, mv_solve={"cells": 16, "dt": 1e-3, "t_end": 0.01})
    assert outcome.verdicts["stationary"] == Verdict.PASS
    assert outcome.verdicts["mass"] == Verdict.PASS
    assert outcome.verdicts["free_energy_monotone"] == Verdict.PASS
    assert list(outcome.tables["density_final"].columns) == ["x0", "density"]


def test_heat_decay_check():
    outcome = _run(kind=ExperimentKind.MV_SOLVE, interacting=False,
                   measure={"kind": "single-mode", "cells": 32, "amplitude": 0.5},
                   mv_solve={"cells": 32, "dt": 1e-3, "t_end": 0.02})
    assert outcome.verdicts["heat_decay"] == Verdict.PASS
    assert outcome.summary["heat_decay_relative_error"] < 1e-6


def test_zsweep_with_atomic_measure():
    outcome = _run(kind=ExperimentKind.ZSWEEP,
                   measure={"kind": "atomic", "atoms": [[0.1], [0.45], [0.8]], "weights": [0.5, 0.3, 0.2]},
                   zsweep={"n_values": [2, 3, 4], "betas": [1.0], "diagnostic_betas": [0.5, 1.0, 2.0],
                           "eps": 0.01, "samples": 2000, "chunk_size": 500})
    assert set(outcome.tables) >= {"partition", "layer_cake", "beta_diagnostic", "enumeration"}
    assert list(outcome.tables["enumeration"]["N"]) == [2, 3, 4]
    assert outcome.verdicts["layer_cake"] == Verdict.PASS
    assert outcome.verdicts["trend_beta1"] == Verdict.INCONCLUSIVE


def test_moments_verify_combinatorics():
    outcome = _run(kind=ExperimentKind.MOMENTS_VERIFY,
                   moments_verify={"enumeration_cases": [(2, 2), (3, 2)], "oracle_cases": [(3, 2)],
                                   "oracle_samples": 2000, "scaling_n_values": [2, 3, 4],
                                   "scaling_samples": 500, "chunk_size": 250})
    assert outcome.verdicts["combinatorics"] == Verdict.PASS
    assert outcome.verdicts["vanishing"] == Verdict.PASS
    assert not outcome.tables["moment_oracle"]["expanded"].isna().any()
    assert len(outcome.tables["scaling"]) == 3


def test_sde_run_reports_domain():
    outcome = _run(kind=ExperimentKind.SDE_RUN, sde_run={"n": 3, "steps": 4, "eps_reg": 0.01})
    assert outcome.verdicts["in_domain"] == Verdict.PASS
    assert len(outcome.tables["final_positions"]) == 3
    assert outcome.summary["time"] == pytest.approx(0.004)
