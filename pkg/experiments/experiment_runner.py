"""
Запуск эксперимента по конфигурации: сборка объектов, вызов модулей, вердикты
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict
import logging

import numpy as np
import pandas as pd

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import (
    ExperimentConfig, ExperimentKind, Kernel, BaseMeasure, MeasureKind, Potential,
    RandomStream, SdeState, Verdict
)
from calculations import (
    KernelCalculator, RegularityVerifier, MeasureSampler, EnergyCalculator, LowerBoundProbe,
    PartitionEstimator, CorrelationMoments, SdeIntegrator, McKeanVlasovSolver, ModulatedEnergyTracker,
    MeanFieldSolver, GibbsSampler, EntropyRateEstimator
)
from .worker_pool import WorkerPool

logger = logging.getLogger(__name__)

# Порог перебора мультииндексов для сравнения разложения с оракулом
EXPANSION_LIMIT = 100_000
DEFAULT_ATOMS = ((0.1, 0.5), (0.45, 0.3), (0.8, 0.2))


@dataclass
class ExperimentOutcome:
    """Таблицы, сводка и вердикты одного прогона"""

    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    verdicts: Dict[str, Verdict] = field(default_factory=dict)


class ExperimentRunner:
    """Диспетчер видов экспериментов"""

    def __init__(self, config: ExperimentConfig, pool: WorkerPool, dump: bool = False):
        """
        Инициализация

        Args:
            config: Разрешенная конфигурация
            pool: Пул исполнителей (упорядоченный map)
            dump: Сохранять снимки траекторий
        """
        self.config = config
        self.pool = pool
        self.dump = dump
        self.stream = RandomStream(seed=config.seed)
        self.kernel: Kernel = config.kernel.to_kernel()
        self.measure: BaseMeasure = config.measure.to_measure(self.kernel.domain)
        self.potential: Potential = config.potential.to_potential(self.kernel.domain)
        self.kernel_calculator = KernelCalculator()
        self.energy_calculator = EnergyCalculator(self.kernel_calculator)
        self.sampler = MeasureSampler()
        self._dispatch: Dict[ExperimentKind, Callable[[], ExperimentOutcome]] = {
            ExperimentKind.KERNEL_VERIFY: self._kernel_verify,
            ExperimentKind.ZSWEEP: self._zsweep,
            ExperimentKind.MOMENTS_VERIFY: self._moments_verify,
            ExperimentKind.SDE_RUN: self._sde_run,
            ExperimentKind.MV_SOLVE: self._mv_solve,
            ExperimentKind.MFL_SWEEP: self._mfl_sweep,
            ExperimentKind.GIBBS: self._gibbs,
        }

    def run(self) -> ExperimentOutcome:
        """Выполнение эксперимента вида config.kind"""
        kind = self.config.kind
        try:
            logger.info(f"Running {kind.value}: kernel {self.kernel.family.value} d={self.kernel.dimension}, "
                        f"measure {self.measure.kind.value}, seed {self.config.seed}, workers {self.pool.workers}")
            outcome = self._dispatch[kind]()
            logger.info(f"{kind.value} finished: " + ", ".join(f"{k}={v.value}" for k, v in outcome.verdicts.items()))
            return outcome
        except Exception as e:
            logger.error(f"Error running {kind.value}: {e}")
            raise

    # Ядро

    def _kernel_verify(self) -> ExperimentOutcome:
        params = self.config.kernel_verify
        verifier = RegularityVerifier(self.kernel_calculator)
        outcome = ExperimentOutcome()

        log_bound = verifier.verify_log_bound(self.kernel, params.log_bound_epsilons)
        besov = verifier.verify_besov(self.kernel, self.measure, params.besov_p, params.besov_epsilons,
                                      params.besov_resolution, params.gap_evaluation)
        superharm = verifier.verify_superharmonicity(self.kernel, params.superharm_epsilons,
                                                     params.superharm_resolution, params.gap_evaluation)
        for report in (log_bound, besov, superharm):
            outcome.tables[report.check] = pd.DataFrame(report.to_rows())
            outcome.verdicts[report.check] = report.verdict
            outcome.summary[report.check] = {"fitted": report.fitted_exponents, "notes": report.notes}

        truncation, truncation_verdict = verifier.verify_truncation(params.truncation_cutoffs)
        outcome.tables["truncation"] = truncation
        outcome.verdicts["truncation"] = truncation_verdict

        if self.kernel.is_torus:
            stability, stability_verdict = verifier.verify_h_stability(
                self.kernel, params.log_bound_epsilons[-1], params.h_stability_trials,
                self.stream.child("h-stability"))
            outcome.tables["h_stability"] = stability
            outcome.verdicts["h_stability"] = stability_verdict
        return outcome

    # Статсуммы

    def _zsweep(self) -> ExperimentOutcome:
        params = self.config.zsweep
        eps = params.eps
        estimator = PartitionEstimator(self.energy_calculator, self.sampler, params.chunk_size, self.pool.map)
        outcome = ExperimentOutcome()
        stream = self.stream.child("zsweep")

        frames, estimates_by_beta = [], {}
        for beta in params.betas:
            sweep = estimator.sweep_partition(self.kernel, self.measure, params.n_values, beta, params.samples,
                                              stream, eps, params.ess_threshold)
            frame = pd.DataFrame([e.to_row() for e in sweep.estimates])
            frame["running_max"] = sweep.running_max
            frame["jensen_bound"] = sweep.jensen_bounds
            frames.append(frame)
            estimates_by_beta[float(beta)] = sweep.estimates
            for name in ("trend", "lower", "jensen", "ess"):
                outcome.verdicts[f"{name}_beta{beta:g}"] = getattr(sweep, f"{name}_verdict")
        outcome.tables["partition"] = pd.concat(frames, ignore_index=True)

        constants = {}
        for beta, estimates in estimates_by_beta.items():
            doubled = estimates_by_beta.get(2 * beta)
            if doubled:
                constants[f"beta{beta:g}"] = [estimator.integral_bound_constant(e) for e in doubled]
        outcome.summary["integral_bound_constants"] = constants

        n = params.n_values[-1]
        energies = estimator.sample_energies(self.kernel, self.measure, n, eps, params.samples,
                                            stream.child("N", n))
        if len(params.diagnostic_betas) >= 3:
            frame, verdict = estimator.beta_diagnostic(energies, n, params.diagnostic_betas, eps,
                                                       stream.child("beta-diagnostic"))
            outcome.tables["beta_diagnostic"] = frame
            outcome.verdicts["beta_diagnostic"] = verdict
        layer = estimator.layer_cake_diagnostic(energies, n, params.betas[0])
        outcome.tables["layer_cake"] = pd.DataFrame([row.model_dump() for row in layer.rows])
        outcome.summary["layer_cake"] = {"direct": layer.direct_mean, "layered": layer.layer_cake_mean}
        outcome.verdicts["layer_cake"] = Verdict.of(
            abs(layer.direct_mean - layer.layer_cake_mean) <= 1e-9 * max(1.0, layer.direct_mean))

        if self.measure.kind == MeasureKind.ATOMIC:
            self._enumeration_check(estimator, estimates_by_beta, outcome)

        probe = params.probe
        if probe is not None and probe.search_budget > 0:
            if self.measure.kind == MeasureKind.ATOMIC or not self.kernel.is_torus:
                logger.warning("Lower-bound probe skipped: it needs a torus kernel and a continuous measure")
            else:
                frame, verdict = LowerBoundProbe(self.energy_calculator, self.sampler, probe.sweeps).probe_lower_bound(
                    self.kernel, self.measure, probe.n_values, probe.search_budget, self.stream.child("probe"),
                    probe.eps)
                outcome.tables["lower_bound_probe"] = frame
                outcome.verdicts["lower_bound_probe"] = verdict
        return outcome

    def _enumeration_check(self, estimator: PartitionEstimator, estimates_by_beta, outcome: ExperimentOutcome):
        """Монте-Карло против точного перебора для малых N"""
        m = len(self.measure.weights)
        rows = []
        for beta, estimates in estimates_by_beta.items():
            for estimate in estimates:
                if m ** estimate.n > 1_000_000:
                    continue
                exact = estimator.enumerate_partition(self.kernel, self.measure, estimate.n, beta, estimate.eps)
                rows.append({"N": estimate.n, "beta": beta, "exact": exact.mean, "estimate": estimate.mean,
                             "se": estimate.standard_error,
                             "within": bool(abs(estimate.mean - exact.mean) <= 3 * estimate.standard_error + 1e-12)})
        if rows:
            frame = pd.DataFrame(rows)
            outcome.tables["enumeration"] = frame
            outcome.verdicts["enumeration"] = Verdict.of(bool(frame["within"].all()))

    # Моменты

    def _atomic_measure(self) -> BaseMeasure:
        if self.measure.kind == MeasureKind.ATOMIC:
            return self.measure
        d = self.kernel.dimension
        points = [[x] * d for x, _ in DEFAULT_ATOMS]
        return BaseMeasure.atomic(self.kernel.domain, points, [w for _, w in DEFAULT_ATOMS])

    def _moments_verify(self) -> ExperimentOutcome:
        params = self.config.moments_verify
        moments = CorrelationMoments(self.kernel_calculator, self.sampler, params.chunk_size, self.pool.map)
        outcome = ExperimentOutcome()
        atomic = moments.centered_kernel(self.kernel, params.eps, self._atomic_measure())

        count_frames, vanishing, partitions = [], [], []
        for n, p in params.enumeration_cases:
            count_frames.append(moments.restricted_counts(n, p))
            contributions = moments.nonrestricted_contributions(atomic, n, p)
            vanishing.append(max((abs(c) for c in contributions), default=0.0))
            partitions.append(all(moments.decompose_active_pairs(index).is_partition
                                  for index in moments.enumerate_multiindices(n, p)
                                  if moments.classify(index).restricted))
        outcome.tables["restricted_counts"] = pd.concat(count_frames, ignore_index=True)
        outcome.verdicts["combinatorics"] = Verdict.of(all(partitions))
        outcome.verdicts["vanishing"] = Verdict.of(max(vanishing, default=0.0) <= 1e-12)
        outcome.summary["max_nonrestricted"] = max(vanishing, default=0.0)

        rows = []
        for n, p in params.oracle_cases:
            exact_abs, exact_signed = moments.moment_oracle(atomic, n, p)
            signed = p % 2 == 1
            exact = exact_signed if signed else exact_abs
            mean, se = moments.moment_monte_carlo(atomic, n, p, params.oracle_samples,
                                                  self.stream.child("oracle", n, p), signed=signed)
            row = {"n": n, "p": p, "exact": exact, "monte_carlo": mean, "se": se,
                   "within": bool(abs(mean - exact) <= 4 * se + 1e-12), "expanded": np.nan}
            if (n * (n - 1)) ** p <= EXPANSION_LIMIT:
                row["expanded"] = moments.expanded_moment(atomic, n, p)
                row["within"] = row["within"] and bool(abs(row["expanded"] - exact_signed)
                                                       <= 1e-9 * max(1.0, abs(exact_signed)))
            rows.append(row)
        oracle = pd.DataFrame(rows)
        outcome.tables["moment_oracle"] = oracle
        outcome.verdicts["moment_oracle"] = Verdict.of(bool(oracle["within"].all()))

        g = moments.centered_kernel(self.kernel, params.eps, self.measure)
        report = moments.verify_corineq_scaling(g, params.p, params.gamma, params.scaling_n_values,
                                                params.scaling_samples, self.stream.child("scaling"))
        outcome.tables["scaling"] = pd.DataFrame({"N": report.n_values, "lhs": report.lhs, "se": report.lhs_se,
                                                  "rhs": report.rhs})
        outcome.summary["scaling"] = {"fitted_constant": report.fitted_constant,
                                      "expected_exponent": report.expected_exponent,
                                      "fitted_exponent": report.fitted_exponent, "notes": report.notes}
        outcome.verdicts["scaling"] = report.verdict
        return outcome

    # Динамика

    def _sde_run(self) -> ExperimentOutcome:
        params = self.config.sde_run
        integrator = SdeIntegrator(self.kernel_calculator)
        outcome = ExperimentOutcome()
        config = self.sampler.sample(self.measure, params.n, self.stream.child("initial"))
        state = SdeState.initial(config, params.dt, params.eps_reg, params.force_cap)
        final, snapshots = integrator.run_sde(
            state, self.kernel, self.potential, params.steps, self.stream.child("noise"), self.config.interacting,
            params.snapshot_every if self.dump else None, params.dt_max)
        points = final.config.points
        frame = pd.DataFrame(points, columns=[f"x{a}" for a in range(points.shape[1])])
        frame.insert(0, "particle", np.arange(len(points)))
        outcome.tables["final_positions"] = frame
        if snapshots is not None:
            outcome.tables["snapshots"] = snapshots
        outcome.summary.update({"time": final.time, "cap_activations": final.cap_activations,
                                "eps_reg": final.eps_reg, "force_cap": final.force_cap})
        in_domain = bool(np.all(np.isfinite(points)))
        if self.kernel.is_torus:
            in_domain = in_domain and bool(np.all((points >= 0) & (points < 1)))
        outcome.verdicts["in_domain"] = Verdict.of(in_domain)
        outcome.verdicts["force_cap"] = Verdict.PASS if final.cap_activations == 0 else Verdict.INCONCLUSIVE
        return outcome

    def _mv_solve(self) -> ExperimentOutcome:
        params = self.config.mv_solve
        solver = McKeanVlasovSolver(params.save_every)
        outcome = ExperimentOutcome()
        initial = solver.initial_state(self.measure, params.cells, params.dt)
        trajectory = solver.mv_solve(initial, self.kernel, self.potential, params.t_end, params.eps,
                                     self.config.interacting)
        outcome.tables["free_energy"] = pd.DataFrame({"t": trajectory.times, "free_energy": trajectory.free_energy})
        outcome.tables["steps"] = pd.DataFrame({"mass_correction": trajectory.mass_corrections,
                                                "clipped_negativity": trajectory.clipped_negativity})
        centers = BaseMeasure.uniform(self.kernel.domain).cell_centers(params.cells)
        final = pd.DataFrame(centers, columns=[f"x{a}" for a in range(centers.shape[1])])
        final["density"] = trajectory.final.ravel()
        outcome.tables["density_final"] = final
        if self.dump:
            outcome.tables["densities"] = pd.DataFrame(
                [{"t": t, "cell": j, "density": value}
                 for t, density in zip(trajectory.times, trajectory.densities)
                 for j, value in enumerate(density.ravel())])

        energy = np.asarray(trajectory.free_energy)
        outcome.verdicts["free_energy_monotone"] = Verdict.of(
            bool(np.all(np.diff(energy) <= 1e-10 * (1.0 + np.abs(energy[1:])))))
        outcome.verdicts["mass"] = Verdict.of(max(map(abs, trajectory.mass_corrections), default=0.0) <= 1e-8)
        outcome.summary.update({"rejected_steps": trajectory.rejected_steps,
                                "clipped_negativity": float(np.sum(trajectory.clipped_negativity)),
                                "final_free_energy": float(energy[-1])})
        if self.measure.kind == MeasureKind.UNIFORM and self.potential.is_zero:
            outcome.verdicts["stationary"] = Verdict.of(float(np.max(np.abs(trajectory.final - 1.0))) <= 1e-10)
        if (self.config.measure.kind == "single-mode" and self.potential.is_zero
                and not self.config.interacting):
            mode = [0] * self.kernel.dimension
            mode[0] = 1
            amplitude = lambda density: 2 * abs(np.fft.fftn(density, norm="forward")[tuple(mode)])
            predicted = amplitude(trajectory.densities[0]) * np.exp(-(2 * np.pi) ** 2 * trajectory.times[-1])
            relative = abs(amplitude(trajectory.final) - predicted) / predicted
            outcome.summary["heat_decay_relative_error"] = float(relative)
            outcome.verdicts["heat_decay"] = Verdict.of(relative <= 1e-6)
        return outcome

    def _mfl_sweep(self) -> ExperimentOutcome:
        params = self.config.mfl_sweep
        tracker = ModulatedEnergyTracker(
            SdeIntegrator(self.kernel_calculator), McKeanVlasovSolver(), self.energy_calculator, self.sampler,
            self.pool.map)
        rows, fits, verdict = tracker.modulated_energy_sweep(
            self.kernel, self.measure, self.potential, params.n_values, params.t_grid, params.replicas,
            self.stream.child("mfl"), params.dt, params.eps_reg, params.pde_cells, params.pde_dt,
            self.config.interacting, tuple(params.slope_range))
        outcome = ExperimentOutcome()
        outcome.tables["modulated_energy"] = pd.DataFrame([row.model_dump() for row in rows])
        outcome.tables["slopes"] = pd.DataFrame([fit.model_dump() for fit in fits])
        outcome.summary["eps_reg"] = params.eps_reg
        outcome.summary["proxy"] = "modulated interaction energy (entropy along the flow is not estimated)"
        outcome.verdicts["slope"] = verdict
        return outcome

    # Мера Гиббса

    def _gibbs(self) -> ExperimentOutcome:
        params = self.config.gibbs
        estimator = EntropyRateEstimator(
            PartitionEstimator(self.energy_calculator, self.sampler, map_fn=self.pool.map),
            GibbsSampler(self.energy_calculator, self.sampler, self.pool.map), MeanFieldSolver())
        rows, minimizer, fits, verdicts = estimator.entropy_rates(
            self.kernel, self.potential, params.n_values, params.chain, self.stream.child("gibbs"),
            params.cells, params.damping, params.tol, params.max_iter, params.is_samples, params.ti_nodes,
            params.eps, self.config.interacting, params.cross_check_n, params.slope_tolerance)
        outcome = ExperimentOutcome(verdicts=dict(verdicts))
        outcome.tables["entropy_rates"] = pd.DataFrame([row.model_dump(mode="json") for row in rows])
        centers = BaseMeasure.uniform(self.kernel.domain).cell_centers(minimizer.cells)
        density = pd.DataFrame(centers, columns=[f"x{a}" for a in range(centers.shape[1])])
        density["density"] = minimizer.density.ravel()
        outcome.tables["minimizer"] = density
        outcome.summary.update({
            "minimizer": {"z_mu": minimizer.z_mu, "residual": minimizer.residual,
                          "iterations": minimizer.iterations, "free_energy": minimizer.free_energy},
            "slopes": {name: fit.model_dump() for name, fit in fits.items()},
            "flagged_acceptance": [row.n for row in rows if not 0.2 < row.acceptance_rate < 0.9],
        })
        return outcome
