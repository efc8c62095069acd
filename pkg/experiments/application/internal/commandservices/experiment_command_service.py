import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from asymptotics.domain.model.valueobjects.asymptotic_prediction import PowerLawFit
from asymptotics.domain.services.asymptotics_service import AsymptoticsService
from classical_limit.domain.services.classical_comparison_service import (
    PANEL_COLUMNS_SUFFIX, ClassicalComparisonService
)
from classical_limit.domain.services.levy_path_sampler import LevyPathSampler
from coherence.domain.model.valueobjects.index_report import INDEX_COLUMNS, IndexReport
from coherence.domain.services.coherence_service import CoherenceService
from experiments.domain.model.commands.experiment_config import (
    ExperimentConfig, ExperimentKind, MonteCarloSection
)
from experiments.domain.model.commands.run_experiment_command import RunExperimentCommand
from experiments.domain.model.valueobjects.experiment_manifest import (
    EXIT_CHECK_FAILED, EXIT_OK, ExperimentManifest, ExperimentResult
)
from experiments.domain.model.valueobjects.suite_result import SUITE_COLUMNS
from experiments.domain.services.invariant_suite_service import InvariantSuiteService
from experiments.infrastructure.artifact_writer import ArtifactWriter
from experiments.infrastructure.baseline_store import load_baseline
from gaussian_states.domain.services.gaussian_state_service import GaussianStateService
from noise.domain.services.levy_exponent_service import LevyExponentService
from phase_space.domain.model.valueobjects.characteristic_function import CharFn
from phase_space.domain.services.phase_quadrature_service import (
    PhaseQuadratureService, sampled_boundary_magnitude
)
from phase_space.domain.services.phase_transform_service import PhaseTransformService
from propagation.domain.services.propagator_service import PropagatorService
from shared.domain.exceptions import (
    ConfigError, DegenerateStateError, DomainError, NumericalInconsistencyError, RangeError,
    SingularMatrixError, TruncationError
)
from shared.infrastructure.settings import settings

logger = logging.getLogger(__name__)

# errores numéricos que se informan como filas marcadas
NUMERICAL_ERRORS = (TruncationError, DegenerateStateError, SingularMatrixError,
                    NumericalInconsistencyError, RangeError)

POWER_TOLERANCE = 0.1
# S_X/predicción en el último tiempo de la serie
RATIO_WINDOW = (0.85, 1.15)
PANEL_SIGMAS = 3.0
FIT_COLUMNS = ["observable", "power", "coefficient", "residual", "points_used"]


@dataclass
class ExperimentRun:
    """Estado mutable de una corrida: configuración efectiva, escritor y marcas"""
    config: ExperimentConfig
    kind: ExperimentKind
    monte_carlo: MonteCarloSection
    writer: ArtifactWriter
    propagator: PropagatorService
    flagged: List[str] = field(default_factory=list)
    grids: Dict[str, Any] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def times(self) -> List[float]:
        return list(self.config.experiment.times)

    def flag(self, message: str) -> str:
        logger.warning("Flagged: %s", message)
        self.flagged.append(message)
        return f"flagged: {message}"


class ExperimentCommandService:
    """Servicio de comandos para experimentos"""

    def __init__(self, threads: Optional[int] = None):
        self.threads = threads
        self.quadrature = PhaseQuadratureService(threads)
        self.levy = LevyExponentService()
        self.states = GaussianStateService(self.levy)
        self.coherence = CoherenceService(self.quadrature)
        self.transforms = PhaseTransformService(self.quadrature)
        self.asymptotics = AsymptoticsService(self.levy, self.states, self.quadrature)
        self.comparison = ClassicalComparisonService(self.levy)

    def handle_run_experiment(self, command: RunExperimentCommand) -> ExperimentResult:
        """Ejecuta el experimento y escribe sus artefactos y el manifiesto"""
        config = command.config
        kind = self._resolve_kind(command)
        monte_carlo = config.monte_carlo
        if command.seed is not None:
            monte_carlo = monte_carlo.model_copy(update={"seed": command.seed})
        if kind is not ExperimentKind.VALIDATE and not config.experiment.times:
            raise ConfigError(f"experiment '{kind.value}' needs a nonempty time list", field="times")

        output_dir = Path(command.output_dir or config.experiment.output_dir or settings.OUTPUT_DIR)
        sampler = LevyPathSampler(monte_carlo.block_size, self.threads)
        run = ExperimentRun(
            config=config, kind=kind, monte_carlo=monte_carlo,
            writer=ArtifactWriter(output_dir),
            propagator=PropagatorService(self.levy, sampler, self.threads),
        )
        logger.info("=== Experiment %s (d=%d) -> %s ===", kind.value, config.dim, output_dir)

        handlers = {
            ExperimentKind.VALIDATE: self._run_validate,
            ExperimentKind.INDEX_SERIES: self._run_index_series,
            ExperimentKind.EVOLVE: self._run_evolve,
            ExperimentKind.ASYMPTOTICS: self._run_asymptotics,
            ExperimentKind.RELAXATION: self._run_relaxation,
            ExperimentKind.CLASSICAL: self._run_classical,
        }
        try:
            handlers[kind](run)
        except NUMERICAL_ERRORS as error:
            run.flag(f"experiment aborted by {type(error).__name__}: {error}")

        exit_code = EXIT_CHECK_FAILED if run.flagged else EXIT_OK
        manifest = ExperimentManifest(
            tool_version=settings.TOOL_VERSION,
            kind=kind.value,
            seeds={"monte_carlo": monte_carlo.seed, "panel": settings.PANEL_SEED},
            grids=run.grids,
            times=run.times,
            config=config.source,
            noise=config.noise.describe(),
            flagged=run.flagged,
            summary=run.summary,
            exit_status=exit_code,
        )
        manifest_path = run.writer.manifest(manifest)
        logger.info("=== Experiment %s finished with exit status %d ===", kind.value, exit_code)
        return ExperimentResult(
            kind=kind.value, exit_code=exit_code, output_dir=str(output_dir),
            manifest_path=str(manifest_path), artifacts=list(run.writer.artifacts),
            flagged=run.flagged, summary=run.summary,
        )

    @staticmethod
    def _resolve_kind(command: RunExperimentCommand) -> ExperimentKind:
        configured = command.config.kind
        if command.kind is not None and configured is not None and command.kind is not configured:
            raise ConfigError(
                f"config declares kind '{configured.value}' but '{command.kind.value}' was requested",
                field="kind",
            )
        kind = command.kind or configured
        if kind is None:
            raise ConfigError("experiment kind is required", field="kind")
        return kind

    # ------------------------------------------------------------------
    # validate
    # ------------------------------------------------------------------

    def _run_validate(self, run: ExperimentRun) -> None:
        suites = InvariantSuiteService(self.states, run.propagator, self.coherence, self.quadrature)
        results = suites.run_all(run.config.noise, run.config.state, run.times)
        for result in results:
            if result.failed:
                run.flag(f"suite {result.suite}: value {result.value:.3e} > tolerance {result.tolerance:g} "
                         f"{result.detail}".rstrip())
        run.writer.table("validation_report.csv", SUITE_COLUMNS, [r.row() for r in results])
        run.summary["suites"] = {r.suite: r.status.value for r in results}

    # ------------------------------------------------------------------
    # index_series / asymptotics
    # ------------------------------------------------------------------

    def _index_series(self, run: ExperimentRun) -> Tuple[List[list], List[Tuple[float, float]]]:
        phi0 = self.states.gaussian_charfn(run.config.state)
        rows, series = [], []
        for t in run.times:
            try:
                report = self._index(run, run.propagator.evolve(phi0, run.config.noise, t))
            except NUMERICAL_ERRORS as error:
                rows.append([t] + [math.nan] * (len(INDEX_COLUMNS) - 1) + [run.flag(f"t={t:g}: {error}")])
                continue
            rows.append(report.row(t) + ["ok"])
            if t > 0:
                series.append((t, report.s_x))
        return rows, series

    def _index(self, run: ExperimentRun, phi: CharFn) -> IndexReport:
        grid = self.quadrature.fit_grid(phi, run.config.grid.points)
        run.grids.setdefault("index_quadrature", grid.describe())
        return self.coherence.coherence_index(phi, grid)

    def _fit(self, series: Sequence[Tuple[float, float]]) -> Optional[PowerLawFit]:
        try:
            return self.asymptotics.powerlaw_fit(series)
        except DomainError as error:
            logger.warning("No power-law fit: %s", error)
            return None

    def _run_index_series(self, run: ExperimentRun) -> None:
        rows, series = self._index_series(run)
        run.writer.table("index_series.csv", INDEX_COLUMNS + ["status"], rows)
        fit = self._fit(series)
        if fit is not None:
            run.writer.table("index_fit.csv", FIT_COLUMNS,
                             [["S_X", fit.power, fit.coefficient, fit.residual, fit.points_used]])
            run.summary["fit"] = fit.model_dump()

    def _run_asymptotics(self, run: ExperimentRun) -> None:
        prediction = self.asymptotics.classify_and_predict(run.config.noise, run.config.state)
        rows, series = self._index_series(run)
        run.writer.table("index_series.csv", INDEX_COLUMNS + ["status"], rows)

        ratio_rows = [[t, s, prediction.predicted(t), s / prediction.predicted(t)] for t, s in series]
        run.writer.table("asymptotic_ratio.csv", ["t", "S_X", "predicted", "ratio"], ratio_rows,
                         extra={"regime": prediction.regime.value})

        fit = self._fit(series)
        status = "ok"
        if fit is None:
            status = run.flag("not enough positive times for a power-law fit")
        elif abs(fit.power - prediction.power) > POWER_TOLERANCE:
            status = run.flag(f"fitted power {fit.power:.4f} differs from {prediction.power:g} "
                              f"by more than {POWER_TOLERANCE:g}")
        if series:
            last_t, last_s = series[-1]
            last_ratio = last_s / prediction.predicted(last_t)
            run.summary["final_ratio"] = {"t": last_t, "ratio": last_ratio}
            low, high = RATIO_WINDOW
            if not low <= last_ratio <= high:
                status = run.flag(f"t={last_t:g}: S_X/prediction = {last_ratio:.4f} outside [{low:g}, {high:g}]")
        fitted = [fit.power, fit.coefficient, fit.residual, fit.points_used] if fit else [math.nan] * 4
        run.writer.table(
            "asymptotics.csv",
            ["regime", "predicted_power", "predicted_coefficient", "error_order",
             "fitted_power", "fitted_coefficient", "residual", "points_used", "status"],
            [[prediction.regime.value, prediction.power, prediction.coefficient, prediction.error_order,
              *fitted, status]],
        )
        run.summary["prediction"] = prediction.model_dump(mode="json")
        if fit is not None:
            run.summary["fit"] = fit.model_dump()

    # ------------------------------------------------------------------
    # evolve
    # ------------------------------------------------------------------

    def _run_evolve(self, run: ExperimentRun) -> None:
        config = run.config
        phi0 = self.states.gaussian_charfn(config.state)
        # la malla se ajusta a φ₀ y queda fija para todos los tiempos
        grid = self.quadrature.fit_axis_grid(phi0, config.grid.points, config.grid.half_width)
        run.grids["evolve"] = grid.describe()
        measure = (2.0 * math.pi) ** (-grid.dim)

        rows = []
        for index, t in enumerate(run.times):
            sampled = self.quadrature.sample(run.propagator.evolve(phi0, config.noise, t), grid)
            boundary = sampled_boundary_magnitude(sampled.values)
            hs_norm = math.sqrt(measure * float(np.sum(np.abs(sampled.values) ** 2)) * grid.cell_volume)
            status = "ok"
            if boundary >= settings.BOUNDARY_TOLERANCE:
                status = run.flag(f"t={t:g}: boundary magnitude {boundary:.3e} on the frozen grid")
            name = f"charfn_t{index:03d}.csv"
            run.writer.charfn(name, sampled, extra={"t": repr(float(t))})
            rows.append([t, name, boundary, hs_norm, status])
        run.writer.table("evolve.csv", ["t", "file", "boundary_magnitude", "hs_norm", "status"], rows)

    # ------------------------------------------------------------------
    # relaxation
    # ------------------------------------------------------------------

    def _run_relaxation(self, run: ExperimentRun) -> None:
        noise = run.config.noise
        baseline = self._baseline(run)
        phi0 = self.states.gaussian_charfn(run.config.state)
        rows, distances = [], []
        for t in run.times:
            if t <= 0:
                logger.info("Skipping t=%g: relaxation distances need t > 0", t)
                continue
            try:
                distance = self.asymptotics.relaxation_distance(run.propagator.evolve(phi0, noise, t), noise, t)
            except NUMERICAL_ERRORS as error:
                rows.append([t, math.nan, run.flag(f"t={t:g}: {error}")])
                continue
            rows.append([t, distance, "ok"])
            distances.append(distance)
        if any(b >= a for a, b in zip(distances, distances[1:])):
            run.flag("relaxation distance is not strictly decreasing")
        if baseline is not None:
            self._check_relaxation_baseline(run, baseline, rows)
        run.writer.table("relaxation.csv", ["t", "distance", "status"], rows)
        run.summary["distances"] = distances

    @staticmethod
    def _baseline(run: ExperimentRun):
        path = run.config.experiment.baseline
        return load_baseline(path, run.kind.value) if path is not None else None

    @staticmethod
    def _check_relaxation_baseline(run: ExperimentRun, baseline, rows: List[list]) -> None:
        matches = [row for row in rows if math.isclose(row[0], baseline.check_time)]
        if not matches or math.isnan(matches[0][1]):
            run.flag(f"baseline time t={baseline.check_time:g} has no relaxation distance")
            return
        distance = matches[0][1]
        if distance > baseline.threshold:
            run.flag(f"t={baseline.check_time:g}: relaxation distance {distance:.4e} exceeds "
                     f"baseline threshold {baseline.threshold:g}")
        run.summary["baseline"] = {"check_time": baseline.check_time, "threshold": baseline.threshold,
                                   "distance": distance}

    # ------------------------------------------------------------------
    # classical
    # ------------------------------------------------------------------

    def _run_classical(self, run: ExperimentRun) -> None:
        config, mc = run.config, run.monte_carlo
        noise = config.noise
        d = config.dim
        baseline = self._baseline(run)
        marginal_variance = _momentum_marginal_variance(noise)
        phi0 = self.states.gaussian_charfn(config.state)
        panel_columns = ([f"q{i + 1}" for i in range(d)] + [f"p{i + 1}" for i in range(d)]
                         + PANEL_COLUMNS_SUFFIX)
        rows, distances = [], []
        for index, t in enumerate(run.times):
            if t <= 0:
                logger.info("Skipping t=%g: the classical comparison needs t > 0", t)
                continue
            ensemble = run.propagator.sampler.sample_paths(noise, t, mc.samples, mc.steps, mc.seed)
            panel = run.propagator.phase_panel(noise, t)
            panel_rows = self.comparison.characteristic_panel(ensemble, noise, panel)
            run.writer.table(f"panel_t{index:03d}.csv", panel_columns, panel_rows,
                             extra={"t": repr(float(t)), **{k: str(v) for k, v in ensemble.describe().items()}})
            worst = max(row[-1] for row in panel_rows)
            status = "ok"
            if worst > PANEL_SIGMAS:
                status = run.flag(f"t={t:g}: characteristic panel deviates by {worst:.2f} stderr")

            if baseline is not None and marginal_variance is not None:
                statistic, p_value = self.comparison.momentum_chi_square(ensemble, t * marginal_variance,
                                                                         baseline.bins)
                run.summary.setdefault("momentum_chi_square", []).append(
                    {"t": t, "statistic": statistic, "p_value": p_value})
                if statistic > baseline.threshold:
                    status = run.flag(f"t={t:g}: momentum marginal chi-square {statistic:.2f} exceeds "
                                      f"baseline threshold {baseline.threshold:g}")

            distance, fraction = math.nan, math.nan
            if d <= 2:
                try:
                    distance, fraction = self._classical_distance(run, phi0, ensemble, t, index)
                    distances.append(distance)
                except NUMERICAL_ERRORS as error:
                    status = run.flag(f"t={t:g}: {error}")
            rows.append([t, distance, fraction, worst, status])

        if any(b >= a for a, b in zip(distances, distances[1:])):
            run.flag("Wigner-classical distance is not strictly decreasing")
        run.writer.table("classical.csv", ["t", "distance", "in_range_fraction", "max_panel_deviation", "status"],
                         rows)
        run.summary["distances"] = distances

    def _classical_distance(self, run: ExperimentRun, phi0: CharFn, ensemble, t: float,
                            index: int) -> Tuple[float, float]:
        phi_t = run.propagator.evolve(phi0, run.config.noise, t)
        grid = self.comparison.classical_window_grid(phi_t.envelope, run.config.grid.points)
        run.grids[f"classical_t{index:03d}"] = grid.describe()
        wigner = self.transforms.charfn_to_wigner(phi_t, grid)
        density = self.comparison.classical_density(ensemble, grid)
        distance = self.comparison.wigner_classical_distance(wigner, density)
        run.writer.wigner(f"wigner_t{index:03d}.csv", wigner, extra={"t": repr(float(t))})
        run.writer.density(f"density_t{index:03d}.csv", density, extra={"t": repr(float(t))})
        logger.info("t=%g: Wigner-classical distance %.6f", t, distance)
        return distance, density.in_range_fraction


def _momentum_marginal_variance(noise) -> Optional[float]:
    """Varianza por unidad de tiempo de k_t cuando la marginal es gaussiana conocida (d=1, sin saltos)"""
    if noise.dim != 1 or not noise.jump.is_empty or noise.xx[0, 0] <= 0:
        return None
    return float(noise.xx[0, 0])
