"""
Integration Tests para US08: Límite Clásico

User Story:
Como investigador, deseo simular el proceso clásico de Lévy con momento
integrado, construir su densidad p_t y compararla con la función de Wigner
del estado evolucionado, para observar la clasicalización a tiempos largos.

Ejecutar todos los tests de esta US:
    pytest us_08_integration_test.py -v

Ejecutar solo los tests rápidos:
    pytest us_08_integration_test.py -v -m "not slow"
"""

import logging
import math
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from classical_limit.domain.model.valueobjects.classical_density import ClassicalDensity
from classical_limit.domain.services.levy_path_sampler import LevyPathSampler
from experiments.application.internal.commandservices.experiment_command_service import ExperimentCommandService
from experiments.domain.model.commands.run_experiment_command import RunExperimentCommand
from experiments.domain.model.valueobjects.experiment_manifest import EXIT_OK
from experiments.infrastructure.baseline_store import load_baseline
from experiments.infrastructure.config_parser import ConfigParser
from phase_space.domain.model.valueobjects.phase_grid import PhaseGrid
from phase_space.domain.model.valueobjects.wigner_function import WignerFn
from shared.domain.exceptions import DomainError, RangeError

logger = logging.getLogger(__name__)

ROOT = Path(__file__).parent
SAMPLES = 20_000


@pytest.mark.us08
@pytest.mark.integration
class TestUS08LimiteClasico:
    """
    Suite de tests de integración para LevyPathSampler y
    ClassicalComparisonService: ensambles, histogramas y distancia de Wigner.
    """

    def test_sin_ruido_todo_queda_en_el_origen(self, path_sampler, comparison_service, zero_noise):
        """
        Verifica el caso trivial sin ruido.

        GIVEN ruido nulo
        WHEN se muestrean trayectorias y se construye la densidad
        THEN todas las muestras son (0, 0) y la celda del origen tiene masa 1
        """
        logger.info("=== TEST: Sin ruido ===")

        # Act: Muestreo y densidad
        logger.info("ACT: Muestreando ensamble")
        ensemble = path_sampler.sample_paths(zero_noise, 2.0, 1000, 64, seed=3)
        grid = PhaseGrid.square(1, 12.0, 64)
        density = comparison_service.classical_density(ensemble, grid)

        # Assert: Delta en el origen
        logger.info("ASSERT: Verificando delta")
        assert not np.any(ensemble.positions) and not np.any(ensemble.momenta), "Todas las muestras en (0,0)"
        assert not np.any(ensemble.jump_counts), "Sin saltos"
        assert density.values[32, 32] * density.cell_volume == pytest.approx(1.0, abs=1e-12), \
            "Toda la masa en la celda del origen"
        assert density.total() == pytest.approx(1.0, abs=1e-9), "Masa total 1"
        logger.info("OK: Delta en el origen")

    def test_conteo_de_saltos_y_simetria(self, path_sampler, atoms_noise):
        """
        Verifica el reloj de Poisson de los átomos.

        GIVEN átomos ±(0, 1) con peso ½ (tasa total 1) y t = 1
        WHEN se muestrean 20000 trayectorias
        THEN el número medio de saltos es 1, el momento medio 0 y la asimetría 0, dentro de 4σ
        """
        logger.info("=== TEST: Conteo de saltos ===")

        logger.info("ACT: Muestreando ensamble")
        ensemble = path_sampler.sample_paths(atoms_noise, 1.0, SAMPLES, 64, seed=7)
        counts = ensemble.jump_counts.astype(float)
        count_stderr = counts.std(ddof=1) / math.sqrt(len(counts))
        mean, stderr = ensemble.momentum_mean()
        skewness = float(stats.skew(ensemble.momenta[:, 0]))
        logger.info(f"Saltos medios={counts.mean():.4f} +- {count_stderr:.4f}, asimetria={skewness:.4f}")

        logger.info("ASSERT: Verificando estadisticos")
        assert abs(counts.mean() - 1.0) <= 4.0 * count_stderr, "Tasa total 1 por unidad de tiempo"
        assert abs(mean[0]) <= 4.0 * stderr[0], "Momento medio nulo"
        assert abs(skewness) <= 4.0 * math.sqrt(6.0 / SAMPLES), "Marginal de momento simétrica"
        logger.info("OK: Reloj de Poisson consistente")

    def test_marginal_de_momento_gaussiana(self, path_sampler, comparison_service, case1_noise):
        """
        Verifica la marginal de momento con difusión pura.

        GIVEN A^{x,x} = 1 y t = 2
        WHEN se muestrean 20000 trayectorias
        THEN la varianza de k_t es 2 dentro de 4σ y el chi-cuadrado queda bajo el baseline
        """
        logger.info("=== TEST: Marginal de momento ===")

        # Arrange: Baseline de la marginal
        logger.info("ARRANGE: Leyendo baseline")
        baseline = load_baseline(ROOT / "baselines" / "classical_marginal_case1.json", "classical")

        # Act: Muestreo
        logger.info("ACT: Muestreando ensamble")
        ensemble = path_sampler.sample_paths(case1_noise, 2.0, SAMPLES, 64, seed=13)
        variance = float(ensemble.momenta[:, 0].var(ddof=1))
        variance_stderr = 2.0 * math.sqrt(2.0 / (SAMPLES - 1))
        statistic, p_value = comparison_service.momentum_chi_square(ensemble, 2.0, baseline.bins)
        logger.info(f"Varianza={variance:.4f}, chi2={statistic:.2f}, p={p_value:.3f}")

        # Assert: Momentos y bondad de ajuste
        logger.info("ASSERT: Verificando marginal")
        assert abs(variance - 2.0) <= 4.0 * variance_stderr, "Var(k_t) = t·A^{x,x}"
        assert statistic <= baseline.threshold, "El chi-cuadrado debe quedar bajo el umbral"
        assert 0.0 < p_value <= 1.0, "p-valor en (0, 1]"

        logger.info("ACT & ASSERT: Varianza no positiva")
        with pytest.raises(DomainError):
            comparison_service.momentum_chi_square(ensemble, 0.0, baseline.bins)
        logger.info("OK: Marginal gaussiana")

    def test_duplicar_pasos_refina_la_misma_trayectoria(self, path_sampler, comparison_service,
                                                       propagator_service, case1_noise):
        """
        Verifica la construcción por puentes brownianos.

        GIVEN la misma semilla con 64 y 128 pasos
        WHEN se muestrean los ensambles
        THEN los momentos finales son idénticos y el panel cambia menos de 1 error estándar
        """
        logger.info("=== TEST: Refinamiento de pasos ===")

        logger.info("ACT: Muestreando con 64 y 128 pasos")
        coarse = path_sampler.sample_paths(case1_noise, 1.0, 2000, 64, seed=5)
        fine = path_sampler.sample_paths(case1_noise, 1.0, 2000, 128, seed=5)
        panel = propagator_service.phase_panel(case1_noise, 1.0)
        coarse_values, errors = comparison_service.empirical_charfn_batch(coarse, panel[:, :1], panel[:, 1:])
        fine_values, _ = comparison_service.empirical_charfn_batch(fine, panel[:, :1], panel[:, 1:])

        logger.info("ASSERT: Verificando refinamiento")
        assert np.array_equal(coarse.momenta, fine.momenta), "W_t no depende del número de pasos"
        assert np.all(np.abs(fine_values - coarse_values) <= errors), "El panel cambia menos de 1 stderr"
        logger.info("OK: Refinamiento consistente")

    def test_hilos_no_cambian_el_ensamble(self, mixed_noise):
        """
        Verifica el determinismo con bloques paralelos.

        GIVEN la misma semilla y tamaño de bloque
        WHEN se muestrea con 1 y con 2 hilos
        THEN los ensambles son idénticos
        """
        logger.info("=== TEST: Determinismo con hilos ===")

        logger.info("ACT: Muestreando con 1 y 2 hilos")
        single = LevyPathSampler(block_size=1000, threads=1).sample_paths(mixed_noise, 1.0, 5000, 64, seed=21)
        double = LevyPathSampler(block_size=1000, threads=2).sample_paths(mixed_noise, 1.0, 5000, 64, seed=21)

        logger.info("ASSERT: Comparando arreglos")
        assert np.array_equal(single.positions, double.positions), "Mismas posiciones"
        assert np.array_equal(single.momenta, double.momenta), "Mismos momentos"
        assert np.array_equal(single.jump_counts, double.jump_counts), "Mismos conteos"
        logger.info("OK: Ensamble determinista")

    def test_funcion_caracteristica_empirica(self, path_sampler, comparison_service, case1_noise, atoms_noise):
        """
        Verifica E[exp(i q·k_t + i p·x_t)] contra el exponente integrado.

        GIVEN difusión de momento (t = 2) y átomos de momento (t = 1)
        WHEN se estima la función característica empírica
        THEN vale 1 en el origen, ≈ e^{-1} en (1, 0) y ≈ e^{-2} en (π, 0) dentro de 4σ
        """
        logger.info("=== TEST: Funcion caracteristica empirica ===")

        logger.info("ARRANGE: Ensambles")
        diffusive = path_sampler.sample_paths(case1_noise, 2.0, SAMPLES, 64, seed=17)
        jumps = path_sampler.sample_paths(atoms_noise, 1.0, SAMPLES, 64, seed=19)

        logger.info("ACT & ASSERT: Origen")
        value, stderr = comparison_service.empirical_charfn(diffusive, [0.0], [0.0])
        assert value == 1.0 and stderr == 0.0, "En el origen vale exactamente 1"

        for ensemble, q, exact in ((diffusive, 1.0, math.exp(-1.0)), (jumps, math.pi, math.exp(-2.0))):
            value, stderr = comparison_service.empirical_charfn(ensemble, [q], [0.0])
            logger.info(f"q={q:.4f}: {value:.5f} +- {stderr:.5f}, exacto={exact:.5f}")
            assert abs(value - exact) <= 4.0 * stderr, "Dentro de 4 errores estándar"
        logger.info("OK: Funcion caracteristica empirica consistente")

    def test_ventana_insuficiente_sugiere_limites(self, path_sampler, comparison_service, case1_noise):
        """
        Verifica el error de rango del histograma.

        GIVEN una malla cuyos ejes de Wigner cubren solo |x| < 0.04
        WHEN se construye la densidad de un ensamble difusivo
        THEN se lanza RangeError con límites sugeridos
        """
        logger.info("=== TEST: Ventana insuficiente ===")

        logger.info("ARRANGE: Ensamble difusivo")
        ensemble = path_sampler.sample_paths(case1_noise, 1.0, 2000, 64, seed=23)

        logger.info("ACT & ASSERT: Malla demasiado pequena")
        with pytest.raises(RangeError) as exc_info:
            comparison_service.classical_density(ensemble, PhaseGrid.square(1, 400.0, 8))
        lower, upper = exc_info.value.suggested_bounds
        assert len(lower) == 2 and len(upper) == 2, "Límites para (x, k)"
        assert all(lo < hi for lo, hi in zip(lower, upper)), "Límites ordenados"

        logger.info("ACT & ASSERT: Dimension distinta")
        with pytest.raises(RangeError):
            comparison_service.classical_density(ensemble, PhaseGrid.square(2, 12.0, 16))
        logger.info("OK: Errores de rango detectados")

    def test_distancia_wigner_clasica_trivial(self, comparison_service):
        """
        Verifica la distancia L² relativa en casos triviales.

        GIVEN W y p_t con soportes disjuntos e igual norma, o W = p_t
        WHEN se calcula la distancia
        THEN vale √2 y 0; con ejes distintos se lanza RangeError
        """
        logger.info("=== TEST: Distancia trivial ===")

        # Arrange: Dos celdas disjuntas
        logger.info("ARRANGE: Soportes disjuntos")
        axis = np.linspace(-1.0, 1.0, 8)
        w_values = np.zeros((8, 8))
        p_values = np.zeros((8, 8))
        w_values[2, 3] = 1.0
        p_values[5, 4] = 1.0
        density = ClassicalDensity(p_values, axis, axis, 1, 1.0)

        # Act & Assert: Distancias
        logger.info("ACT & ASSERT: Calculando distancias")
        disjoint = comparison_service.wigner_classical_distance(WignerFn(w_values, axis, axis, 1), density)
        same = comparison_service.wigner_classical_distance(WignerFn(p_values, axis, axis, 1), density)
        assert disjoint == pytest.approx(math.sqrt(2.0), rel=1e-12), "Pitágoras: √2"
        assert same == 0.0, "W = p_t da 0"

        logger.info("ACT & ASSERT: Ejes distintos")
        with pytest.raises(RangeError):
            comparison_service.wigner_classical_distance(WignerFn(w_values, axis + 0.1, axis, 1), density)
        logger.info("OK: Distancias triviales correctas")

    @pytest.mark.slow
    def test_experimento_clasico_converge(self, tmp_path):
        """
        Verifica el experimento `classical` de punta a punta.

        GIVEN configs/classical_case1.cfg (A^{x,x} = 1, estado fundamental, t = 5, 10, 20)
        WHEN se ejecuta el experimento
        THEN el código es 0, la distancia decrece estrictamente en t = 5, 10, 20, todas < 0.5, y se escriben paneles y densidades
        """
        logger.info("=== TEST: Experimento clasico ===")

        # Arrange: Configuración del repositorio
        logger.info("ARRANGE: Leyendo configuracion")
        config = ConfigParser().parse_file(ROOT / "configs" / "classical_case1.cfg")

        # Act: Ejecución
        logger.info("ACT: Ejecutando experimento")
        result = ExperimentCommandService().handle_run_experiment(
            RunExperimentCommand(config=config, output_dir=str(tmp_path))
        )
        distances = result.summary["distances"]
        logger.info(f"Distancias: {distances}, marcas: {result.flagged}")

        # Assert: Convergencia y artefactos
        logger.info("ASSERT: Verificando distancias y artefactos")
        assert len(distances) == 3, "Una distancia por tiempo"
        assert result.exit_code == EXIT_OK, f"Ninguna verificación marcada: {result.flagged}"
        for earlier, later in zip(distances, distances[1:]):
            assert later < earlier, f"La distancia decrece estrictamente: {distances}"
        assert all(d < 0.5 for d in distances), "Distancias moderadas"
        assert len(result.summary["momentum_chi_square"]) == 3, "Chi-cuadrado por tiempo"
        for name in ("classical.csv", "panel_t000.csv", "wigner_t002.csv", "density_t002.csv"):
            assert (tmp_path / name).exists(), f"Debe existir {name}"
        logger.info("OK: Experimento clasico completo")
