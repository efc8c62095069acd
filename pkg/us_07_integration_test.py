"""
Integration Tests para US07: Relajación hacia la Familia Gaussiana

User Story:
Como investigador, deseo medir la distancia de Hilbert-Schmidt relativa
entre el estado evolucionado y el estado gaussiano de relajación ρ̃_t, y
contrastarla con el umbral registrado en el baseline del repositorio.

Ejecutar todos los tests de esta US:
    pytest us_07_integration_test.py -v

Ejecutar un test específico:
    pytest us_07_integration_test.py::TestUS07RelajacionGaussiana::test_distancia_decreciente_y_bajo_el_baseline -v
"""

import logging
from pathlib import Path

import pytest

from experiments.application.internal.commandservices.experiment_command_service import ExperimentCommandService
from experiments.domain.model.commands.run_experiment_command import RunExperimentCommand
from experiments.domain.model.valueobjects.experiment_manifest import EXIT_OK
from experiments.infrastructure.artifact_writer import read_table
from experiments.infrastructure.baseline_store import load_baseline
from experiments.infrastructure.config_parser import ConfigParser
from gaussian_states.domain.services.gaussian_state_service import gaussian_index
from shared.domain.exceptions import ConfigError, DomainError, UnsupportedRegimeError

logger = logging.getLogger(__name__)

ROOT = Path(__file__).parent
RELAXATION_BASELINE = ROOT / "baselines" / "relaxation_case1.json"


@pytest.mark.us07
@pytest.mark.integration
class TestUS07RelajacionGaussiana:
    """
    Suite de tests de integración para la distancia de relajación, el estado
    límite ρ̃_t y el experimento `relaxation` con su baseline.
    """

    def test_distancia_decreciente_y_bajo_el_baseline(self, asymptotics_service, propagator_service,
                                                      ground_charfn, case1_noise):
        """
        Verifica la convergencia ‖Γ_t(ρ) - ρ̃_t‖₂ / ‖ρ̃_t‖₂ → 0.

        GIVEN el estado fundamental y A^{x,x} = 1
        WHEN se mide la distancia en t = 10, 20, 40
        THEN decrece estrictamente y en t = 40 queda bajo el umbral del baseline
        """
        logger.info("=== TEST: Distancia de relajacion ===")

        # Arrange: Baseline registrado
        logger.info("ARRANGE: Leyendo baseline")
        baseline = load_baseline(RELAXATION_BASELINE, "relaxation")

        # Act: Serie de distancias
        logger.info("ACT: Calculando distancias")
        distances = {}
        for t in (10.0, 20.0, 40.0):
            phi_t = propagator_service.evolve(ground_charfn, case1_noise, t)
            distances[t] = asymptotics_service.relaxation_distance(phi_t, case1_noise, t)
            logger.info(f"t={t}: distancia={distances[t]:.6f}")

        # Assert: Monotonía y umbral
        logger.info("ASSERT: Verificando serie")
        series = list(distances.values())
        assert all(later < earlier for earlier, later in zip(series, series[1:])), \
            "La distancia debe decrecer estrictamente"
        assert distances[baseline.check_time] < baseline.threshold, \
            f"En t={baseline.check_time} la distancia debe quedar bajo {baseline.threshold}"
        logger.info("OK: Relajacion verificada")

    def test_distancia_nula_para_el_estado_limite(self, asymptotics_service, gaussian_state_service,
                                                  case1_noise):
        """
        Verifica el caso trivial φ_t = φ_{ρ̃_t}.

        GIVEN la función característica de ρ̃_20
        WHEN se mide su distancia de relajación en t = 20
        THEN vale 0
        """
        logger.info("=== TEST: Distancia nula ===")

        logger.info("ARRANGE: Estado limite en t=20")
        reference = gaussian_state_service.relaxation_charfn(case1_noise, 20.0)

        logger.info("ACT: Calculando distancia")
        distance = asymptotics_service.relaxation_distance(reference, case1_noise, 20.0)

        logger.info("ASSERT: Distancia nula")
        assert distance == pytest.approx(0.0, abs=1e-12), "Un estado dista 0 de sí mismo"
        logger.info("OK: Distancia nula")

    def test_regimen_de_posicion_no_soportado(self, asymptotics_service, propagator_service, ground_charfn,
                                             case1_noise, case2_noise):
        """
        Verifica las precondiciones de la relajación.

        GIVEN ruido solo en posición, o un tiempo no positivo
        WHEN se pide la distancia de relajación
        THEN se lanza UnsupportedRegimeError o DomainError
        """
        logger.info("=== TEST: Precondiciones de relajacion ===")

        logger.info("ACT & ASSERT: Ruido en posicion")
        phi_t = propagator_service.evolve(ground_charfn, case2_noise, 10.0)
        with pytest.raises(UnsupportedRegimeError):
            asymptotics_service.relaxation_distance(phi_t, case2_noise, 10.0)

        logger.info("ACT & ASSERT: t = 0")
        with pytest.raises(DomainError):
            asymptotics_service.relaxation_distance(ground_charfn, case1_noise, 0.0)
        logger.info("OK: Precondiciones verificadas")

    def test_indices_del_estado_limite(self, asymptotics_service, gaussian_state_service, case1_noise):
        """
        Verifica la consistencia entre ρ̃_t y la ley asintótica.

        GIVEN A^{x,x} = 1 y t = 5, 10, 50
        WHEN se calculan los índices cerrados de ρ̃_t
        THEN S_X = √3·t^{-2} y S_K = S_X dentro de 1e-10
        """
        logger.info("=== TEST: Indices del estado limite ===")
        prediction = asymptotics_service.classify_and_predict(case1_noise)

        for t in (5.0, 10.0, 50.0):
            logger.info(f"ACT: Indices de rho~ en t={t}")
            closed = gaussian_state_service.closed_form_index(gaussian_state_service.limit_state_position(
                case1_noise, t))
            propagator_units = gaussian_index(gaussian_state_service.relaxation_charfn(case1_noise, t))

            logger.info(f"ASSERT: S_X={closed.s_x:.6e}, prediccion={prediction.predicted(t):.6e}")
            assert closed.s_x == pytest.approx(prediction.predicted(t), rel=1e-10), "S_X(ρ̃_t) = √3·t^{-2}"
            assert closed.s_k == pytest.approx(closed.s_x, rel=1e-10), "S_K(ρ̃_t) = S_X(ρ̃_t)"
            assert propagator_units.s_x == pytest.approx(closed.s_x, rel=1e-10), \
                "El cambio de unidades no altera el índice"
        logger.info("OK: Estado limite consistente con la ley")

    @pytest.mark.slow
    def test_saltos_de_poisson_equivalen_a_difusion(self, coherence_service, propagator_service,
                                                   analytic_ground_charfn, ground_charfn, atoms_noise, case1_noise):
        """
        Verifica que átomos de momento con B^{x,x} = 1 siguen la serie de A^{x,x} = 1.

        GIVEN el estado fundamental evolucionado con saltos ±1 y con difusión
        WHEN se comparan los S_X en t = 30, 40 y 60
        THEN difieren menos de 5% relativo
        """
        logger.info("=== TEST: Poisson frente a difusion ===")

        for t in (30.0, 40.0, 60.0):
            logger.info(f"ACT: Indices en t={t}")
            jumps = coherence_service.coherence_index(propagator_service.evolve(analytic_ground_charfn,
                                                                                 atoms_noise, t))
            diffusion = gaussian_index(propagator_service.evolve(ground_charfn, case1_noise, t))
            logger.info(f"S_X saltos={jumps.s_x:.6e}, difusion={diffusion.s_x:.6e}")

            logger.info("ASSERT: Diferencia relativa")
            assert jumps.s_x == pytest.approx(diffusion.s_x, rel=0.05), f"Series equivalentes en t={t}"
        logger.info("OK: Equivalencia Poisson-gaussiana")

    def test_experimento_de_relajacion_con_baseline(self, tmp_path):
        """
        Verifica el experimento `relaxation` de punta a punta.

        GIVEN configs/relaxation_case1.cfg, que apunta al baseline del repositorio
        WHEN se ejecuta el experimento
        THEN termina con estado 0, escribe relaxation.csv y resume el chequeo del baseline
        """
        logger.info("=== TEST: Experimento de relajacion ===")

        # Arrange: Configuración del repositorio
        logger.info("ARRANGE: Leyendo configuracion")
        config = ConfigParser().parse_file(ROOT / "configs" / "relaxation_case1.cfg")

        # Act: Ejecución
        logger.info("ACT: Ejecutando experimento")
        result = ExperimentCommandService().handle_run_experiment(
            RunExperimentCommand(config=config, output_dir=str(tmp_path))
        )
        logger.info(f"Resultado: exit={result.exit_code}, marcas={result.flagged}")

        # Assert: Artefactos
        logger.info("ASSERT: Verificando artefactos")
        assert result.exit_code == EXIT_OK, "Ninguna verificación debe fallar"
        header, rows = read_table(tmp_path / "relaxation.csv")
        assert "weyl" in header, "La tabla cita la convención de Weyl"
        assert [float(row["t"]) for row in rows] == [10.0, 20.0, 40.0], "Una fila por tiempo"
        assert all(row["status"] == "ok" for row in rows), "Todas las filas ok"
        assert result.summary["baseline"]["distance"] < result.summary["baseline"]["threshold"], \
            "El resumen registra el chequeo del baseline"
        assert (tmp_path / "manifest.json").exists(), "Se escribe el manifiesto"
        logger.info("OK: Experimento de relajacion completo")

    def test_baseline_de_otro_experimento_es_error_de_configuracion(self):
        """
        Verifica la lectura del baseline.

        GIVEN el baseline de la marginal clásica
        WHEN se lee como baseline de relajación
        THEN se lanza ConfigError sobre el campo baseline
        """
        logger.info("=== TEST: Baseline equivocado ===")

        logger.info("ACT & ASSERT: Leyendo baseline clasico como relajacion")
        with pytest.raises(ConfigError) as exc_info:
            load_baseline(ROOT / "baselines" / "classical_marginal_case1.json", "relaxation")
        assert exc_info.value.field == "baseline", "Debe nombrar el campo baseline"

        logger.info("ACT & ASSERT: Archivo inexistente")
        with pytest.raises(ConfigError):
            load_baseline(ROOT / "baselines" / "missing.json", "relaxation")
        logger.info("OK: Baselines validados")
