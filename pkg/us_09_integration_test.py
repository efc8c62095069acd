"""
Integration Tests para US09: Ejecutor de Experimentos y CLI

User Story:
Como investigador, deseo describir un experimento en un archivo de
configuración por secciones y ejecutarlo desde la línea de comandos, con
artefactos CSV, un manifiesto reproducible y códigos de salida claros.

Ejecutar todos los tests de esta US:
    pytest us_09_integration_test.py -v

Ejecutar un test específico:
    pytest us_09_integration_test.py::TestUS09EjecutorExperimentos::test_serie_de_indices_con_ajuste -v
"""

import json
import logging
from pathlib import Path

import numpy as np
import pytest

from experiments.application.internal.commandservices.experiment_command_service import ExperimentCommandService
from experiments.domain.model.commands.experiment_config import ExperimentKind
from experiments.domain.model.commands.run_experiment_command import RunExperimentCommand
from experiments.domain.model.valueobjects.experiment_manifest import (
    EXIT_CONFIG_ERROR, EXIT_OK, ExperimentManifest
)
from experiments.infrastructure.artifact_writer import read_table
from experiments.infrastructure.config_parser import parse_config
from experiments.interfaces.cli.experiment_cli import main
from phase_space.infrastructure.grid_serializer import GridSerializer
from shared.domain.exceptions import ConfigError
from shared.infrastructure.settings import settings

logger = logging.getLogger(__name__)

ROOT = Path(__file__).parent

VALIDATE_CONFIG = """
[experiment]
kind = validate

[noise]
dimension = 1
diffusion = 0 0; 0 0

[state]
family = ground
"""

EVOLVE_CONFIG = """
[experiment]
times = 0, 1, 2

[noise]
dimension = 1
diffusion = 1 0; 0 0

[state]
family = gaussian_1d
A = 0.6
B = 0.2
C = 0.3
D = 0.4
E = 0.3
F = 0.075

[grid]
points = 64
"""


@pytest.mark.us09
@pytest.mark.integration
class TestUS09EjecutorExperimentos:
    """
    Suite de tests de integración para ConfigParser, ExperimentCommandService
    y la CLI de experimentos.
    """

    def test_configuracion_valida(self, case1_config_text):
        """
        Verifica la lectura de una configuración completa.

        GIVEN la configuración del caso de difusión en momento
        WHEN se interpreta
        THEN se obtienen tiempos, ruido, estado y valores por defecto de Monte Carlo
        """
        logger.info("=== TEST: Configuracion valida ===")

        logger.info("ACT: Interpretando configuracion")
        config = parse_config(case1_config_text)

        logger.info("ASSERT: Verificando secciones")
        assert config.kind is None, "Sin kind declarado"
        assert config.experiment.times == [15.0, 20.0, 30.0, 40.0, 60.0], "Tiempos en orden"
        assert config.dim == 1, "Dimensión del ruido"
        assert np.array_equal(config.noise.xx, [[1.0]]), "Bloque A^{x,x} = 1"
        assert config.state_family == "ground", "Estado fundamental"
        assert config.monte_carlo.seed == settings.MC_SEED, "Semilla por defecto"
        assert config.source["noise"]["diffusion"] == "1 0; 0 0", "Texto original conservado"
        logger.info("OK: Configuracion interpretada")

    @pytest.mark.parametrize("text, field, fragment", [
        ("[experiment]\ntimes = 5, 3\n[noise]\ndimension = 1\n", "times", "strictly increasing"),
        ("[noise]\ndimension = 1\n[grid]\ngamma = 1\n", "gamma", "unknown key 'gamma'"),
        ("[noise]\ndimension = 1\n[extras]\n", "extras", "unknown section [extras]"),
        ("[noise]\ndimension = 1\ndiffusion = 1 0 0; 0 0\n", "diffusion", "matrix row 0 has 3 entries, expected 2"),
        ("[noise]\ndimension = 1\n[grid]\npoints = 100\n", "points", "power of two"),
        ("[experiment]\ntimes = 1\n", "noise", "missing required section [noise]"),
        ("[noise]\ndimension = 1\n[state]\nfamily = ground\nA = 1\n", "A", "ground state"),
    ])
    def test_errores_de_configuracion(self, text, field, fragment):
        """
        Verifica los diagnósticos de configuración.

        GIVEN configuraciones con tiempos no crecientes, claves o secciones desconocidas,
              filas de matriz cortas o largas, mallas no potencia de dos
        WHEN se interpretan
        THEN se lanza ConfigError nombrando el campo
        """
        logger.info(f"=== TEST: Error de configuracion en '{field}' ===")

        logger.info("ACT & ASSERT: Interpretando")
        with pytest.raises(ConfigError) as exc_info:
            parse_config(text)
        logger.info(f"Error: {exc_info.value}")
        assert exc_info.value.field == field, f"Debe nombrar el campo {field}"
        assert fragment in str(exc_info.value), "El mensaje describe el problema"
        logger.info("OK: Error diagnosticado")

    def test_linea_del_error(self):
        """
        Verifica que el error cite la línea.

        GIVEN una clave desconocida en la línea 6
        WHEN se interpreta
        THEN ConfigError.line = 6
        """
        logger.info("=== TEST: Linea del error ===")
        text = "[experiment]\ntimes = 1, 2\n\n[noise]\ndimension = 1\nwidth = 3\n"

        logger.info("ACT & ASSERT: Interpretando")
        with pytest.raises(ConfigError) as exc_info:
            parse_config(text)
        assert exc_info.value.line == 6, "La clave desconocida está en la línea 6"
        logger.info("OK: Linea reportada")

    def test_serie_de_indices_con_ajuste(self, case1_config_text, tmp_path):
        """
        Verifica el experimento index_series.

        GIVEN A^{x,x} = 1, estado fundamental y t = 15, 20, 30, 40, 60
        WHEN se ejecuta index_series
        THEN la potencia ajustada está a menos de 0.1 de -2 y el manifiesto es reproducible
        """
        logger.info("=== TEST: Serie de indices ===")

        # Arrange: Comando
        logger.info("ARRANGE: Preparando comando")
        command = RunExperimentCommand(config=parse_config(case1_config_text), kind=ExperimentKind.INDEX_SERIES,
                                       output_dir=str(tmp_path), seed=99)

        # Act: Ejecución
        logger.info("ACT: Ejecutando experimento")
        result = ExperimentCommandService().handle_run_experiment(command)
        logger.info(f"Resultado: {result.summary}")

        # Assert: Ajuste, tablas y manifiesto
        logger.info("ASSERT: Verificando ajuste y artefactos")
        assert result.exit_code == EXIT_OK, "Sin verificaciones fallidas"
        assert abs(result.summary["fit"]["power"] + 2.0) <= 0.1, "Potencia ≈ -2"
        _, rows = read_table(tmp_path / "index_series.csv")
        assert len(rows) == 5 and all(row["status"] == "ok" for row in rows), "Una fila ok por tiempo"
        manifest = ExperimentManifest.model_validate(json.loads((tmp_path / "manifest.json").read_text()))
        assert manifest.kind == "index_series", "Tipo registrado"
        assert manifest.seeds["monte_carlo"] == 99, "La semilla del comando prevalece"
        assert manifest.times == [15.0, 20.0, 30.0, 40.0, 60.0], "Tiempos registrados"
        assert "weyl" in manifest.conventions, "Convenciones registradas"
        assert "index_series.csv" in manifest.artifacts, "Artefactos listados"
        logger.info("OK: Serie de indices completa")

    def test_experimento_evolve_con_malla_fija(self, tmp_path):
        """
        Verifica el experimento evolve.

        GIVEN un estado gaussiano desplazado, A^{x,x} = 1, t = 0, 1, 2 y 64 puntos por eje
        WHEN se ejecuta evolve
        THEN termina con estado 0 y escribe una función característica por tiempo
        """
        logger.info("=== TEST: Experimento evolve ===")

        logger.info("ACT: Ejecutando experimento")
        result = ExperimentCommandService().handle_run_experiment(
            RunExperimentCommand(config=parse_config(EVOLVE_CONFIG), kind=ExperimentKind.EVOLVE,
                                 output_dir=str(tmp_path))
        )

        logger.info("ASSERT: Verificando artefactos")
        assert result.exit_code == EXIT_OK, f"Sin marcas: {result.flagged}"
        _, rows = read_table(tmp_path / "evolve.csv")
        assert [row["file"] for row in rows] == ["charfn_t000.csv", "charfn_t001.csv", "charfn_t002.csv"], \
            "Un archivo por tiempo"
        norms = [float(row["hs_norm"]) for row in rows]
        assert all(later < earlier for earlier, later in zip(norms, norms[1:])), "La norma HS decrece"
        assert norms[0] == pytest.approx((0.3 / 0.6) ** 0.25, abs=1e-6), "‖ρ₀‖₂ = (C/A)^{1/4} para el estado mixto"
        saved = GridSerializer().read_charfn(tmp_path / "charfn_t001.csv")
        assert saved.grid.points_q == 64 and saved.is_state, "La malla congelada se relee"
        assert abs(saved.value_at_origin() - 1.0) <= 1e-9, "φ_t(0) = 1 tras la relectura"
        logger.info("OK: Evolve completo")

    def test_experimento_requiere_tiempos_y_tipo_coherente(self, case1_config_text, tmp_path):
        """
        Verifica las validaciones del comando.

        GIVEN una configuración sin tiempos, o con kind distinto al pedido
        WHEN se ejecuta el experimento
        THEN se lanza ConfigError sobre times o kind
        """
        logger.info("=== TEST: Validaciones del comando ===")
        service = ExperimentCommandService()

        logger.info("ACT & ASSERT: Sin tiempos")
        no_times = parse_config("[noise]\ndimension = 1\ndiffusion = 1 0; 0 0\n")
        with pytest.raises(ConfigError) as exc_info:
            service.handle_run_experiment(RunExperimentCommand(
                config=no_times, kind=ExperimentKind.ASYMPTOTICS, output_dir=str(tmp_path)))
        assert exc_info.value.field == "times", "Debe nombrar times"

        logger.info("ACT & ASSERT: Kind incoherente")
        declared = parse_config("[experiment]\nkind = relaxation\n" + case1_config_text.replace("[experiment]", ""))
        with pytest.raises(ConfigError) as exc_info:
            service.handle_run_experiment(RunExperimentCommand(
                config=declared, kind=ExperimentKind.CLASSICAL, output_dir=str(tmp_path)))
        assert exc_info.value.field == "kind", "Debe nombrar kind"

        logger.info("ACT & ASSERT: Sin kind")
        with pytest.raises(ConfigError):
            service.handle_run_experiment(RunExperimentCommand(config=parse_config(case1_config_text),
                                                               output_dir=str(tmp_path)))
        logger.info("OK: Comando validado")

    def test_cli_validate_y_codigos_de_salida(self, tmp_path, capsys):
        """
        Verifica la CLI de punta a punta.

        GIVEN un archivo de validación con ruido nulo y otro con tiempos decrecientes
        WHEN se ejecutan `validate` e `index`
        THEN los códigos de salida son 0 y 1, y el primero escribe el reporte de suites
        """
        logger.info("=== TEST: CLI ===")

        # Arrange: Archivos de configuración
        logger.info("ARRANGE: Escribiendo configuraciones")
        valid = tmp_path / "validate.cfg"
        valid.write_text(VALIDATE_CONFIG, encoding="utf-8")
        invalid = tmp_path / "invalid.cfg"
        invalid.write_text("[experiment]\ntimes = 5, 3\n[noise]\ndimension = 1\n", encoding="utf-8")
        out = tmp_path / "run"

        # Act & Assert: validate
        logger.info("ACT & ASSERT: validate")
        code = main(["validate", "--config", str(valid), "--out", str(out), "--threads", "1"])
        captured = capsys.readouterr()
        assert code == EXIT_OK, f"validate debe terminar con 0: {captured.err}"
        assert captured.out.strip().endswith("manifest.json"), "Imprime la ruta del manifiesto"
        _, rows = read_table(out / "validation_report.csv")
        assert rows and all(row["status"] != "fail" for row in rows), "Ninguna suite falla"

        # Act & Assert: error de configuración
        logger.info("ACT & ASSERT: index con configuracion invalida")
        code = main(["index", "--config", str(invalid), "--out", str(tmp_path / "bad")])
        captured = capsys.readouterr()
        assert code == EXIT_CONFIG_ERROR, "Error de configuración → 1"
        assert "times" in captured.err, "El mensaje nombra el campo"

        logger.info("ACT & ASSERT: Archivo inexistente")
        assert main(["index", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG_ERROR
        logger.info("OK: CLI verificada")

    def test_cli_validate_con_difusion_y_saltos(self, tmp_path, capsys):
        """
        Verifica la validación completa con ruido mixto desde la CLI.

        GIVEN configs/validate_mixed.cfg (difusión diagonal y un átomo de momento)
        WHEN se ejecuta `validate`
        THEN el código es 0, ninguna suite falla, el residuo del generador pasa
        y la forma cerrada gaussiana se omite por el ruido de saltos
        """
        logger.info("=== TEST: CLI validate con ruido mixto ===")

        # Arrange: Configuración versionada
        logger.info("ARRANGE: Usando configs/validate_mixed.cfg")
        config = ROOT / "configs" / "validate_mixed.cfg"
        out = tmp_path / "mixed"

        # Act: Ejecutar la CLI
        logger.info("ACT: validate")
        code = main(["validate", "--config", str(config), "--out", str(out), "--threads", "1"])
        captured = capsys.readouterr()

        # Assert: Reporte de suites
        logger.info("ASSERT: Verificando el reporte")
        assert code == EXIT_OK, f"validate con ruido mixto debe terminar con 0: {captured.err}"
        _, rows = read_table(out / "validation_report.csv")
        by_suite = {row["suite"]: row for row in rows}
        assert all(row["status"] != "fail" for row in rows), "Ninguna suite falla"
        assert by_suite["generator_residual"]["status"] == "pass", "El residuo del generador se verifica"
        assert float(by_suite["generator_residual"]["value"]) <= 1e-3, "Residuo ≤ 1e-3"
        closed_form = by_suite["gaussian_closed_form"]
        assert closed_form["status"] == "skipped", "Con saltos no hay forma cerrada gaussiana"
        assert "jump noise" in closed_form["detail"], "El detalle explica la omisión"
        logger.info("OK: Validación mixta verificada")
