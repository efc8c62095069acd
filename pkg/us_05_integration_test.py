"""
Integration Tests para US05: Índices de Coherencia

User Story:
Como investigador, deseo medir la coherencia de un estado con el cociente
S = ‖[X, ρ]‖₂ / ‖{X - ⟨X⟩, ρ}‖₂ (y su análogo en K) calculado en el
espacio de fases, para seguir la decoherencia de cualquier estado.

Ejecutar todos los tests de esta US:
    pytest us_05_integration_test.py -v

Ejecutar un test específico:
    pytest us_05_integration_test.py::TestUS05IndicesCoherencia::test_indice_numerico_contra_forma_cerrada -v
"""

import logging

import numpy as np
import pytest

from coherence.domain.model.valueobjects.index_report import Observable
from gaussian_states.domain.model.valueobjects.gaussian_kernel_params import GaussianKernelParams1D
from gaussian_states.domain.services.gaussian_state_service import gaussian_index
from phase_space.domain.model.valueobjects.characteristic_function import AnalyticCharFn, SampledCharFn
from phase_space.domain.model.valueobjects.phase_grid import PhaseGrid
from shared.domain.exceptions import DegenerateStateError, UnsupportedOperationError

logger = logging.getLogger(__name__)

INDEX_FIELDS = ("c_x", "d_x", "s_x", "c_k", "d_k", "s_k", "hs_norm")


@pytest.mark.us05
@pytest.mark.integration
class TestUS05IndicesCoherencia:
    """
    Suite de tests de integración para CoherenceService: normas de
    conmutadores, índices S_X y S_K y estados degenerados.
    """

    def test_normas_del_estado_fundamental(self, coherence_service, analytic_ground_charfn):
        """
        Verifica las normas sin normalizar del estado fundamental.

        GIVEN φ(q,p) = exp(-(q² + p²)/4) con gradiente registrado
        WHEN se calculan ‖[X, ρ]‖₂ y ‖{X - ⟨X⟩, ρ}‖₂
        THEN ambas valen 1
        """
        logger.info("=== TEST: Normas del estado fundamental ===")

        logger.info("ACT: Calculando normas")
        commutator = coherence_service.commutator_norm(analytic_ground_charfn, Observable.X)
        anticommutator = coherence_service.anticommutator_norm(analytic_ground_charfn, Observable.X)
        logger.info(f"Conmutador={commutator:.12f}, anticonmutador={anticommutator:.12f}")

        logger.info("ASSERT: Verificando valores")
        assert commutator == pytest.approx(1.0, abs=1e-9), "‖[X, ρ]‖₂ = 1"
        assert anticommutator == pytest.approx(1.0, abs=1e-9), "‖{X, ρ}‖₂ = 1"
        logger.info("OK: Normas correctas")

    def test_indice_del_estado_fundamental(self, coherence_service, ground_charfn):
        """
        Verifica el índice completo del estado fundamental.

        GIVEN el estado fundamental gaussiano
        WHEN se calcula el índice numérico
        THEN S_X = S_K = 1, ‖ρ‖₂ = 1 y las medias son nulas
        """
        logger.info("=== TEST: Indice del estado fundamental ===")

        logger.info("ACT: Calculando indice")
        report = coherence_service.coherence_index(ground_charfn)
        logger.info(f"Reporte: {report}")

        logger.info("ASSERT: Verificando indices")
        assert report.s_x == pytest.approx(1.0, abs=1e-9), "S_X = 1"
        assert report.s_k == pytest.approx(1.0, abs=1e-9), "S_K = 1"
        assert report.hs_norm == pytest.approx(1.0, abs=1e-9), "Estado puro"
        assert np.allclose(report.mean_position, [0.0]) and np.allclose(report.mean_momentum, [0.0]), \
            "Medias nulas"
        assert report.metadata["method"] == "numeric", "El índice se calculó numéricamente"
        logger.info("OK: Indice correcto")

    def test_indice_numerico_contra_forma_cerrada(self, coherence_service, gaussian_state_service):
        """
        Verifica la cuadratura contra las fórmulas gaussianas.

        GIVEN un estado gaussiano con B, D, E no nulos
        WHEN se comparan el índice numérico y el cerrado
        THEN coinciden con error relativo ≤ 1e-6, medias incluidas
        """
        logger.info("=== TEST: Indice numerico contra forma cerrada ===")

        # Arrange: Estado
        logger.info("ARRANGE: Estado gaussiano desplazado")
        params = GaussianKernelParams1D(A=0.6, B=0.2, C=0.3, D=0.4, E=0.3, F=0.075)
        phi = gaussian_state_service.gaussian_charfn(params)

        # Act: Ambos índices
        logger.info("ACT: Calculando indices")
        numeric = coherence_service.coherence_index(phi)
        closed = gaussian_state_service.closed_form_index(params)

        # Assert: Coincidencia
        logger.info("ASSERT: Comparando campo a campo")
        for field in INDEX_FIELDS:
            assert getattr(numeric, field) == pytest.approx(getattr(closed, field), rel=1e-6), \
                f"El campo {field} no coincide"
        assert np.allclose(numeric.mean_position, closed.mean_position, atol=1e-9), "Posición media"
        assert np.allclose(numeric.mean_momentum, closed.mean_momentum, atol=1e-9), "Momento medio"
        logger.info("OK: Cuadratura coincide con la forma cerrada")

    def test_indice_sobre_malla_muestreada(self, coherence_service, quadrature_service, ground_charfn):
        """
        Verifica el índice con derivadas espectrales.

        GIVEN el estado fundamental muestreado en L = 12, N = 128
        WHEN se calcula el índice de la malla
        THEN S_X = S_K = 1 dentro de 1e-8
        """
        logger.info("=== TEST: Indice sobre malla muestreada ===")

        logger.info("ARRANGE: Muestreando phi")
        sampled = quadrature_service.sample(ground_charfn, PhaseGrid.square(1, 12.0, 128))

        logger.info("ACT: Calculando indice")
        report = coherence_service.coherence_index(sampled)

        logger.info("ASSERT: Verificando indices")
        assert report.s_x == pytest.approx(1.0, abs=1e-8), "S_X = 1 sobre la malla"
        assert report.s_k == pytest.approx(1.0, abs=1e-8), "S_K = 1 sobre la malla"
        logger.info("OK: Indice de malla correcto")

    def test_decoherencia_con_difusion(self, coherence_service, propagator_service, ground_charfn, case1_noise):
        """
        Verifica que S_X decrece bajo difusión de momento.

        GIVEN el estado fundamental y A^{x,x} = 1
        WHEN se calcula S_X en t = 0, 1, 2, 4
        THEN S_X decrece y coincide con la forma cerrada
        """
        logger.info("=== TEST: Decoherencia con difusion ===")

        series = []
        for t in (0.0, 1.0, 2.0, 4.0):
            logger.info(f"ACT: Indice en t={t}")
            phi = propagator_service.evolve(ground_charfn, case1_noise, t)
            numeric = coherence_service.coherence_index(phi)
            exact = gaussian_index(phi)
            assert numeric.s_x == pytest.approx(exact.s_x, rel=1e-6), f"S_X numérico en t={t}"
            series.append(numeric.s_x)

        logger.info(f"ASSERT: Serie S_X = {series}")
        assert all(later < earlier for earlier, later in zip(series, series[1:])), "S_X debe decrecer"
        logger.info("OK: Decoherencia observada")

    def test_incertidumbre_con_saltos(self, coherence_service, propagator_service, analytic_ground_charfn,
                                      atoms_noise):
        """
        Verifica las relaciones de incertidumbre de un estado no gaussiano.

        GIVEN el estado fundamental evolucionado con átomos de momento hasta t = 1
        WHEN se calculan los productos C_X·D_K y C_K·D_X
        THEN ambos son ≥ ½
        """
        logger.info("=== TEST: Incertidumbre con saltos ===")

        logger.info("ARRANGE: Evolucionando con saltos")
        phi = propagator_service.evolve(analytic_ground_charfn, atoms_noise, 1.0)

        logger.info("ACT: Calculando productos")
        cx_dk, ck_dx = coherence_service.uncertainty_products(phi)
        logger.info(f"Productos: {cx_dk:.6f}, {ck_dx:.6f}")

        logger.info("ASSERT: Verificando cotas")
        assert cx_dk >= 0.5 - 1e-9, "C_X·D_K ≥ ½"
        assert ck_dx >= 0.5 - 1e-9, "C_K·D_X ≥ ½"
        logger.info("OK: Relaciones de incertidumbre cumplidas")

    def test_anticonmutador_nulo_es_degenerado(self, coherence_service):
        """
        Verifica el error para índices indefinidos.

        GIVEN φ(q,p) = exp(-q²/4), constante en p, sobre una malla explícita
        WHEN se calcula el índice
        THEN se lanza DegenerateStateError para el observable X
        """
        logger.info("=== TEST: Anticonmutador nulo ===")

        # Arrange: Función constante en p
        logger.info("ARRANGE: phi constante en p")

        def fn(q, p):
            return np.exp(-0.25 * q[:, 0] ** 2).astype(complex)

        def gradient_fn(q, p):
            values = fn(q, p)[:, None]
            return -0.5 * q * values, np.zeros(p.shape, dtype=complex)

        phi = AnalyticCharFn(1, fn, gradient_fn=gradient_fn)

        # Act & Assert: Índice indefinido
        logger.info("ACT & ASSERT: Calculando indice")
        with pytest.raises(DegenerateStateError) as exc_info:
            coherence_service.coherence_index(phi, PhaseGrid.square(1, 8.0, 64))
        assert exc_info.value.observable == "X", "Debe nombrar el observable X"
        logger.info("OK: Estado degenerado detectado")

    def test_conmutador_nulo_sobre_una_fila(self, coherence_service):
        """
        Verifica ‖[X, ρ]‖₂ = 0 cuando φ solo vive en q = 0.

        GIVEN una malla con φ distinta de cero solo en la fila q = 0
        WHEN se calcula el conmutador con X
        THEN vale exactamente 0
        """
        logger.info("=== TEST: Conmutador nulo ===")

        logger.info("ARRANGE: Malla con una sola fila")
        grid = PhaseGrid.square(1, 12.0, 64)
        values = np.zeros(grid.shape, dtype=complex)
        values[grid.points_q // 2, :] = np.exp(-0.25 * grid.axis_p() ** 2)
        phi = SampledCharFn(grid, values)

        logger.info("ACT: Calculando conmutador")
        norm = coherence_service.commutator_norm(phi, Observable.X)

        logger.info("ASSERT: Norma nula")
        assert norm == 0.0, "El conmutador con X debe anularse"
        logger.info("OK: Conmutador nulo")

    def test_sin_gradiente_no_soportado(self, coherence_service):
        """
        Verifica el error para callables sin gradiente.

        GIVEN una función analítica sin gradiente
        WHEN se pide la norma del anticonmutador
        THEN se lanza UnsupportedOperationError
        """
        logger.info("=== TEST: Sin gradiente ===")
        phi = AnalyticCharFn(1, lambda q, p: np.exp(-0.25 * (q[:, 0] ** 2 + p[:, 0] ** 2)),
                             envelope=0.5 * np.eye(2))

        logger.info("ACT & ASSERT: Anticonmutador")
        with pytest.raises(UnsupportedOperationError):
            coherence_service.anticommutator_norm(phi, Observable.K)
        logger.info("OK: Operacion rechazada")
