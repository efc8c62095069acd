# coherence/domain/services/coherence_service.py

import logging
import math
from typing import Optional, Tuple

import numpy as np

from coherence.domain.model.valueobjects.index_report import IndexReport, Observable
from phase_space.domain.model.valueobjects.characteristic_function import CharFn, SampledCharFn
from phase_space.domain.model.valueobjects.phase_grid import PhaseGrid
from phase_space.domain.services.phase_gradient_service import PhaseGradientService, spectral_derivative
from phase_space.domain.services.phase_quadrature_service import PhaseQuadratureService, check_sampled_decay
from shared.domain.exceptions import DegenerateStateError, UnsupportedOperationError

logger = logging.getLogger(__name__)

DEGENERACY_THRESHOLD = 1e-12

# orden de las integrales acumuladas en una sola pasada
_HS, _COMM_X, _COMM_K, _ANTI_X, _ANTI_K = range(5)


class CoherenceService:
    """
    Normas de Hilbert-Schmidt de conmutadores y anticonmutadores en forma de
    espacio de fases, con la medida (2π)^{-d} dq dp:

        ‖[X, ρ]‖₂² = (2π)^{-d} ∫ |q|² |φ|²
        ‖{X - ⟨X⟩, ρ}‖₂² = 4 (2π)^{-d} ∫ |∇_p φ - v_p φ|²,  v_p = ∇_p φ(0,0)

    y lo análogo para K con |p|², ∇_q y v_q.
    """

    def __init__(self, quadrature: Optional[PhaseQuadratureService] = None,
                 gradients: Optional[PhaseGradientService] = None):
        self.quadrature = quadrature or PhaseQuadratureService()
        self.gradients = gradients or PhaseGradientService()

    # ------------------------------------------------------------------
    # Normas individuales
    # ------------------------------------------------------------------

    def commutator_norm(self, phi: CharFn, observable: Observable, grid: Optional[PhaseGrid] = None) -> float:
        slot = _COMM_X if Observable(observable) is Observable.X else _COMM_K
        return math.sqrt(self._integrals(phi, grid, with_gradient=False)[slot])

    def anticommutator_norm(self, phi: CharFn, observable: Observable, grid: Optional[PhaseGrid] = None) -> float:
        slot = _ANTI_X if Observable(observable) is Observable.X else _ANTI_K
        return math.sqrt(self._integrals(phi, grid, with_gradient=True)[slot])

    # ------------------------------------------------------------------
    # Índice completo
    # ------------------------------------------------------------------

    def coherence_index(self, phi: CharFn, grid: Optional[PhaseGrid] = None) -> IndexReport:
        grid = grid or self.quadrature.fit_grid(phi)
        integrals = self._integrals(phi, grid, with_gradient=True)
        hs, comm_x, comm_k, anti_x, anti_k = (math.sqrt(max(v, 0.0)) for v in integrals)
        for observable, anti, comm in ((Observable.X, anti_x, comm_x), (Observable.K, anti_k, comm_k)):
            if anti <= DEGENERACY_THRESHOLD * max(comm, hs):
                raise DegenerateStateError(
                    f"anticommutator norm for {observable.value} vanishes; the index is undefined",
                    observable=observable.value,
                )
        v_q, v_p = self.gradients.origin_gradient(phi)
        return IndexReport(
            c_x=comm_x / hs, d_x=anti_x / hs, s_x=comm_x / anti_x,
            c_k=comm_k / hs, d_k=anti_k / hs, s_k=comm_k / anti_k,
            hs_norm=hs,
            mean_position=np.real(-1j * v_p).tolist(),
            mean_momentum=np.real(1j * v_q).tolist(),
            metadata={"method": "numeric", **{k: str(v) for k, v in grid.describe().items()}},
        )

    def uncertainty_products(self, phi: CharFn, grid: Optional[PhaseGrid] = None) -> Tuple[float, float]:
        """(C_X·D_K, C_K·D_X); ambos ≥ ½ para todo estado"""
        report = self.coherence_index(phi, grid)
        return report.cx_dk, report.ck_dx

    # ------------------------------------------------------------------
    # Integrales
    # ------------------------------------------------------------------

    def _integrals(self, phi: CharFn, grid: Optional[PhaseGrid], with_gradient: bool) -> np.ndarray:
        """(2π)^{-d}·(∫|φ|², ∫|q|²|φ|², ∫|p|²|φ|², 4∫|∇_pφ - v_pφ|², 4∫|∇_qφ - v_qφ|²)"""
        measure = (2.0 * math.pi) ** (-phi.dim)
        if isinstance(phi, SampledCharFn):
            return measure * self._sampled_integrals(phi, with_gradient)
        if with_gradient and not phi.has_gradient:
            raise UnsupportedOperationError(
                f"{type(phi).__name__} has no registered gradient; sample it on a grid first"
            )
        grid = grid or self.quadrature.fit_grid(phi)
        v_q, v_p = self.gradients.origin_gradient(phi) if with_gradient else (None, None)

        def reducer(idx, q, p):
            if with_gradient:
                values, grad_q, grad_p = phi.evaluate_with_gradient(q, p)
            else:
                values = phi.evaluate(q, p)
            weight = np.abs(values) ** 2
            sums = np.zeros(5)
            sums[_HS] = np.sum(weight)
            sums[_COMM_X] = np.sum(np.sum(q ** 2, axis=1) * weight)
            sums[_COMM_K] = np.sum(np.sum(p ** 2, axis=1) * weight)
            if with_gradient:
                sums[_ANTI_X] = 4.0 * np.sum(np.abs(grad_p - v_p[None, :] * values[:, None]) ** 2)
                sums[_ANTI_K] = 4.0 * np.sum(np.abs(grad_q - v_q[None, :] * values[:, None]) ** 2)
            return sums

        return measure * self.quadrature.accumulate(grid, reducer)

    def _sampled_integrals(self, phi: SampledCharFn, with_gradient: bool) -> np.ndarray:
        check_sampled_decay(phi)
        grid = phi.grid
        d = grid.dim
        q, p = grid.mesh()
        weight = np.abs(phi.values) ** 2
        sums = np.zeros(5)
        sums[_HS] = np.sum(weight)
        sums[_COMM_X] = np.sum(np.sum(q ** 2, axis=-1) * weight)
        sums[_COMM_K] = np.sum(np.sum(p ** 2, axis=-1) * weight)
        if with_gradient:
            v_q, v_p = self.gradients.origin_gradient(phi)
            for component in range(d):
                grad_q = spectral_derivative(phi.values, component, grid.spacing_q)
                grad_p = spectral_derivative(phi.values, d + component, grid.spacing_p)
                sums[_ANTI_X] += 4.0 * np.sum(np.abs(grad_p - v_p[component] * phi.values) ** 2)
                sums[_ANTI_K] += 4.0 * np.sum(np.abs(grad_q - v_q[component] * phi.values) ** 2)
        return sums * grid.cell_volume
