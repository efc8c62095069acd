# classical_limit/domain/services/classical_comparison_service.py

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import stats

from classical_limit.domain.model.aggregates.path_ensemble import PathEnsemble
from classical_limit.domain.model.valueobjects.classical_density import ClassicalDensity
from noise.domain.model.aggregates.noise_spec import NoiseSpec
from noise.domain.services.levy_exponent_service import LevyExponentService
from phase_space.domain.model.valueobjects.phase_grid import PhaseGrid
from phase_space.domain.model.valueobjects.wigner_function import WignerFn
from shared.domain.exceptions import DomainError, RangeError, UnsupportedOperationError
from shared.infrastructure.settings import settings

logger = logging.getLogger(__name__)

MIN_IN_RANGE_FRACTION = 0.999
WINDOW_RESOLUTION = 5.0

PANEL_COLUMNS_SUFFIX = ["exact_re", "exact_im", "empirical_re", "empirical_im", "stderr", "deviation_in_stderr"]


class ClassicalComparisonService:
    """
    Estadísticos del ensamble clásico frente al semigrupo cuántico:
    función característica empírica, histograma p_t y distancia L² relativa
    a la función de Wigner.
    """

    def __init__(self, levy: Optional[LevyExponentService] = None):
        self.levy = levy or LevyExponentService()

    # ------------------------------------------------------------------
    # Función característica empírica
    # ------------------------------------------------------------------

    @staticmethod
    def empirical_charfn(ens: PathEnsemble, q, p) -> Tuple[complex, float]:
        """E[exp(i q·k_t + i p·x_t)] con su error estándar"""
        values, errors = ClassicalComparisonService.empirical_charfn_batch(
            ens, np.reshape(np.asarray(q, float), (1, ens.dim)), np.reshape(np.asarray(p, float), (1, ens.dim))
        )
        return complex(values[0]), float(errors[0])

    @staticmethod
    def empirical_charfn_batch(ens: PathEnsemble, q: np.ndarray, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        values = np.empty(len(q), dtype=complex)
        errors = np.empty(len(q))
        for index in range(len(q)):
            samples = np.exp(1j * (ens.momenta @ q[index] + ens.positions @ p[index]))
            mean = samples.mean()
            values[index] = mean
            errors[index] = math.sqrt(float(np.mean(np.abs(samples - mean) ** 2)) / ens.size)
        return values, errors

    def characteristic_panel(self, ens: PathEnsemble, noise: NoiseSpec, panel: np.ndarray) -> List[List[float]]:
        """Filas (q…, p…, exacto, empírico, stderr, desviación/stderr) sobre un panel (m, 2d)"""
        d = ens.dim
        q, p = panel[:, :d], panel[:, d:]
        exact = np.exp(self.levy.integrated_batch(noise, q, p, ens.t))
        empirical, errors = self.empirical_charfn_batch(ens, q, p)
        deviation = np.abs(empirical - exact)
        ratio = np.where(errors > 0, deviation / np.where(errors > 0, errors, 1.0),
                         np.where(deviation > 0, np.inf, 0.0))
        return [
            list(panel[i]) + [exact[i].real, exact[i].imag, empirical[i].real, empirical[i].imag,
                              errors[i], ratio[i]]
            for i in range(len(panel))
        ]

    @staticmethod
    def momentum_chi_square(ens: PathEnsemble, variance: float, bins: int) -> Tuple[float, float]:
        """
        Bondad de ajuste de k_t (d=1) frente a N(0, variance) sobre clases
        equiprobables. Devuelve (estadístico, p-valor con bins - 1 grados).
        """
        if ens.dim != 1:
            raise UnsupportedOperationError("momentum chi-square is available for d=1 only")
        if variance <= 0 or bins < 2:
            raise DomainError(f"need variance > 0 and bins >= 2, got {variance}, {bins}")
        interior = stats.norm.ppf(np.arange(1, bins) / bins, scale=math.sqrt(variance))
        counts = np.bincount(np.searchsorted(interior, ens.momenta[:, 0]), minlength=bins)
        expected = ens.size / bins
        statistic = float(np.sum((counts - expected) ** 2) / expected)
        return statistic, float(stats.chi2.sf(statistic, bins - 1))

    # ------------------------------------------------------------------
    # Densidad clásica
    # ------------------------------------------------------------------

    @staticmethod
    def classical_window_grid(precision: np.ndarray, points: Optional[int] = None) -> PhaseGrid:
        """
        Malla de fases cuyos ejes de Wigner resuelven la nube clásica: paso
        σ/5 por eje, con σ_x² = P_pp y σ_v² = P_qq de la envolvente P.
        """
        points = points or settings.CLASSICAL_GRID_POINTS
        d = precision.shape[0] // 2
        sigma_v = math.sqrt(float(np.max(np.diag(precision)[:d])))
        sigma_x = math.sqrt(float(np.max(np.diag(precision)[d:])))
        dx = sigma_x / WINDOW_RESOLUTION
        dv = sigma_v / WINDOW_RESOLUTION
        return PhaseGrid(d, math.pi / dv, math.pi / dx, points, points)

    def classical_density(self, ens: PathEnsemble, grid: PhaseGrid) -> ClassicalDensity:
        if ens.dim > 2:
            raise UnsupportedOperationError("Classical densities are available for d <= 2")
        if ens.dim != grid.dim:
            raise RangeError(f"ensemble dimension {ens.dim} differs from grid dimension {grid.dim}")
        x_axis, v_axis = grid.wigner_axes()
        d = ens.dim
        edges = [_centered_edges(x_axis)] * d + [_centered_edges(v_axis)] * d
        samples = np.hstack([ens.positions, ens.momenta])
        counts, _ = np.histogramdd(samples, bins=edges)
        inside = float(counts.sum())
        fraction = inside / ens.size
        if fraction < MIN_IN_RANGE_FRACTION:
            lower = np.quantile(samples, 0.0005, axis=0)
            upper = np.quantile(samples, 0.9995, axis=0)
            raise RangeError(
                f"only {fraction:.4%} of the samples fall inside the grid window",
                suggested_bounds=(lower.tolist(), upper.tolist()),
            )
        cell = float(((x_axis[1] - x_axis[0]) * (v_axis[1] - v_axis[0])) ** d)
        values = counts / (inside * cell)
        logger.debug("Histogram with %.4f%% of %d samples in range", 100 * fraction, ens.size)
        return ClassicalDensity(values, x_axis, v_axis, d, fraction)

    @staticmethod
    def wigner_classical_distance(wigner: WignerFn, density: ClassicalDensity) -> float:
        """(∫|W - p_t|²)^{1/2} / (∫|p_t|²)^{1/2}"""
        if wigner.dim != density.dim or not wigner.same_axes(density.x_axis, density.v_axis):
            raise RangeError("Wigner function and classical density live on different grids")
        reference = float(np.sum(density.values ** 2))
        if reference == 0.0:
            raise RangeError("classical density is identically zero")
        return math.sqrt(float(np.sum((wigner.values - density.values) ** 2)) / reference)


def _centered_edges(axis: np.ndarray) -> np.ndarray:
    step = axis[1] - axis[0]
    return np.concatenate([axis - 0.5 * step, [axis[-1] + 0.5 * step]])
