# phase_space/domain/services/phase_quadrature_service.py

import logging
import math
from typing import Callable, Optional

import numpy as np

from phase_space.domain.model.valueobjects.characteristic_function import CharFn, SampledCharFn
from phase_space.domain.model.valueobjects.phase_grid import PhaseGrid
from shared.domain.exceptions import GridError, TruncationError
from shared.infrastructure.parallel_executor import map_blocks
from shared.infrastructure.settings import settings

logger = logging.getLogger(__name__)

TileReducer = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def whitening_frame(precision: Optional[np.ndarray]) -> Optional[np.ndarray]:
    """T con T·Tᵀ = P⁻¹, de modo que zᵀPz = |w|² para z = T·w; None si P no es definida positiva"""
    if precision is None:
        return None
    try:
        lower = np.linalg.cholesky(0.5 * (precision + precision.T))
    except np.linalg.LinAlgError:
        return None
    return np.linalg.inv(lower).T


class PhaseQuadratureService:
    """
    Cuadraturas sobre el espacio de fases con la medida (2π)^{-d} dq dp.

    Las funciones analíticas se integran en una malla blanqueada por su
    envolvente gaussiana; las muestreadas usan su propia malla.
    """

    def __init__(self, threads: Optional[int] = None):
        self.threads = threads

    # ------------------------------------------------------------------
    # Ajuste de mallas
    # ------------------------------------------------------------------

    def fit_grid(self, phi: CharFn, points: Optional[int] = None) -> PhaseGrid:
        if isinstance(phi, SampledCharFn):
            return phi.grid
        frame = whitening_frame(phi.envelope)
        if frame is not None:
            n = points or (settings.QUADRATURE_POINTS_1D if phi.dim == 1 else settings.QUADRATURE_POINTS_2D)
            grid = PhaseGrid.square(phi.dim, settings.QUADRATURE_HALF_WIDTH, n, frame)
        else:
            n = points or (settings.GRID_POINTS_1D if phi.dim == 1 else settings.GRID_POINTS_2D)
            grid = PhaseGrid.square(phi.dim, settings.DEFAULT_HALF_WIDTH, n)
        return self.expand_until_decayed(phi, grid)

    def fit_axis_grid(self, phi: CharFn, points: Optional[int] = None,
                      half_width: Optional[float] = None) -> PhaseGrid:
        """Malla alineada con los ejes (para FFT) ajustada a la envolvente de φ"""
        if isinstance(phi, SampledCharFn):
            return phi.grid
        d = phi.dim
        points = points or (settings.GRID_POINTS_1D if d == 1 else settings.GRID_POINTS_2D)
        if half_width is None:
            half_width = settings.DEFAULT_HALF_WIDTH
            if phi.envelope is not None:
                smallest = float(np.min(np.linalg.eigvalsh(phi.envelope)))
                if smallest > 0:
                    half_width = settings.QUADRATURE_HALF_WIDTH / math.sqrt(smallest)
        return self.expand_until_decayed(phi, PhaseGrid.square(d, half_width, points))

    def expand_until_decayed(self, phi: CharFn, grid: PhaseGrid) -> PhaseGrid:
        magnitude = float("nan")
        for attempt in range(settings.MAX_WIDTH_DOUBLINGS + 1):
            magnitude = self.boundary_magnitude(phi, grid)
            if magnitude < settings.BOUNDARY_TOLERANCE:
                return grid
            if attempt < settings.MAX_WIDTH_DOUBLINGS:
                logger.info("Boundary magnitude %.3e; doubling half-width to (%.4g, %.4g)",
                            magnitude, 2 * grid.half_width_q, 2 * grid.half_width_p)
                grid = grid.expanded(2.0)
        raise TruncationError(
            f"Characteristic function does not decay below {settings.BOUNDARY_TOLERANCE:g} "
            f"after {settings.MAX_WIDTH_DOUBLINGS} doublings (boundary magnitude {magnitude:.3e})",
            boundary_magnitude=magnitude,
        )

    def boundary_magnitude(self, phi: CharFn, grid: PhaseGrid) -> float:
        if isinstance(phi, SampledCharFn) and phi.grid.same_as(grid):
            return sampled_boundary_magnitude(phi.values)
        indices = grid.boundary_flat_indices()
        chunks = [indices[i:i + settings.TILE_POINTS] for i in range(0, len(indices), settings.TILE_POINTS)]

        def run(chunk):
            q, p = grid.points_at(chunk)
            return float(np.max(np.abs(phi.evaluate(q, p))))

        return max(map_blocks(run, chunks, self.threads))

    # ------------------------------------------------------------------
    # Muestreo e integración
    # ------------------------------------------------------------------

    def sample(self, phi: CharFn, grid: PhaseGrid) -> SampledCharFn:
        if not grid.is_axis_aligned:
            raise GridError("Sampling for transforms requires an axis-aligned grid")
        if isinstance(phi, SampledCharFn) and phi.grid.same_as(grid):
            return phi

        def run(idx):
            q, p = grid.points_at(idx)
            return phi.evaluate(q, p)

        values = np.concatenate(map_blocks(run, grid.tiles(settings.TILE_POINTS), self.threads))
        return SampledCharFn(grid, values.reshape(grid.shape), phi.is_state)

    def accumulate(self, grid: PhaseGrid, reducer: TileReducer) -> np.ndarray:
        """Σ reducer(idx, q, p) · volumen de celda, evaluado por bloques"""

        def run(idx):
            q, p = grid.points_at(idx)
            return np.asarray(reducer(idx, q, p), dtype=float)

        partials = map_blocks(run, grid.tiles(settings.TILE_POINTS), self.threads)
        return np.sum(partials, axis=0) * grid.cell_volume

    def hs_norm(self, phi: CharFn, grid: Optional[PhaseGrid] = None) -> float:
        """‖ρ‖₂ = ((2π)^{-d} ∫|φ|²)^{1/2}"""
        measure = (2.0 * math.pi) ** (-phi.dim)
        if isinstance(phi, SampledCharFn):
            check_sampled_decay(phi)
            total = np.sum(np.abs(phi.values) ** 2) * phi.grid.cell_volume
            return math.sqrt(measure * total)
        grid = grid or self.fit_grid(phi)
        total = self.accumulate(grid, lambda idx, q, p: np.sum(np.abs(phi.evaluate(q, p)) ** 2))
        return math.sqrt(measure * float(total))


def sampled_boundary_magnitude(values: np.ndarray) -> float:
    magnitude = 0.0
    for axis in range(values.ndim):
        for edge in (0, -1):
            face = np.take(values, edge, axis=axis)
            magnitude = max(magnitude, float(np.max(np.abs(face))))
    return magnitude


def check_sampled_decay(phi: SampledCharFn, tolerance: Optional[float] = None) -> None:
    tolerance = settings.BOUNDARY_TOLERANCE if tolerance is None else tolerance
    magnitude = sampled_boundary_magnitude(phi.values)
    if magnitude >= tolerance:
        raise TruncationError(
            f"Sampled characteristic function reaches {magnitude:.3e} at the grid boundary "
            f"(tolerance {tolerance:g})",
            boundary_magnitude=magnitude,
        )
