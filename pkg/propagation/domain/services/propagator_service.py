# propagation/domain/services/propagator_service.py

import logging
from typing import Optional, Tuple

import numpy as np

from classical_limit.domain.services.classical_comparison_service import ClassicalComparisonService
from classical_limit.domain.services.levy_path_sampler import LevyPathSampler
from noise.domain.model.aggregates.noise_spec import NoiseSpec
from noise.domain.services.levy_exponent_service import LevyExponentService
from phase_space.domain.model.valueobjects.characteristic_function import (
    CharFn, GaussianCharFn, SampledCharFn
)
from phase_space.domain.model.valueobjects.phase_grid import PhaseGrid
from propagation.domain.model.valueobjects.evolved_charfn import EvolvedCharFn
from shared.domain.exceptions import DomainError, UnsupportedOperationError
from shared.infrastructure.parallel_executor import map_blocks
from shared.infrastructure.settings import settings

logger = logging.getLogger(__name__)

MIN_MC_SAMPLES = 1000
MAX_GENERATOR_STEP = 1e-2
PANEL_BOX = 1.5


class PropagatorService:
    """
    Evolución exacta Γ_t en la representación de funciones características:
    φ_t(q, p) = exp(∫₀ᵗ ℓ(q + u·p, p) du) · φ₀(q + t·p, p).

    No hay pasos de tiempo: cada t se evalúa de forma independiente.
    """

    def __init__(self, levy: Optional[LevyExponentService] = None,
                 sampler: Optional[LevyPathSampler] = None, threads: Optional[int] = None):
        self.levy = levy or LevyExponentService()
        self.sampler = sampler or LevyPathSampler(threads=threads)
        self.threads = threads

    # ------------------------------------------------------------------
    # Evolución
    # ------------------------------------------------------------------

    def evolve(self, phi0: CharFn, noise: NoiseSpec, t: float) -> CharFn:
        _check_time(t)
        if phi0.dim != noise.dim:
            raise DomainError(f"state dimension {phi0.dim} differs from noise dimension {noise.dim}")
        if not phi0.is_state:
            logger.warning("Evolving a characteristic function that is not normalized as a state")
        if t == 0:
            return phi0
        if isinstance(phi0, GaussianCharFn) and noise.jump.is_empty:
            return phi0.sheared(t).with_added_precision(
                self.levy.integrated_quadratic_matrix(noise.diffusion, t)
            )
        if isinstance(phi0, SampledCharFn):
            free = self.free_evolve(phi0, t)
            exponent = self._grid_exponent(noise, phi0.grid, t)
            return free.with_values(free.values * np.exp(exponent))
        return EvolvedCharFn(phi0, noise, t, self.levy)

    def free_evolve(self, phi: CharFn, t: float) -> CharFn:
        """φ(q, p) ↦ φ(q + t·p, p)"""
        _check_time(t)
        if t == 0:
            return phi
        if isinstance(phi, GaussianCharFn):
            return phi.sheared(t)
        if isinstance(phi, SampledCharFn):
            return phi.with_values(sheared_grid_values(phi.grid, phi.values, t))
        return EvolvedCharFn(phi, NoiseSpec.zero(phi.dim), t, self.levy)

    def _grid_exponent(self, noise: NoiseSpec, grid: PhaseGrid, t: float) -> np.ndarray:
        def run(idx):
            q, p = grid.points_at(idx)
            return self.levy.integrated_batch(noise, q, p, t)

        return np.concatenate(map_blocks(run, grid.tiles(settings.TILE_POINTS), self.threads)).reshape(grid.shape)

    # ------------------------------------------------------------------
    # Consistencia con el generador
    # ------------------------------------------------------------------

    def generator_residual(self, phi0: CharFn, noise: NoiseSpec, h: float,
                           panel: Optional[np.ndarray] = None) -> float:
        """
        max |(φ_h - φ₀)/h - (ℓ·φ₀ + p·∇_q φ₀)| sobre un panel fijo de puntos.
        """
        if not 0 < h <= MAX_GENERATOR_STEP:
            raise DomainError(f"h must lie in (0, {MAX_GENERATOR_STEP}], got {h}")
        if not phi0.has_gradient:
            raise UnsupportedOperationError("generator_residual needs a characteristic function with gradient")
        panel = self.state_panel(phi0) if panel is None else np.asarray(panel, dtype=float)
        d = phi0.dim
        q, p = panel[:, :d], panel[:, d:]
        evolved = self.evolve(phi0, noise, h)
        values = phi0.evaluate(q, p)
        grad_q, _ = phi0.evaluate_gradient(q, p)
        rhs = self.levy.levy_exponent_batch(noise, q, p) * values + np.sum(p * grad_q, axis=1)
        lhs = (evolved.evaluate(q, p) - values) / h
        residual = float(np.max(np.abs(lhs - rhs)))
        logger.debug("Generator residual %.3e at h=%g", residual, h)
        return residual

    # ------------------------------------------------------------------
    # Oráculo Monte Carlo
    # ------------------------------------------------------------------

    def mc_multiplier(self, noise: NoiseSpec, q, p, t: float, n: int,
                      seed: Optional[int] = None, steps: Optional[int] = None) -> Tuple[complex, float]:
        """Estimación de exp(∫₀ᵗ ℓ(q + u·p, p) du) con su error estándar"""
        _check_time(t)
        if n < MIN_MC_SAMPLES:
            raise DomainError(f"at least {MIN_MC_SAMPLES} samples are required, got {n}")
        q = np.atleast_1d(np.asarray(q, dtype=float))
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if not np.any(q) and not np.any(p):
            return 1.0 + 0.0j, 0.0
        ensemble = self.sampler.sample_paths(noise, t, n, steps, seed)
        return ClassicalComparisonService.empirical_charfn(ensemble, q, p)

    # ------------------------------------------------------------------
    # Paneles de puntos
    # ------------------------------------------------------------------

    def phase_panel(self, noise: NoiseSpec, t: float, size: Optional[int] = None,
                    seed: Optional[int] = None) -> np.ndarray:
        """Panel sembrado (size, 2d) escalado al ancho del multiplicador de ruido"""
        return seeded_panel(self.levy.envelope_matrix(noise, t), size, seed)

    def state_panel(self, phi: CharFn, size: Optional[int] = None, seed: Optional[int] = None) -> np.ndarray:
        envelope = phi.envelope if phi.envelope is not None else np.zeros((2 * phi.dim, 2 * phi.dim))
        return seeded_panel(envelope, size, seed)


def seeded_panel(envelope: np.ndarray, size: Optional[int] = None, seed: Optional[int] = None) -> np.ndarray:
    """
    Puntos z = T·w con w uniforme en [-1.5, 1.5]^{2d}; T escala cada
    dirección propia de la envolvente por λ^{-1/2} (1 si λ es nula).
    """
    size = size or settings.PANEL_SIZE
    seed = settings.PANEL_SEED if seed is None else seed
    values, vectors = np.linalg.eigh(0.5 * (envelope + envelope.T))
    tolerance = 1e-12 * max(1.0, float(np.max(np.abs(values))))
    scales = np.where(values > tolerance, 1.0 / np.sqrt(np.where(values > tolerance, values, 1.0)), 1.0)
    frame = vectors * scales
    rng = np.random.default_rng(seed)
    w = rng.uniform(-PANEL_BOX, PANEL_BOX, size=(size, envelope.shape[0]))
    return w @ frame.T


def sheared_grid_values(grid: PhaseGrid, values: np.ndarray, t: float) -> np.ndarray:
    """
    φ(q + t·p, p) sobre la malla por desplazamientos espectrales en q; los
    puntos cuya imagen cae fuera de la malla valen cero.
    """
    d = grid.dim
    result = np.asarray(values, dtype=complex)
    p_axis = grid.axis_p()
    q_axis = grid.axis_q()
    frequencies = 2.0 * np.pi * np.fft.fftfreq(grid.points_q, d=grid.spacing_q)
    frequencies[grid.points_q // 2] = 0.0
    valid = np.ones(grid.shape, dtype=bool)
    for axis in range(d):
        shape_q = [1] * (2 * d)
        shape_q[axis] = grid.points_q
        shape_p = [1] * (2 * d)
        shape_p[d + axis] = grid.points_p
        omega = frequencies.reshape(shape_q)
        shift = (t * p_axis).reshape(shape_p)
        spectrum = np.fft.fft(np.fft.ifftshift(result, axes=axis), axis=axis)
        result = np.fft.fftshift(np.fft.ifft(spectrum * np.exp(1j * omega * shift), axis=axis), axes=axis)
        target = q_axis.reshape(shape_q) + shift
        valid &= (target >= q_axis[0] - 1e-12) & (target <= q_axis[-1] + 1e-12)
    return np.where(valid, result, 0.0)


def _check_time(t: float) -> None:
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
