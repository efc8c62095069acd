# noise/domain/services/levy_exponent_service.py

import logging
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from noise.domain.model.aggregates.noise_spec import NoiseSpec
from noise.domain.model.valueobjects.jump_measure import JumpMeasure
from noise.domain.model.valueobjects.moment_matrix import MomentMatrix
from shared.domain.exceptions import DomainError, NumericalInconsistencyError
from shared.infrastructure.settings import settings

logger = logging.getLogger(__name__)

DEFAULT_SCAN_RADIUS = 2.0
DEFAULT_SCAN_STEPS = 64
# elementos de (puntos × nodos × átomos) por bloque
_CHUNK_ELEMENTS = 1 << 22


@lru_cache(maxsize=32)
def _legendre(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(nodes)


def as_batch(dim: int, q, p) -> Tuple[np.ndarray, np.ndarray, tuple]:
    """Normaliza (q, p) a lotes (n, d) y devuelve la forma de salida"""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if dim == 1:
        q, p = np.broadcast_arrays(q, p)
        return q.reshape(-1, 1), p.reshape(-1, 1), q.shape
    q, p = np.broadcast_arrays(np.atleast_1d(q), np.atleast_1d(p))
    return q.reshape(-1, dim), p.reshape(-1, dim), q.shape[:-1]


def _shaped(values: np.ndarray, shape: tuple):
    values = values.reshape(shape)
    return float(values) if shape == () else values


def integrated_quadratic_matrix(matrix: np.ndarray, t: float) -> np.ndarray:
    """
    Q_t con ∫₀ᵗ ⟨(q+up, p)|A(q+up, p)⟩ du = zᵀ Q_t z, z = (q, p).
    """
    d = matrix.shape[0] // 2
    a_qq, a_qp = matrix[:d, :d], matrix[:d, d:]
    a_pq, a_pp = matrix[d:, :d], matrix[d:, d:]
    return np.block([
        [t * a_qq, 0.5 * t ** 2 * a_qq + t * a_qp],
        [0.5 * t ** 2 * a_qq + t * a_pq, t ** 3 / 3.0 * a_qq + 0.5 * t ** 2 * (a_qp + a_pq) + t * a_pp],
    ])


class LevyExponentService:
    """
    Exponente de Lévy ℓ(q,p) = -½⟨(q,p)|A(q,p)⟩ + ψ_μ(q,p) y su integral
    a lo largo del flujo libre ∫₀ᵗ ℓ(q+up, p) du.

    La parte cuadrática se evalúa en forma cerrada; la parte de saltos por
    Gauss-Legendre con duplicación de nodos.
    """

    integrated_quadratic_matrix = staticmethod(integrated_quadratic_matrix)

    def __init__(self, nodes: Optional[int] = None, max_nodes: Optional[int] = None,
                 rtol: Optional[float] = None):
        self.nodes = nodes or settings.GAUSS_LEGENDRE_NODES
        self.max_nodes = max_nodes or settings.GAUSS_LEGENDRE_MAX_NODES
        self.rtol = rtol if rtol is not None else settings.GAUSS_LEGENDRE_RTOL

    # ------------------------------------------------------------------
    # Parte de saltos
    # ------------------------------------------------------------------

    def psi_mu(self, jump: JumpMeasure, q, p):
        qb, pb, shape = as_batch(jump.dim, q, p)
        return _shaped(self.psi_batch(jump, qb, pb), shape)

    @staticmethod
    def psi_batch(jump: JumpMeasure, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        if jump.is_empty:
            return np.zeros(len(q))
        phases = q @ jump.momentum_jumps.T + p @ jump.position_jumps.T
        # cos φ - 1 = -2 sin²(φ/2), sin pérdida de precisión cerca del origen
        return -2.0 * (np.sin(0.5 * phases) ** 2) @ jump.weights

    @staticmethod
    def psi_gradient_batch(jump: JumpMeasure, q: np.ndarray, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if jump.is_empty:
            return np.zeros_like(q), np.zeros_like(p)
        phases = q @ jump.momentum_jumps.T + p @ jump.position_jumps.T
        weighted = np.sin(phases) * jump.weights
        return -weighted @ jump.momentum_jumps, -weighted @ jump.position_jumps

    @staticmethod
    def second_moment_matrix(jump: JumpMeasure) -> MomentMatrix:
        rows = jump.displacements
        matrix = (rows * jump.weights[:, None]).T @ rows if len(rows) else np.zeros((2 * jump.dim, 2 * jump.dim))
        return MomentMatrix(0.5 * (matrix + matrix.T), jump.dim)

    # ------------------------------------------------------------------
    # Exponente puntual
    # ------------------------------------------------------------------

    def levy_exponent(self, noise: NoiseSpec, q, p):
        qb, pb, shape = as_batch(noise.dim, q, p)
        return _shaped(self.levy_exponent_batch(noise, qb, pb), shape)

    def levy_exponent_batch(self, noise: NoiseSpec, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        z = np.hstack([q, p])
        quadratic = -0.5 * np.einsum("ni,ij,nj->n", z, noise.diffusion, z)
        return quadratic + self.psi_batch(noise.jump, q, p)

    # ------------------------------------------------------------------
    # Exponente integrado
    # ------------------------------------------------------------------

    def integrated_exponent(self, noise: NoiseSpec, q, p, t: float):
        qb, pb, shape = as_batch(noise.dim, q, p)
        return _shaped(self.integrated_batch(noise, qb, pb, t), shape)

    def integrated_batch(self, noise: NoiseSpec, q: np.ndarray, p: np.ndarray, t: float) -> np.ndarray:
        _check_time(t)
        values = quadratic_closed_form(noise.diffusion, q, p, t)
        if not noise.jump.is_empty and t > 0:
            values = values + self._adaptive_jump_integral(noise.jump, q, p, t, with_gradient=False)[0]
        return values

    def integrated_with_gradient(self, noise: NoiseSpec, q: np.ndarray, p: np.ndarray,
                                 t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(I, ∇_q I, ∇_p I) en un solo recorrido de cuadratura"""
        _check_time(t)
        z = np.hstack([q, p])
        values = quadratic_closed_form(noise.diffusion, q, p, t)
        gradient = -(z @ integrated_quadratic_matrix(noise.diffusion, t))
        grad_q, grad_p = gradient[:, :noise.dim], gradient[:, noise.dim:]
        if not noise.jump.is_empty and t > 0:
            jump_value, jump_q, jump_p = self._adaptive_jump_integral(noise.jump, q, p, t, with_gradient=True)
            values, grad_q, grad_p = values + jump_value, grad_q + jump_q, grad_p + jump_p
        return values, grad_q, grad_p

    def envelope_matrix(self, noise: NoiseSpec, t: float) -> np.ndarray:
        """Q_t de la aproximación cuadrática ℓ ≈ -½⟨z|(A + B_slot)z⟩"""
        slot = self.second_moment_matrix(noise.jump).slot_matrix()
        return integrated_quadratic_matrix(noise.diffusion + slot, t)

    def _adaptive_jump_integral(self, jump: JumpMeasure, q, p, t, with_gradient: bool):
        nodes = self.nodes
        previous = self._jump_integral(jump, q, p, t, nodes, with_gradient)
        while True:
            if 2 * nodes > self.max_nodes:
                logger.warning("Gauss-Legendre reached %d nodes without meeting rtol=%g", nodes, self.rtol)
                return previous
            nodes *= 2
            current = self._jump_integral(jump, q, p, t, nodes, with_gradient)
            change = float(np.max(np.abs(current[0] - previous[0]))) if len(q) else 0.0
            scale = float(np.max(np.abs(current[0]))) if len(q) else 0.0
            if change <= self.rtol * scale or scale == 0.0:
                logger.debug("Jump integral converged with %d nodes (change %.2e)", nodes, change)
                return current
            previous = current

    @staticmethod
    def _jump_integral(jump: JumpMeasure, q, p, t, nodes: int, with_gradient: bool):
        reference, reference_weights = _legendre(nodes)
        u = 0.5 * t * (reference + 1.0)
        weights = 0.5 * t * reference_weights
        k_atoms, x_atoms = jump.momentum_jumps, jump.position_jumps

        n = len(q)
        value = np.zeros(n)
        grad_q = np.zeros_like(q) if with_gradient else None
        grad_p = np.zeros_like(p) if with_gradient else None
        chunk = max(1, _CHUNK_ELEMENTS // max(1, nodes * len(jump.weights)))
        for start in range(0, n, chunk):
            sl = slice(start, min(start + chunk, n))
            qs, ps = q[sl], p[sl]
            # fase en el punto (q + u p, p) de cada nodo: (n, m, átomos)
            base = (qs @ k_atoms.T + ps @ x_atoms.T)[:, None, :]
            drift = (ps @ k_atoms.T)[:, None, :] * u[None, :, None]
            phases = base + drift
            value[sl] = (-2.0 * np.sin(0.5 * phases) ** 2 @ jump.weights) @ weights
            if with_gradient:
                weighted = np.sin(phases) * jump.weights
                node_q = -(weighted @ k_atoms)
                node_p = -(weighted @ x_atoms)
                grad_q[sl] = np.einsum("nmd,m->nd", node_q, weights)
                grad_p[sl] = np.einsum("nmd,m->nd", node_q * u[None, :, None] + node_p, weights)
        return value, grad_q, grad_p

    # ------------------------------------------------------------------
    # Cotas cuadráticas locales
    # ------------------------------------------------------------------

    def check_quadratic_bounds(self, jump: JumpMeasure, epsilon: float,
                               radius_scan: Optional[Sequence[float]] = None,
                               directions: Optional[np.ndarray] = None) -> float:
        """
        Mayor radio explorado δ tal que, para todo |l| ≤ δ,
        -((1+ε)/2)⟨l|Bl⟩ - s|l|² ≤ ψ(l) ≤ -((1-ε)/2)⟨l|Bl⟩ + s|l|²,
        con s = ε/2 para medidas atómicas y s = 0 para densidades.
        """
        if epsilon <= 0:
            raise DomainError("epsilon must be > 0")
        radii = np.sort(np.asarray(
            radius_scan if radius_scan is not None
            else np.linspace(DEFAULT_SCAN_RADIUS / DEFAULT_SCAN_STEPS, DEFAULT_SCAN_RADIUS, DEFAULT_SCAN_STEPS),
            dtype=float,
        ))
        directions = scan_directions(2 * jump.dim) if directions is None else np.asarray(directions, float)
        slot = self.second_moment_matrix(jump).slot_matrix()
        slack = 0.0 if jump.is_density else 0.5 * epsilon
        d = jump.dim

        delta = None
        for radius in radii:
            l = radius * directions
            psi = self.psi_batch(jump, l[:, :d], l[:, d:])
            quadratic = np.einsum("ni,ij,nj->n", l, slot, l)
            tolerance = 1e-12 * np.maximum(1.0, np.abs(quadratic))
            lower = -0.5 * (1 + epsilon) * quadratic - slack * radius ** 2
            upper = -0.5 * (1 - epsilon) * quadratic + slack * radius ** 2
            if np.all(psi >= lower - tolerance) and np.all(psi <= upper + tolerance):
                delta = float(radius)
            else:
                break
        if delta is None:
            raise NumericalInconsistencyError(
                f"Quadratic bounds fail at the smallest scanned radius {radii[0]:g} (epsilon={epsilon:g})"
            )
        logger.debug("Quadratic bounds hold up to delta=%g for epsilon=%g", delta, epsilon)
        return delta


def quadratic_closed_form(matrix: np.ndarray, q: np.ndarray, p: np.ndarray, t: float) -> np.ndarray:
    """
    -½ ∫₀ᵗ ⟨(q+up, p)|A(q+up, p)⟩ du reordenada como
    -½[(t/4)⟨z|Az⟩ + (t³/3)⟨w|Aw⟩] con w = (p + (3/2t)q, (3/2t)p).
    """
    if t == 0:
        return np.zeros(len(q))
    z = np.hstack([q, p])
    w = np.hstack([p + 1.5 / t * q, 1.5 / t * p])
    return -0.5 * (0.25 * t * np.einsum("ni,ij,nj->n", z, matrix, z)
                   + t ** 3 / 3.0 * np.einsum("ni,ij,nj->n", w, matrix, w))


def scan_directions(size: int, count: int = 128) -> np.ndarray:
    """Direcciones unitarias deterministas: ejes, diagonales y muestras sembradas"""
    if size == 2:
        angles = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        return np.column_stack([np.cos(angles), np.sin(angles)])
    rng = np.random.default_rng(0)
    random = rng.standard_normal((count, size))
    directions = np.vstack([np.eye(size), -np.eye(size), random])
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def _check_time(t: float) -> None:
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
