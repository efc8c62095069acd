# classical_limit/domain/services/levy_path_sampler.py

import logging
import math
from typing import Optional, Tuple

import numpy as np

from classical_limit.domain.model.aggregates.path_ensemble import PathEnsemble
from noise.domain.model.aggregates.noise_spec import NoiseSpec
from phase_space.domain.model.valueobjects.phase_grid import is_power_of_two
from shared.domain.exceptions import DomainError
from shared.infrastructure.parallel_executor import map_blocks
from shared.infrastructure.settings import settings

logger = logging.getLogger(__name__)

MIN_STEPS = 64


def diffusion_factor(diffusion: np.ndarray) -> np.ndarray:
    """L con L·Lᵀ = A, por raíz espectral (A solo semidefinida)"""
    values, vectors = np.linalg.eigh(diffusion)
    return vectors * np.sqrt(np.clip(values, 0.0, None))


class LevyPathSampler:
    """
    Muestrea el proceso clásico de Lévy en el espacio de fases.

    La parte browniana (covarianza A·dt, componentes (k, x) en el orden de
    los slots (q, p)) se construye por puentes brownianos diádicos con un
    flujo aleatorio por nivel, de modo que duplicar `steps` refina la misma
    trayectoria. Los saltos usan relojes de Poisson exactos en un flujo
    propio. Cada bloque de muestras tiene su semilla derivada con
    SeedSequence.
    """

    def __init__(self, block_size: Optional[int] = None, threads: Optional[int] = None):
        self.block_size = block_size or settings.MC_BLOCK_SIZE
        self.threads = threads

    def sample_paths(self, noise: NoiseSpec, t: float, n: int, steps: Optional[int] = None,
                     seed: Optional[int] = None) -> PathEnsemble:
        steps = steps or settings.MC_STEPS
        seed = settings.MC_SEED if seed is None else int(seed)
        if n < 1:
            raise DomainError(f"sample count must be >= 1, got {n}")
        if steps < MIN_STEPS or not is_power_of_two(steps):
            raise DomainError(f"steps must be a power of two >= {MIN_STEPS}, got {steps}")
        if t < 0:
            raise DomainError(f"time must be >= 0, got {t}")

        sizes = [min(self.block_size, n - start) for start in range(0, n, self.block_size)]
        children = np.random.SeedSequence(seed).spawn(len(sizes))
        factor = diffusion_factor(noise.diffusion)
        logger.debug("Sampling %d paths in %d blocks (t=%g, steps=%d)", n, len(sizes), t, steps)

        def run(block):
            size, child = block
            return self._sample_block(noise, factor, t, size, steps, child)

        results = map_blocks(run, list(zip(sizes, children)), self.threads)
        positions = np.vstack([r[0] for r in results])
        momenta = np.vstack([r[1] for r in results])
        counts = np.concatenate([r[2] for r in results])
        return PathEnsemble(positions, momenta, counts, float(t), seed, steps, self.block_size, noise)

    def _sample_block(self, noise: NoiseSpec, factor: np.ndarray, t: float, size: int, steps: int,
                      child: np.random.SeedSequence) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        d = noise.dim
        brownian_seed, jump_seed = child.spawn(2)
        positions = np.zeros((size, d))
        momenta = np.zeros((size, d))
        counts = np.zeros(size, dtype=np.int64)
        if t == 0:
            return positions, momenta, counts

        if np.any(factor != 0.0):
            path = brownian_bridge(brownian_seed, size, steps, t, 2 * d) @ factor.T
            k_path, x_path = path[:, :, :d], path[:, :, d:]
            dt = t / steps
            # ∫₀ᵗ k ds por punto medio de cada paso
            integrated = dt * (k_path[:, 1:, :] + k_path[:, :-1, :]).sum(axis=1) * 0.5
            momenta += k_path[:, -1, :]
            positions += x_path[:, -1, :] + integrated

        jump = noise.jump
        if not jump.is_empty:
            rng = np.random.default_rng(jump_seed)
            rate = jump.total_rate
            counts = rng.poisson(rate * t, size)
            total = int(counts.sum())
            if total:
                owners = np.repeat(np.arange(size), counts)
                times = rng.uniform(0.0, t, total)
                atoms = rng.choice(len(jump.weights), size=total, p=jump.weights / rate)
                kicks_k = jump.momentum_jumps[atoms]
                kicks_x = jump.position_jumps[atoms]
                drift = kicks_x + kicks_k * (t - times)[:, None]
                for axis in range(d):
                    momenta[:, axis] += np.bincount(owners, weights=kicks_k[:, axis], minlength=size)
                    positions[:, axis] += np.bincount(owners, weights=drift[:, axis], minlength=size)
        return positions, momenta, counts


def brownian_bridge(seed: np.random.SeedSequence, size: int, steps: int, t: float,
                    components: int) -> np.ndarray:
    """
    Movimiento browniano estándar en la malla j·t/steps, forma
    (size, steps + 1, components). El nivel 0 fija W_t y cada nivel siguiente
    rellena los puntos medios con su propio generador.
    """
    levels = int(math.log2(steps))
    streams = seed.spawn(levels + 1)
    path = np.zeros((size, steps + 1, components))
    path[:, -1, :] = math.sqrt(t) * np.random.default_rng(streams[0]).standard_normal((size, components))
    for level in range(1, levels + 1):
        stride = steps >> (level - 1)
        half = stride // 2
        left = np.arange(0, steps, stride)
        mid = left + half
        right = left + stride
        interval = t * stride / steps
        noise = np.random.default_rng(streams[level]).standard_normal((size, len(mid), components))
        path[:, mid, :] = 0.5 * (path[:, left, :] + path[:, right, :]) + math.sqrt(interval / 4.0) * noise
    return path
