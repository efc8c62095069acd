from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from noise.domain.model.aggregates.noise_spec import NoiseSpec


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """
    Muestras finales (x_t, k_t) del proceso clásico iniciado en el origen con
    momento nulo: k_t = k̃_t y x_t = x̃_t + ∫₀ᵗ k̃_s ds.
    """
    positions: np.ndarray
    momenta: np.ndarray
    jump_counts: np.ndarray
    t: float
    seed: int
    steps: int
    block_size: int
    noise: Optional[NoiseSpec] = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.positions)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def momentum_mean(self):
        """(media, error estándar) por componente"""
        return _mean_and_stderr(self.momenta)

    def position_mean(self):
        return _mean_and_stderr(self.positions)

    def describe(self) -> dict:
        return {
            "samples": self.size,
            "t": self.t,
            "seed": self.seed,
            "steps": self.steps,
            "block_size": self.block_size,
        }


def _mean_and_stderr(values: np.ndarray):
    mean = values.mean(axis=0)
    stderr = values.std(axis=0, ddof=1) / np.sqrt(len(values)) if len(values) > 1 else np.zeros_like(mean)
    return mean, stderr
